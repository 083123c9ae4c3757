use alloc::string::{String, ToString};
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid version string `{0}`")]
pub struct VersionError(pub String);

/// A simulator release identifier such as `5.6.2` or `6.0pre10`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionId {
    pub major: u32,
    pub minor: u32,
    pub patch: Option<u32>,
    /// Lowercased pre-release tag, e.g. `pre10`.
    pub prerelease: Option<String>,
    /// The string this was parsed from; `Display` prints it unchanged.
    pub raw: String,
}

impl VersionId {
    pub fn parse(s: &str) -> Result<Self, VersionError> {
        parse_version(s)
    }
}

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

fn take_number(s: &str) -> Option<(u32, &str)> {
    let end = s.bytes().take_while(u8::is_ascii_digit).count();
    if end == 0 {
        return None;
    }
    Some((s[..end].parse().ok()?, &s[end..]))
}

/// Parses `MAJOR.MINOR[.PATCH][TAG]`. An `omnetpp-` prefix and surrounding
/// whitespace are tolerated so `Version` marker files parse directly. The tag
/// may be introduced by `-` or follow the digits directly.
pub fn parse_version(s: &str) -> Result<VersionId, VersionError> {
    let err = || VersionError(s.to_string());
    let raw = s.trim();
    let body = raw.strip_prefix("omnetpp-").unwrap_or(raw);
    let (major, rest) = take_number(body).ok_or_else(err)?;
    let rest = rest.strip_prefix('.').ok_or_else(err)?;
    let (minor, mut rest) = take_number(rest).ok_or_else(err)?;
    let mut patch = None;
    if let Some(after) = rest.strip_prefix('.') {
        let (p, r) = take_number(after).ok_or_else(err)?;
        patch = Some(p);
        rest = r;
    }
    let tag = rest.strip_prefix('-').unwrap_or(rest);
    let prerelease = if tag.is_empty() {
        None
    } else if tag.bytes().all(|b| b.is_ascii_alphanumeric()) && tag.as_bytes()[0].is_ascii_alphabetic() {
        Some(tag.to_ascii_lowercase())
    } else {
        return Err(err());
    };
    Ok(VersionId {
        major,
        minor,
        patch,
        prerelease,
        raw: raw.to_string(),
    })
}

/// Whether the release ships the LLDB pretty-printer: 6.0 and later,
/// pre-releases of 6.0 included.
pub fn version_gate(v: &VersionId) -> bool {
    (v.major, v.minor) >= (6, 0)
}
