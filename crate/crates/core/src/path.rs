//! Lexical helpers for `/`-separated path strings.
//!
//! Paths in this crate are plain strings so they can be emitted verbatim into
//! build files and editor configs. Backslashes are accepted on input and
//! normalized to `/`. Nothing here touches a filesystem.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Replaces every `\` with `/`.
pub fn to_slash(p: &str) -> String {
    p.replace('\\', "/")
}

fn drive_prefix(p: &str) -> Option<&str> {
    let b = p.as_bytes();
    if b.len() >= 2 && b[0].is_ascii_alphabetic() && b[1] == b':' {
        Some(&p[..2])
    } else {
        None
    }
}

/// `true` for `/x`, `\x` and drive-letter paths such as `C:/x`.
pub fn is_absolute(p: &str) -> bool {
    p.starts_with('/') || p.starts_with('\\') || drive_prefix(p).is_some()
}

/// Splits off the root (`/`, `C:/`, `C:`) from the remainder.
fn split_root(p: &str) -> (&str, &str) {
    if let Some(d) = drive_prefix(p) {
        let rest = &p[2..];
        if rest.starts_with('/') {
            (&p[..3], &p[3..])
        } else {
            (d, rest)
        }
    } else if let Some(rest) = p.strip_prefix('/') {
        ("/", rest)
    } else {
        ("", p)
    }
}

/// Lexically normalizes `p`: collapses `.`, `..`, repeated and trailing
/// separators. An empty relative result is `"."`.
pub fn normalize(p: &str) -> String {
    let p = to_slash(p);
    let (root, rest) = split_root(&p);
    let mut parts: Vec<&str> = Vec::new();
    for c in rest.split('/') {
        match c {
            "" | "." => {}
            ".." => match parts.last() {
                Some(&last) if last != ".." => {
                    parts.pop();
                }
                _ if !root.is_empty() => {}
                _ => parts.push(".."),
            },
            other => parts.push(other),
        }
    }
    let mut out = String::from(root);
    out.push_str(&parts.join("/"));
    if out.is_empty() {
        out.push('.');
    }
    out
}

/// Joins `rel` onto `base` and normalizes. An absolute `rel` wins.
pub fn join(base: &str, rel: &str) -> String {
    if is_absolute(rel) || base.is_empty() {
        normalize(rel)
    } else {
        let mut s = to_slash(base);
        s.push('/');
        s.push_str(rel);
        normalize(&s)
    }
}

/// Last component, if any.
pub fn file_name(p: &str) -> Option<&str> {
    let trimmed = p.trim_end_matches(['/', '\\']);
    let name = trimmed.rsplit(['/', '\\']).next()?;
    if name.is_empty() || name == "." || name == ".." || drive_prefix(name) == Some(name) {
        None
    } else {
        Some(name)
    }
}

/// Normalized parent directory. `"."` for a bare relative name.
pub fn parent(p: &str) -> Option<String> {
    let n = normalize(p);
    let (root, rest) = split_root(&n);
    if rest.is_empty() || rest == "." {
        return None;
    }
    match rest.rfind('/') {
        Some(i) => Some(alloc::format!("{}{}", root, &rest[..i])),
        None if root.is_empty() => Some(".".to_string()),
        None => Some(root.to_string()),
    }
}

/// Path of `p` relative to `base` when `p` lies at or below `base`.
pub fn strip_base(p: &str, base: &str) -> Option<String> {
    let p = normalize(p);
    let base = normalize(base);
    if p == base {
        return Some(".".to_string());
    }
    if base == "." && !is_absolute(&p) && !p.starts_with("..") {
        return Some(p);
    }
    let prefix = if base.ends_with('/') {
        base
    } else {
        alloc::format!("{}/", base)
    };
    p.strip_prefix(prefix.as_str()).map(|s| s.to_string())
}

/// Maps any path to a relative path with no `..` components so it can be
/// mirrored below an output directory. Distinct normalized inputs give
/// distinct results.
///
/// `..` becomes `_up`, a filesystem root `_root` and a drive `_<letter>`.
/// Real components starting with `_` get one more `_`, so they can never
/// look like those markers.
pub fn confine(p: &str) -> String {
    let n = normalize(p);
    let (root, rest) = split_root(&n);
    let mut parts: Vec<String> = Vec::new();
    match root {
        "" => {}
        "/" => parts.push("_root".to_string()),
        drive => parts.push(alloc::format!("_{}", &drive[..1])),
    }
    for c in rest.split('/') {
        match c {
            "" | "." => {}
            ".." => parts.push("_up".to_string()),
            other if other.starts_with('_') => parts.push(alloc::format!("_{other}")),
            other => parts.push(other.to_string()),
        }
    }
    parts.join("/")
}
