//! Small filesystem helpers.

use std::ffi::OsStr;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// `/`-separated string form of a path.
pub fn path_string(p: &Path) -> String {
    oppforge_core::path::to_slash(&p.to_string_lossy())
}

#[cfg(unix)]
pub fn is_executable(p: &Path) -> bool {
    use std::os::unix::fs::PermissionsExt;
    fs::metadata(p).is_ok_and(|m| m.is_file() && m.permissions().mode() & 0o111 != 0)
}

#[cfg(not(unix))]
pub fn is_executable(p: &Path) -> bool {
    p.is_file()
}

/// Directories listed in a `PATH`-style variable.
pub fn split_search_path(value: Option<&OsStr>) -> Vec<PathBuf> {
    value
        .map(|v| std::env::split_paths(v).filter(|p| !p.as_os_str().is_empty()).collect())
        .unwrap_or_default()
}

/// First executable called `name` on `search_path`.
pub fn find_on_path(name: &str, search_path: &[PathBuf]) -> Option<PathBuf> {
    search_path.iter().find_map(|d| {
        [name.to_string(), format!("{name}.exe")]
            .into_iter()
            .map(|n| d.join(n))
            .find(|p| is_executable(p))
    })
}

/// Replaces `path` with `bytes` through a temporary file in the same
/// directory. Leaves the file alone when it already holds `bytes`.
/// Returns whether anything was written.
pub fn write_if_changed(path: &Path, bytes: &[u8]) -> io::Result<bool> {
    if fs::read(path).is_ok_and(|old| old == bytes) {
        return Ok(false);
    }
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(true)
}
