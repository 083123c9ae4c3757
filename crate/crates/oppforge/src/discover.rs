//! Locating an OMNeT++ installation on disk.

use std::fs;
use std::path::{Path, PathBuf};

use oppforge_core::install::LLDB_FORMATTER_REL;
use oppforge_core::{parse_makefile_inc, parse_version, path as cpath, version_gate, OmnetInstall, VarMap};

use crate::fsio::{is_executable, path_string};

/// Environment variable naming the installation root.
pub const ROOT_ENV: &str = "OMNETPP_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum DiscoverError {
    #[error("no OMNeT++ installation found{0}")]
    NotFound(String),
    #[error("OMNeT++ installation at {root} is incomplete: missing {component}")]
    Incomplete { root: String, component: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
}

const RUNNER: &str = "opp_run";
const MSGC: &str = "opp_msgc";
const DEBUG_RUNNERS: [&str; 2] = ["opp_run_dbg", "opp_run_debug"];

/// Windows tool directories, in `PATH` order, below the install root.
const WIN_TOOL_DIRS: [&str; 3] = ["tools/win64/mingw64/bin", "tools/win64/usr/bin", "tools/win64/opt/mingw64/bin"];

fn tool(bin: &Path, name: &str) -> Option<PathBuf> {
    [name.to_string(), format!("{name}.exe")]
        .into_iter()
        .map(|n| bin.join(n))
        .find(|p| is_executable(p))
}

/// Absolute and lexically normalized.
fn absolute(p: &Path) -> PathBuf {
    let p = std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    PathBuf::from(cpath::normalize(&path_string(&p)))
}

fn is_install_root(dir: &Path) -> bool {
    dir.join("Version").is_file() || dir.join("Makefile.inc").is_file()
}

/// Finds and characterizes an installation. `root_override` wins; otherwise
/// the first `search_path` entry holding the runner is used and its
/// ancestors are walked up to the directory carrying the version marker.
pub fn discover(root_override: Option<&Path>, search_path: &[PathBuf]) -> Result<OmnetInstall, DiscoverError> {
    let root = match root_override {
        Some(r) => {
            let r = absolute(r);
            if tool(&r.join("bin"), RUNNER).is_none() {
                return Err(DiscoverError::NotFound(format!(" at {} (no bin/{RUNNER})", path_string(&r))));
            }
            r
        }
        None => search_path
            .iter()
            .filter(|d| tool(d, RUNNER).is_some())
            .find_map(|d| {
                absolute(d)
                    .ancestors().find(|a| is_install_root(a)).map(Path::to_path_buf)
            })
            .ok_or_else(|| DiscoverError::NotFound(" on the search path".into()))?,
    };
    probe(&root)
}

fn read(p: &Path) -> Result<String, DiscoverError> {
    fs::read(p)
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .map_err(|source| DiscoverError::Io { path: path_string(p), source })
}

fn probe(root: &Path) -> Result<OmnetInstall, DiscoverError> {
    let root_s = path_string(root);
    let incomplete = |component: &str| DiscoverError::Incomplete {
        root: root_s.clone(),
        component: component.to_string(),
    };

    let makefile_inc = root.join("Makefile.inc");
    let config = if makefile_inc.is_file() {
        parse_makefile_inc(&read(&makefile_inc)?)
            .map_err(|e| DiscoverError::Config(format!("{}: {e}", path_string(&makefile_inc))))?
    } else {
        VarMap::new()
    };

    let version_file = root.join("Version");
    let marker = if version_file.is_file() {
        read(&version_file)?
    } else {
        config
            .get("OMNETPP_VERSION")
            .map(str::to_string)
            .ok_or_else(|| incomplete("version marker (Version file or OMNETPP_VERSION in Makefile.inc)"))?
    };
    let marker = marker.trim();
    let version = parse_version(marker.strip_prefix("omnetpp-").unwrap_or(marker))
        .map_err(|e| DiscoverError::Config(e.to_string()))?;

    let bin = root.join("bin");
    let runner = tool(&bin, RUNNER).ok_or_else(|| incomplete(&format!("bin/{RUNNER}")))?;
    let runner_debug = DEBUG_RUNNERS
        .iter()
        .find_map(|n| tool(&bin, n))
        .ok_or_else(|| incomplete(&format!("bin/{}", DEBUG_RUNNERS[0])))?;
    let msgc = tool(&bin, MSGC).ok_or_else(|| incomplete(&format!("bin/{MSGC}")))?;

    let configured_dir = |var: &str, default: &str| match config.get(var) {
        Some(v) if cpath::is_absolute(v.trim()) && !v.contains("$(") => cpath::normalize(v.trim()),
        _ => cpath::join(&root_s, default),
    };

    let formatter = root.join(LLDB_FORMATTER_REL);
    let lldb_formatter = (version_gate(&version) && formatter.is_file()).then(|| path_string(&formatter));

    let mut tool_path_entries = vec![path_string(&bin)];
    if root.join("tools/win64").is_dir() {
        let lib = root.join("lib");
        if lib.is_dir() {
            tool_path_entries.push(path_string(&lib));
        }
        for d in WIN_TOOL_DIRS {
            let p = root.join(d);
            if p.is_dir() {
                tool_path_entries.push(path_string(&p));
            }
        }
    }
    tool_path_entries.dedup();

    Ok(OmnetInstall {
        root: root_s.clone(),
        version,
        bin_dir: path_string(&bin),
        include_dir: configured_dir("OMNETPP_INCL_DIR", "include"),
        lib_dir: configured_dir("OMNETPP_LIB_DIR", "lib"),
        msgc_path: path_string(&msgc),
        runner_release: path_string(&runner),
        runner_debug: path_string(&runner_debug),
        lldb_formatter,
        tool_path_entries,
        config,
    })
}
