use alloc::string::String;
use alloc::vec::Vec;

use crate::json::JsonDoc;
use crate::varmap::VarMap;
use crate::version::VersionId;

/// A located simulator installation. Built by the filesystem probe in the
/// std companion crate; everything downstream only reads it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmnetInstall {
    pub root: String,
    pub version: VersionId,
    pub bin_dir: String,
    pub include_dir: String,
    pub lib_dir: String,
    pub msgc_path: String,
    pub runner_release: String,
    pub runner_debug: String,
    pub lldb_formatter: Option<String>,
    /// Directories to prepend to `PATH`, in order, without duplicates.
    pub tool_path_entries: Vec<String>,
    /// Variables from the installation's `Makefile.inc`, empty if absent.
    pub config: VarMap,
}

impl OmnetInstall {
    /// A conventional layout rooted at `root` with no probing. Mostly useful
    /// for tests and for callers that already know the tree.
    pub fn conventional(root: &str, version: VersionId) -> Self {
        let j = |rel: &str| crate::path::join(root, rel);
        let lldb_formatter = crate::version::version_gate(&version)
            .then(|| j(crate::install::LLDB_FORMATTER_REL));
        OmnetInstall {
            root: crate::path::normalize(root),
            version,
            bin_dir: j("bin"),
            include_dir: j("include"),
            lib_dir: j("lib"),
            msgc_path: j("bin/opp_msgc"),
            runner_release: j("bin/opp_run"),
            runner_debug: j("bin/opp_run_dbg"),
            lldb_formatter,
            tool_path_entries: alloc::vec![j("bin")],
            config: VarMap::new(),
        }
    }

    /// Value of a `Makefile.inc` variable, or `default` when it is missing or
    /// still contains unresolved make syntax.
    pub fn config_or<'a>(&'a self, name: &str, default: &'a str) -> &'a str {
        match self.config.get(name) {
            Some(v) if !v.trim().is_empty() && !v.contains("$(") => v.trim(),
            _ => default,
        }
    }

    pub fn to_json(&self) -> JsonDoc {
        JsonDoc::object([
            ("root", self.root.as_str().into()),
            ("version", self.version.raw.as_str().into()),
            ("bin_dir", self.bin_dir.as_str().into()),
            ("include_dir", self.include_dir.as_str().into()),
            ("lib_dir", self.lib_dir.as_str().into()),
            ("msgc_path", self.msgc_path.as_str().into()),
            ("runner_release", self.runner_release.as_str().into()),
            ("runner_debug", self.runner_debug.as_str().into()),
            ("lldb_formatter", self.lldb_formatter.as_deref().into()),
            ("tool_path_entries", JsonDoc::string_array(&self.tool_path_entries)),
        ])
    }
}

/// Location of the LLDB formatter script relative to the install root.
pub const LLDB_FORMATTER_REL: &str = "python/omnetpp/lldb/formatters/omnetpp.py";
