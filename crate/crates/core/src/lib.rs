//! Core model for building and running OMNeT++ simulation projects without
//! the simulator's own make-based tooling.
//!
//! Everything in this crate is a pure function of its inputs: parsing of
//! installation and project Makefiles, the target graph, message-compiler
//! planning, lowering to a Ninja build file, run/debug argument synthesis and
//! editor configuration generation. Filesystem probing, process execution and
//! the command-line front end live in the `oppforge` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod graph;
pub mod ide;
pub mod install;
pub mod json;
pub mod manifest;
pub mod msg;
pub mod ninja;
pub mod ordmap;
pub mod path;
pub mod plan;
pub mod run;
pub mod varmap;
pub mod version;

pub use graph::{GraphError, Linkage, Target, TargetGraph, TargetKind, TargetSpec};
pub use install::OmnetInstall;
pub use json::{parse_jsonc, JsonDoc, SyntaxError};
pub use manifest::{manifest_from_vars, ArtifactKind, ManifestError, ProjectManifest};
pub use msg::{plan_msg, scan_msg_imports, GenStep, MsgError};
pub use ninja::emit_ninja;
pub use plan::{lower, BuildPlan, BuildStep, PlanConfig, PlanError, Rule};
pub use run::{format_ned_arg, make_run_targets, RunError, RunSpec, RunTarget, RunVariant};
pub use varmap::{parse_makefile_inc, parse_opp_makefile, MakeError, VarMap};
pub use version::{parse_version, version_gate, VersionId};

/// Suffix appended to debug artifact names.
pub const DEBUG_SUFFIX: &str = "_dbg";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum BuildMode {
    #[default]
    Release,
    Debug,
}

impl BuildMode {
    /// `""` for release, [`DEBUG_SUFFIX`] for debug.
    pub fn suffix(self) -> &'static str {
        match self {
            BuildMode::Release => "",
            BuildMode::Debug => DEBUG_SUFFIX,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BuildMode::Release => "release",
            BuildMode::Debug => "debug",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "release" => Some(BuildMode::Release),
            "debug" => Some(BuildMode::Debug),
            _ => None,
        }
    }
}
