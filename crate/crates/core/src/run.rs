//! Run, debug and memcheck invocations for a simulation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::{GraphError, Linkage, Target, TargetGraph, TargetKind};
use crate::install::OmnetInstall;
use crate::ordmap::OrderedMap;
use crate::plan::PlanConfig;
use crate::{path, BuildMode};

/// Separator between folders in the runner's `-n` value.
pub const NED_PATH_SEPARATOR: &str = ";";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("no NED folders to pass to the runner")]
    EmptyNedSet,
    #[error("run `{0}` has no ini file")]
    MissingIniFile(String),
    #[error("run `{0}` targets a library kind but loads no libraries")]
    NoLibraries(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunVariant {
    Run,
    Debug,
    Memcheck,
}

impl RunVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RunVariant::Run => "run",
            RunVariant::Debug => "debug",
            RunVariant::Memcheck => "memcheck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "run" => Some(RunVariant::Run),
            "debug" => Some(RunVariant::Debug),
            "memcheck" => Some(RunVariant::Memcheck),
            _ => None,
        }
    }

    /// `run_<name>`, `debug_<name>`, `memcheck_<name>`.
    pub fn target_name(self, run: &str) -> String {
        alloc::format!("{}_{}", self.as_str(), run)
    }
}

/// A standalone executable that replaces the generic runner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub release: String,
    pub debug: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSpec {
    pub name: String,
    pub target: String,
    pub ini_file: String,
    pub working_dir: String,
    pub ned_folders: Vec<String>,
    /// Libraries for `-l`, without `lib` prefix, mode suffix or extension.
    pub libraries: Vec<String>,
    pub extra_args: Vec<String>,
    /// Set when the model is linked into its own executable.
    pub program: Option<Program>,
}

impl RunSpec {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.ini_file.trim().is_empty() {
            return Err(RunError::MissingIniFile(self.name.clone()));
        }
        if self.ned_folders.is_empty() {
            return Err(RunError::EmptyNedSet);
        }
        Ok(())
    }

    fn args(&self) -> Result<Vec<String>, RunError> {
        let mut args = alloc::vec!["-n".to_string(), format_ned_arg(&self.ned_folders)?];
        for lib in &self.libraries {
            args.push("-l".to_string());
            args.push(lib.clone());
        }
        args.extend(self.extra_args.iter().cloned());
        args.push(self.ini_file.clone());
        Ok(args)
    }

    /// Arguments after the program, shared by every variant.
    pub fn runner_args(&self) -> Result<Vec<String>, RunError> {
        self.validate()?;
        self.args()
    }

    pub fn release_program<'a>(&'a self, install: &'a OmnetInstall) -> &'a str {
        self.program.as_ref().map_or(&install.runner_release, |p| &p.release)
    }

    pub fn debug_program<'a>(&'a self, install: &'a OmnetInstall) -> &'a str {
        self.program.as_ref().map_or(&install.runner_debug, |p| &p.debug)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTarget {
    pub variant: RunVariant,
    pub argv: Vec<String>,
    pub working_dir: String,
}

/// Joins NED folders into the single value passed after `-n`.
pub fn format_ned_arg<S: AsRef<str>>(ned_folders: &[S]) -> Result<String, RunError> {
    if ned_folders.is_empty() {
        return Err(RunError::EmptyNedSet);
    }
    Ok(ned_folders
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(NED_PATH_SEPARATOR))
}

/// `run_<name>` always, `debug_<name>` for debug builds, `memcheck_<name>`
/// when valgrind is available.
pub fn make_run_targets(
    spec: &RunSpec,
    install: &OmnetInstall,
    mode: BuildMode,
    valgrind_present: bool,
) -> Result<OrderedMap<String, RunTarget>, RunError> {
    let args = spec.runner_args()?;
    let with_program = |program: &str| {
        let mut argv = alloc::vec![program.to_string()];
        argv.extend(args.iter().cloned());
        argv
    };
    let run_argv = with_program(spec.release_program(install));

    let mut out = OrderedMap::new();
    let mut add = |variant: RunVariant, argv: Vec<String>| {
        out.insert(
            variant.target_name(&spec.name),
            RunTarget {
                variant,
                argv,
                working_dir: spec.working_dir.clone(),
            },
        );
    };
    add(RunVariant::Run, run_argv.clone());
    if mode == BuildMode::Debug {
        add(RunVariant::Debug, with_program(spec.debug_program(install)));
    }
    if valgrind_present {
        let mut argv = alloc::vec!["valgrind".to_string(), "--tool=memcheck".to_string()];
        argv.extend(run_argv);
        add(RunVariant::Memcheck, argv);
    }
    Ok(out)
}

/// What a project declares for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunRequest {
    pub name: String,
    pub target: String,
    pub ini_file: String,
    pub working_dir: String,
    pub extra_args: Vec<String>,
}

/// Loader name for a library artifact: directory plus bare name, with the
/// `lib` prefix, extension and debug suffix removed.
pub fn library_stem(artifact: &str) -> String {
    let dir = path::parent(artifact).unwrap_or_else(|| ".".to_string());
    let mut name = path::file_name(artifact).unwrap_or(artifact);
    for ext in [".so", ".dylib", ".dll", ".a", ".lib"] {
        if let Some(n) = name.strip_suffix(ext) {
            name = n;
            break;
        }
    }
    let name = name.strip_prefix("lib").filter(|n| !n.is_empty()).unwrap_or(name);
    let name = name.strip_suffix(crate::DEBUG_SUFFIX).filter(|n| !n.is_empty()).unwrap_or(name);
    path::join(&dir, name)
}

fn loadable(t: &Target) -> bool {
    t.kind.is_library() && t.linkage == Linkage::Shared
}

/// Resolves a run request against the graph: NED folders of the target and
/// its dependencies, the shared libraries to load, and the executable when
/// the target is not a library.
pub fn run_spec_from_graph(graph: &TargetGraph, req: &RunRequest, config: &PlanConfig) -> Result<RunSpec, RunError> {
    let target = graph
        .get(&req.target)
        .ok_or_else(|| GraphError::UnknownTarget(req.target.clone()))?;
    let root = &config.source_root;

    let mut ned_folders: Vec<String> = Vec::new();
    for f in graph.collect_ned_folders(&target.name)? {
        let f = path::join(root, &f);
        if !ned_folders.contains(&f) {
            ned_folders.push(f);
        }
    }
    if ned_folders.is_empty() {
        ned_folders.push(root.clone());
    }

    let mut libraries = Vec::new();
    let closure = graph.dependency_closure(&target.name)?;
    for t in core::iter::once(target).chain(closure) {
        if !loadable(t) {
            continue;
        }
        let stem = match t.kind {
            TargetKind::Imported => t.output_artifact.as_deref().map(library_stem),
            _ => Some(path::join(&config.build_dir, &t.name)),
        };
        if let Some(s) = stem {
            if !libraries.contains(&s) {
                libraries.push(s);
            }
        }
    }
    if target.kind.is_library() && libraries.is_empty() {
        return Err(RunError::NoLibraries(req.name.clone()));
    }

    let program = match target.kind {
        TargetKind::Executable | TargetKind::TestExecutable => Some(Program {
            release: path::join(&config.build_dir, &target.name),
            debug: path::join(&config.build_dir, &alloc::format!("{}{}", target.name, crate::DEBUG_SUFFIX)),
        }),
        _ => None,
    };

    let spec = RunSpec {
        name: req.name.clone(),
        target: req.target.clone(),
        ini_file: if req.ini_file.trim().is_empty() {
            String::new()
        } else {
            path::join(root, &req.ini_file)
        },
        working_dir: path::join(root, if req.working_dir.is_empty() { "." } else { &req.working_dir }),
        ned_folders,
        libraries,
        extra_args: req.extra_args.clone(),
        program,
    };
    spec.validate()?;
    Ok(spec)
}
