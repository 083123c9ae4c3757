//! The `oppforge.json` project file and everything derived from it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use oppforge_core::graph::Linkage;
use oppforge_core::manifest::parse_nedfolders;
use oppforge_core::msg::import_provider;
use oppforge_core::run::RunRequest;
use oppforge_core::varmap::parse_opp_makefile_bytes;
use oppforge_core::{
    manifest_from_vars, parse_jsonc, path as cpath, scan_msg_imports, BuildMode, GraphError, ManifestError,
    MakeError, PlanConfig, ProjectManifest, SyntaxError, TargetGraph, TargetKind, TargetSpec,
};

use crate::fsio::path_string;

pub const DEFAULT_PROJECT_FILE: &str = "oppforge.json";
pub const NEDFOLDERS_FILE: &str = ".nedfolders";

#[derive(Debug, thiserror::Error)]
pub enum ProjectError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax { path: String, source: SyntaxError },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Make { path: String, source: MakeError },
    #[error("{path}: {source}")]
    Manifest { path: String, source: ManifestError },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    #[serde(default)]
    pub omnetpp_root: Option<String>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default = "default_build_dir")]
    pub build_dir: String,
    #[serde(default)]
    pub targets: Vec<TargetDecl>,
    #[serde(default)]
    pub imports: Vec<ImportDecl>,
    #[serde(default)]
    pub runs: Vec<RunDecl>,
    #[serde(default)]
    pub ide: Option<IdeDecl>,
}

fn default_build_dir() -> String {
    "build".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDecl {
    pub name: String,
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub linkage: Option<String>,
    /// Glob patterns relative to the project root.
    pub sources: Vec<String>,
    #[serde(default)]
    pub include_dirs: Vec<String>,
    #[serde(default)]
    pub defines: Vec<String>,
    #[serde(default)]
    pub ned_folders: Vec<String>,
    #[serde(default)]
    pub deps: Vec<String>,
}

fn default_kind() -> String {
    TargetKind::OppModelLibrary.as_str().into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportDecl {
    /// An `opp_makemake` generated Makefile.
    pub makefile: String,
    /// Defaults to the Makefile's directory.
    #[serde(default)]
    pub project_root: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDecl {
    pub name: String,
    pub target: String,
    pub ini_file: String,
    #[serde(default)]
    pub working_dir: Option<String>,
    #[serde(default)]
    pub extra_args: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IdeDecl {
    #[serde(default)]
    pub kit_name: Option<String>,
    #[serde(default)]
    pub compiler_label: Option<String>,
    #[serde(default)]
    pub c_compiler: Option<String>,
    #[serde(default)]
    pub cxx_compiler: Option<String>,
    #[serde(default = "default_flavors")]
    pub flavors: Vec<String>,
    /// `windows_cmd` or `posix_sh`.
    #[serde(default)]
    pub env_script: Option<String>,
    #[serde(default)]
    pub venv: Option<String>,
    /// Fail instead of warning when lldb is requested without a formatter.
    #[serde(default)]
    pub require_formatter: bool,
}

fn default_flavors() -> Vec<String> {
    vec!["lldb".into()]
}

/// A loaded project file together with the directory it lives in.
#[derive(Debug, Clone)]
pub struct Project {
    pub file: ProjectFile,
    pub root: String,
    pub path: PathBuf,
}

fn read_bytes(p: &Path) -> Result<Vec<u8>, ProjectError> {
    fs::read(p).map_err(|source| ProjectError::Io { path: path_string(p), source })
}

fn read_text(p: &Path) -> Result<String, ProjectError> {
    Ok(String::from_utf8_lossy(&read_bytes(p)?).into_owned())
}

impl Project {
    pub fn load(path: &Path) -> Result<Project, ProjectError> {
        let path = std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf());
        let shown = path_string(&path);
        let doc = parse_jsonc(&read_text(&path)?).map_err(|source| ProjectError::Syntax {
            path: shown.clone(),
            source,
        })?;
        let file: ProjectFile = serde_json::from_str(&doc.to_compact()).map_err(|e| ProjectError::Schema {
            path: shown.clone(),
            message: e.to_string(),
        })?;
        let root = path.parent().map(path_string).unwrap_or_else(|| ".".into());
        let project = Project { file, root, path };
        project.validate()?;
        Ok(project)
    }

    fn validate(&self) -> Result<(), ProjectError> {
        let f = &self.file;
        if let Some(m) = &f.mode {
            BuildMode::parse(m).ok_or_else(|| ProjectError::Invalid(format!("unknown mode `{m}`")))?;
        }
        for t in &f.targets {
            TargetKind::parse(&t.kind)
                .filter(|k| *k != TargetKind::Imported)
                .ok_or_else(|| ProjectError::Invalid(format!("target `{}`: unknown kind `{}`", t.name, t.kind)))?;
            if let Some(l) = &t.linkage {
                parse_linkage(l)?;
            }
        }
        for i in &f.imports {
            let mk = self.abs(&i.makefile);
            if !Path::new(&mk).is_file() {
                return Err(ProjectError::Invalid(format!("import Makefile `{mk}` does not exist")));
            }
        }
        let mut names = Vec::new();
        for r in &f.runs {
            if names.contains(&&r.name) {
                return Err(ProjectError::Invalid(format!("run `{}` declared twice", r.name)));
            }
            names.push(&r.name);
            let ini = self.abs(&r.ini_file);
            if !Path::new(&ini).is_file() {
                return Err(ProjectError::Invalid(format!("run `{}`: ini file `{ini}` does not exist", r.name)));
            }
        }
        if let Some(ide) = &f.ide {
            for fl in &ide.flavors {
                oppforge_core::ide::DebugFlavor::parse(fl)
                    .ok_or_else(|| ProjectError::Invalid(format!("unknown debug flavor `{fl}`")))?;
            }
            if let Some(s) = &ide.env_script {
                parse_script_style(s)?;
            }
        }
        Ok(())
    }

    /// `p` resolved against the project directory.
    pub fn abs(&self, p: &str) -> String {
        cpath::join(&self.root, p)
    }

    pub fn mode(&self, cli_mode: Option<BuildMode>) -> BuildMode {
        cli_mode
            .or_else(|| self.file.mode.as_deref().and_then(BuildMode::parse))
            .unwrap_or_default()
    }

    pub fn build_dir(&self) -> String {
        self.abs(&self.file.build_dir)
    }

    pub fn plan_config(&self, mode: BuildMode) -> PlanConfig {
        PlanConfig::new(mode, &self.root, &self.build_dir())
    }

    pub fn omnetpp_root(&self) -> Option<String> {
        self.file.omnetpp_root.as_deref().map(|r| self.abs(r))
    }

    /// Assembles the target graph: imports, native targets with expanded
    /// source globs, then dependency edges implied by `.msg` imports.
    pub fn graph(&self, mode: BuildMode) -> Result<TargetGraph, ProjectError> {
        let mut graph = TargetGraph::new();
        // Declared deps name imports by their release name; debug builds
        // carry a suffix, so map one to the other.
        let mut aliases = BTreeMap::new();
        for i in &self.file.imports {
            let makefile = self.abs(&i.makefile);
            let root = i.project_root.as_deref().map(|r| self.abs(r));
            let release = import_manifest(Path::new(&makefile), root.as_deref(), BuildMode::Release)?;
            let m = import_manifest(Path::new(&makefile), root.as_deref(), mode)?;
            aliases.insert(release.name, m.name.clone());
            graph = graph.import_opp_target(&m)?;
        }
        for t in &self.file.targets {
            let kind = TargetKind::parse(&t.kind).expect("validated");
            let mut sources = Vec::new();
            for pattern in &t.sources {
                for s in expand_glob(&self.root, pattern)? {
                    if !sources.contains(&s) {
                        sources.push(s);
                    }
                }
            }
            let deps = t.deps.iter().map(|d| aliases.get(d).unwrap_or(d).clone());
            let mut spec = TargetSpec::new(t.name.clone(), kind)
                .sources(sources)
                .deps(deps)
                .ned_folders(t.ned_folders.iter().cloned())
                .include_dirs(t.include_dirs.iter().cloned())
                .defines(t.defines.iter().cloned());
            if let Some(l) = &t.linkage {
                spec = spec.linkage(parse_linkage(l)?);
            }
            graph = graph.add_opp_target(spec)?;
        }

        let mut edges = Vec::new();
        for t in graph.targets() {
            for m in &t.msg_sources {
                for imp in scan_msg_imports(&read_text(Path::new(&self.abs(m)))?) {
                    if let Some(p) = import_provider(&graph, &t.name, &imp) {
                        edges.push((t.name.clone(), p.to_string()));
                    }
                }
            }
        }
        for (from, to) in edges {
            graph = graph.with_dependency(&from, &to)?;
        }
        Ok(graph)
    }

    pub fn run_request(&self, name: &str) -> Option<RunRequest> {
        self.file.runs.iter().find(|r| r.name == name).map(|r| RunRequest {
            name: r.name.clone(),
            target: r.target.clone(),
            ini_file: r.ini_file.clone(),
            working_dir: r.working_dir.clone().unwrap_or_else(|| ".".into()),
            extra_args: r.extra_args.clone(),
        })
    }
}

fn parse_linkage(s: &str) -> Result<Linkage, ProjectError> {
    match s {
        "shared" => Ok(Linkage::Shared),
        "static" => Ok(Linkage::Static),
        _ => Err(ProjectError::Invalid(format!("unknown linkage `{s}`"))),
    }
}

pub fn parse_script_style(s: &str) -> Result<oppforge_core::ide::ScriptStyle, ProjectError> {
    use oppforge_core::ide::ScriptStyle;
    match s {
        "windows_cmd" => Ok(ScriptStyle::WindowsCmd),
        "posix_sh" => Ok(ScriptStyle::PosixSh),
        _ => Err(ProjectError::Invalid(format!("unknown env script style `{s}`"))),
    }
}

/// Files matching `pattern` below `root`, sorted, relative to `root`.
pub fn expand_glob(root: &str, pattern: &str) -> Result<Vec<String>, ProjectError> {
    if cpath::is_absolute(pattern) || cpath::normalize(pattern).starts_with("..") {
        return Err(ProjectError::Invalid(format!("source pattern `{pattern}` must stay inside the project")));
    }
    let full = format!("{}/{}", glob::Pattern::escape(root), pattern);
    let paths = glob::glob(&full).map_err(|e| ProjectError::Invalid(format!("bad pattern `{pattern}`: {e}")))?;
    let mut out = Vec::new();
    for p in paths {
        let p = p.map_err(|e| ProjectError::Io {
            path: path_string(e.path()),
            source: std::io::Error::other(e.to_string()),
        })?;
        if p.is_file() {
            let s = path_string(&p);
            out.push(cpath::strip_base(&s, root).unwrap_or(s));
        }
    }
    if out.is_empty() {
        return Err(ProjectError::Invalid(format!("source pattern `{pattern}` matches no files")));
    }
    out.sort();
    Ok(out)
}

/// Lines of `<project_root>/.nedfolders`, or nothing if the file is absent.
pub fn read_nedfolders(project_root: &str) -> Result<Vec<String>, ProjectError> {
    let p = Path::new(project_root).join(NEDFOLDERS_FILE);
    if !p.is_file() {
        return Ok(Vec::new());
    }
    Ok(parse_nedfolders(&read_text(&p)?, project_root))
}

/// Reads an `opp_makemake` Makefile into an import manifest.
pub fn import_manifest(makefile: &Path, project_root: Option<&str>, mode: BuildMode) -> Result<ProjectManifest, ProjectError> {
    let makefile = std::path::absolute(makefile).unwrap_or_else(|_| makefile.to_path_buf());
    let shown = path_string(&makefile);
    let vars = parse_opp_makefile_bytes(&read_bytes(&makefile)?).map_err(|source| ProjectError::Make {
        path: shown.clone(),
        source,
    })?;
    let root = match project_root {
        Some(r) => path_string(&std::path::absolute(r).unwrap_or_else(|_| PathBuf::from(r))),
        None => makefile.parent().map(path_string).unwrap_or_else(|| ".".into()),
    };
    let ned = read_nedfolders(&root)?;
    manifest_from_vars(&vars, &root, mode, &ned).map_err(|source| ProjectError::Manifest { path: shown, source })
}
