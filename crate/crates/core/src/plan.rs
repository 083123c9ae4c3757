//! Lowering of a resolved target graph into an ordered list of build steps.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::{GraphError, Linkage, Target, TargetGraph, TargetKind};
use crate::install::OmnetInstall;
use crate::json::JsonDoc;
use crate::msg::{plan_msg, GenStep};
use crate::ordmap::OrderedMap;
use crate::{path, BuildMode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("installation is missing a required tool: {0}")]
    MissingInstallTool(String),
    #[error(transparent)]
    Msg(#[from] crate::msg::MsgError),
    #[error("two build steps produce `{0}`")]
    DuplicateOutput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Compile,
    Msgc,
    Archive,
    LinkShared,
    LinkExe,
    Phony,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Compile => "compile",
            Rule::Msgc => "msgc",
            Rule::Archive => "archive",
            Rule::LinkShared => "link_shared",
            Rule::LinkExe => "link_exe",
            Rule::Phony => "phony",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildStep {
    pub rule: Rule,
    pub inputs: Vec<String>,
    pub implicit_inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub variables: OrderedMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildPlan {
    /// File-level bindings emitted before the rules (`cxx`, `ar`, `msgc`).
    pub globals: OrderedMap<String, String>,
    pub steps: Vec<BuildStep>,
    pub defaults: Vec<String>,
    pub build_dir: String,
}

impl BuildPlan {
    pub fn to_json(&self) -> JsonDoc {
        let vars = |m: &OrderedMap<String, String>| {
            JsonDoc::object(m.iter().map(|(k, v)| (k.clone(), JsonDoc::from(v.as_str()))))
        };
        JsonDoc::object([
            ("build_dir", self.build_dir.as_str().into()),
            ("globals", vars(&self.globals)),
            (
                "steps",
                JsonDoc::Array(
                    self.steps
                        .iter()
                        .map(|s| {
                            JsonDoc::object([
                                ("rule", s.rule.as_str().into()),
                                ("inputs", JsonDoc::string_array(&s.inputs)),
                                ("implicit_inputs", JsonDoc::string_array(&s.implicit_inputs)),
                                ("outputs", JsonDoc::string_array(&s.outputs)),
                                ("variables", vars(&s.variables)),
                            ])
                        })
                        .collect(),
                ),
            ),
            ("defaults", JsonDoc::string_array(&self.defaults)),
        ])
    }
}

/// Settings for [`lower`].
#[derive(Debug, Clone)]
pub struct PlanConfig {
    pub mode: BuildMode,
    pub build_dir: String,
    /// Directory that relative source, include and NED paths are resolved
    /// against. Generated files mirror paths relative to it.
    pub source_root: String,
    /// Compile flags appended after the installation's baseline flags.
    pub extra_cflags: Vec<String>,
    /// Replaces the installation's baseline compile flags when set.
    pub cflags_override: Option<Vec<String>>,
}

impl PlanConfig {
    pub fn new(mode: BuildMode, source_root: &str, build_dir: &str) -> Self {
        PlanConfig {
            mode,
            build_dir: path::normalize(build_dir),
            source_root: path::normalize(source_root),
            extra_cflags: Vec::new(),
            cflags_override: None,
        }
    }
}

/// Quotes `token` for a POSIX shell when it contains anything beyond a
/// conservative safe set.
pub fn shell_quote(token: &str) -> String {
    let safe = !token.is_empty()
        && token
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b"_-+=/.,:@%^".contains(&b));
    if safe {
        token.to_string()
    } else {
        alloc::format!("'{}'", token.replace('\'', "'\\''"))
    }
}

fn shell_join<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(|t| shell_quote(t.as_ref()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn push_unique(list: &mut Vec<String>, item: String) {
    if !list.contains(&item) {
        list.push(item);
    }
}

/// Artifact file name for a native target.
pub fn artifact_file_name(target: &Target, mode: BuildMode) -> String {
    let sfx = mode.suffix();
    match (target.kind, target.linkage) {
        (TargetKind::OppModelLibrary, Linkage::Shared) => alloc::format!("lib{}{sfx}.so", target.name),
        (TargetKind::OppModelLibrary, Linkage::Static) => alloc::format!("lib{}{sfx}.a", target.name),
        _ => alloc::format!("{}{sfx}", target.name),
    }
}

/// Where a target's binary ends up: the lowered artifact for native targets,
/// the pre-built file for imported ones.
pub fn artifact_path(target: &Target, config: &PlanConfig) -> Option<String> {
    match target.kind {
        TargetKind::Imported => target.output_artifact.clone(),
        _ => Some(path::join(&config.build_dir, &artifact_file_name(target, config.mode))),
    }
}

fn object_path(config: &PlanConfig, target: &str, rel: &str) -> String {
    let rel = path::confine(rel);
    let stem = rel.strip_suffix(".cc").unwrap_or(&rel);
    path::join(&config.build_dir, &alloc::format!("{target}.dir/{stem}.o"))
}

struct Lowering<'a> {
    graph: &'a TargetGraph,
    install: &'a OmnetInstall,
    config: &'a PlanConfig,
}

impl Lowering<'_> {
    fn src(&self, p: &str) -> String {
        path::join(&self.config.source_root, p)
    }

    fn gen_steps(&self, t: &Target, import_dirs: &[String]) -> Result<Vec<GenStep>, PlanError> {
        t.msg_sources
            .iter()
            .map(|m| {
                Ok(plan_msg(self.install, m, import_dirs, &self.config.build_dir)?)
            })
            .collect()
    }

    fn gen_dirs(&self, t: &Target) -> Vec<String> {
        let mut dirs = Vec::new();
        for m in &t.msg_sources {
            if let Ok(g) = plan_msg(self.install, m, &[], &self.config.build_dir) {
                push_unique(&mut dirs, g.working_dir);
            }
        }
        dirs
    }

    fn gen_headers(&self, t: &Target) -> Vec<String> {
        t.msg_sources
            .iter()
            .filter_map(|m| plan_msg(self.install, m, &[], &self.config.build_dir).ok())
            .map(|g| g.outputs.1)
            .collect()
    }

    fn cflags(&self, t: &Target) -> Vec<String> {
        let mut flags: Vec<String> = match &self.config.cflags_override {
            Some(f) => f.clone(),
            None => {
                let (var, default) = match self.config.mode {
                    BuildMode::Release => ("CFLAGS_RELEASE", "-O2 -DNDEBUG"),
                    BuildMode::Debug => ("CFLAGS_DEBUG", "-O0 -g"),
                };
                self.install
                    .config_or(var, default)
                    .split_whitespace()
                    .map(str::to_string)
                    .collect()
            }
        };
        flags.extend(self.config.extra_cflags.iter().cloned());
        // Static model libraries may end up inside a shared one.
        if t.kind == TargetKind::OppModelLibrary {
            push_unique(&mut flags, "-fPIC".to_string());
        }
        flags
    }

    fn target_steps(&self, t: &Target, steps: &mut Vec<BuildStep>) -> Result<String, PlanError> {
        let closure = self.graph.dependency_closure(&t.name)?;

        let mut source_includes = Vec::new();
        for d in t.include_dirs.iter() {
            push_unique(&mut source_includes, self.src(d));
        }
        for dep in &closure {
            for d in &dep.include_dirs {
                push_unique(&mut source_includes, self.src(d));
            }
        }

        let mut includes = source_includes.clone();
        let mut gen_headers = self.gen_headers(t);
        for d in self.gen_dirs(t) {
            push_unique(&mut includes, d);
        }
        for dep in &closure {
            for d in self.gen_dirs(dep) {
                push_unique(&mut includes, d);
            }
            gen_headers.extend(self.gen_headers(dep));
        }
        push_unique(&mut includes, self.install.include_dir.clone());

        let mut defines = t.defines.clone();
        for dep in closure.iter().filter(|d| d.kind == TargetKind::Imported) {
            for d in &dep.defines {
                push_unique(&mut defines, d.clone());
            }
        }

        let gen = self.gen_steps(t, &source_includes)?;
        let mut msgc_includes = Vec::new();
        for d in &source_includes {
            msgc_includes.push("-I".to_string());
            msgc_includes.push(d.clone());
        }
        for g in &gen {
            let mut variables = OrderedMap::new();
            variables.insert("includes".to_string(), shell_join(&msgc_includes));
            variables.insert("cwd".to_string(), shell_quote(&g.working_dir));
            steps.push(BuildStep {
                rule: Rule::Msgc,
                inputs: alloc::vec![self.src(&g.input)],
                implicit_inputs: Vec::new(),
                outputs: alloc::vec![g.outputs.0.clone(), g.outputs.1.clone()],
                variables,
            });
        }

        let compile_vars = {
            let mut v = OrderedMap::new();
            v.insert("flags".to_string(), shell_join(&self.cflags(t)));
            let defs: Vec<String> = defines.iter().map(|d| alloc::format!("-D{d}")).collect();
            v.insert("defines".to_string(), shell_join(&defs));
            let incs: Vec<String> = includes.iter().map(|d| alloc::format!("-I{d}")).collect();
            v.insert("includes".to_string(), shell_join(&incs));
            v
        };

        let mut objects = Vec::new();
        let generated = gen.iter().map(|g| {
            let rel = path::strip_base(&g.outputs.0, &self.config.build_dir).unwrap_or_else(|| g.outputs.0.clone());
            (g.outputs.0.clone(), rel)
        });
        let native = t.cc_sources.iter().map(|s| (self.src(s), s.clone()));
        for (input, rel) in generated.chain(native) {
            let obj = object_path(self.config, &t.name, &rel);
            objects.push(obj.clone());
            steps.push(BuildStep {
                rule: Rule::Compile,
                inputs: alloc::vec![input],
                implicit_inputs: gen_headers.clone(),
                outputs: alloc::vec![obj],
                variables: compile_vars.clone(),
            });
        }

        let artifact = path::join(&self.config.build_dir, &artifact_file_name(t, self.config.mode));
        let mut dep_artifacts = Vec::new();
        for dep in &closure {
            if dep.kind.is_library() {
                if let Some(a) = artifact_path(dep, self.config) {
                    push_unique(&mut dep_artifacts, a);
                }
            }
        }
        let rule = match (t.kind, t.linkage) {
            (TargetKind::OppModelLibrary, Linkage::Static) => Rule::Archive,
            (TargetKind::OppModelLibrary, Linkage::Shared) => Rule::LinkShared,
            _ => Rule::LinkExe,
        };
        let mut variables = OrderedMap::new();
        if rule != Rule::Archive {
            let mut libs = dep_artifacts.clone();
            if matches!(t.kind, TargetKind::OppModelLibrary | TargetKind::TestExecutable) {
                let sfx = self.config.mode.suffix();
                libs.push(alloc::format!("-L{}", self.install.lib_dir));
                libs.push(alloc::format!("-loppenvir{sfx}"));
                libs.push(alloc::format!("-loppsim{sfx}"));
            }
            let ldflags: Vec<&str> = self.install.config_or("LDFLAGS", "").split_whitespace().collect();
            variables.insert("flags".to_string(), shell_join(&ldflags));
            variables.insert("libs".to_string(), shell_join(&libs));
        }
        steps.push(BuildStep {
            rule,
            inputs: objects,
            implicit_inputs: dep_artifacts,
            outputs: alloc::vec![artifact.clone()],
            variables,
        });
        Ok(artifact)
    }
}

/// Lowers `graph` into build steps: per target, message-compiler runs, then
/// compiles of generated and hand-written sources, then one archive or link
/// step. Imported targets add no steps; their artifacts become implicit
/// inputs of dependents' link steps.
pub fn lower(graph: &TargetGraph, install: &OmnetInstall, config: &PlanConfig) -> Result<BuildPlan, PlanError> {
    let order = graph.resolve()?;
    let needs_msgc = graph.targets().any(|t| !t.msg_sources.is_empty());
    if needs_msgc && install.msgc_path.trim().is_empty() {
        return Err(PlanError::MissingInstallTool("message compiler".into()));
    }

    let lowering = Lowering { graph, install, config };
    let mut steps = Vec::new();
    let mut defaults = Vec::new();
    for name in &order {
        let t = graph.get(name).expect("resolved name exists");
        if t.kind == TargetKind::Imported {
            continue;
        }
        defaults.push(lowering.target_steps(t, &mut steps)?);
    }

    let mut seen = BTreeSet::new();
    for s in &steps {
        for o in &s.outputs {
            if !seen.insert(o.as_str()) {
                return Err(PlanError::DuplicateOutput(o.clone()));
            }
        }
    }

    let mut globals = OrderedMap::new();
    globals.insert("cxx".to_string(), shell_quote(install.config_or("CXX", "c++")));
    globals.insert("ar".to_string(), shell_quote(install.config_or("AR", "ar")));
    if needs_msgc {
        globals.insert("msgc".to_string(), shell_quote(&install.msgc_path));
    }

    Ok(BuildPlan {
        globals,
        steps,
        defaults,
        build_dir: config.build_dir.clone(),
    })
}
