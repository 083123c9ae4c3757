//! Multi-target build model: native simulation libraries, production and
//! test executables, and imported pre-built projects in one graph.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::manifest::ProjectManifest;
use crate::ordmap::OrderedMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("target `{0}` already exists")]
    DuplicateTarget(String),
    #[error("unsupported source `{path}` (extension `{ext}`); only .cc and .msg are accepted")]
    UnsupportedSource { path: String, ext: String },
    #[error("target `{0}` needs at least one .cc source")]
    NoSources(String),
    #[error("imported targets can only be added from a manifest")]
    ImportedKind,
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("target `{target}` depends on unknown target `{dep}`")]
    UnknownDependency { target: String, dep: String },
    #[error("dependency cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    /// Dynamically loaded simulation model library.
    OppModelLibrary,
    Executable,
    TestExecutable,
    Imported,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::OppModelLibrary => "opp_model_library",
            TargetKind::Executable => "executable",
            TargetKind::TestExecutable => "test_executable",
            TargetKind::Imported => "imported",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "opp_model_library" => TargetKind::OppModelLibrary,
            "executable" => TargetKind::Executable,
            "test_executable" => TargetKind::TestExecutable,
            "imported" => TargetKind::Imported,
            _ => return None,
        })
    }

    pub fn is_library(self) -> bool {
        matches!(self, TargetKind::OppModelLibrary | TargetKind::Imported)
    }
}

/// How a model library is linked. Ignored for executables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Linkage {
    #[default]
    Shared,
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub name: String,
    pub kind: TargetKind,
    pub linkage: Linkage,
    pub cc_sources: Vec<String>,
    pub msg_sources: Vec<String>,
    pub include_dirs: Vec<String>,
    pub defines: Vec<String>,
    pub own_ned_folders: Vec<String>,
    pub deps: Vec<String>,
    /// Pre-built binary of an imported target; native artifacts are named
    /// during lowering.
    pub output_artifact: Option<String>,
}

/// Arguments for [`TargetGraph::add_opp_target`].
#[derive(Debug, Clone, Default)]
pub struct TargetSpec {
    pub name: String,
    pub kind: Option<TargetKind>,
    pub linkage: Linkage,
    pub sources: Vec<String>,
    pub include_dirs: Vec<String>,
    pub defines: Vec<String>,
    pub ned_folders: Vec<String>,
    pub deps: Vec<String>,
}

impl TargetSpec {
    pub fn new(name: impl Into<String>, kind: TargetKind) -> Self {
        TargetSpec {
            name: name.into(),
            kind: Some(kind),
            ..Default::default()
        }
    }

    pub fn sources<S: Into<String>>(mut self, s: impl IntoIterator<Item = S>) -> Self {
        self.sources = s.into_iter().map(Into::into).collect();
        self
    }

    pub fn deps<S: Into<String>>(mut self, d: impl IntoIterator<Item = S>) -> Self {
        self.deps = d.into_iter().map(Into::into).collect();
        self
    }

    pub fn ned_folders<S: Into<String>>(mut self, n: impl IntoIterator<Item = S>) -> Self {
        self.ned_folders = n.into_iter().map(Into::into).collect();
        self
    }

    pub fn include_dirs<S: Into<String>>(mut self, i: impl IntoIterator<Item = S>) -> Self {
        self.include_dirs = i.into_iter().map(Into::into).collect();
        self
    }

    pub fn defines<S: Into<String>>(mut self, d: impl IntoIterator<Item = S>) -> Self {
        self.defines = d.into_iter().map(Into::into).collect();
        self
    }

    pub fn linkage(mut self, l: Linkage) -> Self {
        self.linkage = l;
        self
    }
}

fn extension(p: &str) -> &str {
    let name = crate::path::file_name(p).unwrap_or(p);
    match name.rfind('.') {
        Some(i) if i > 0 => &name[i + 1..],
        _ => "",
    }
}

/// Targets keyed by name, in insertion order. Operations return new graphs;
/// a graph value is never changed after construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TargetGraph {
    targets: OrderedMap<String, Target>,
}

impl TargetGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Target> {
        self.targets.get(name)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Target> {
        self.targets.values()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn with(&self, target: Target) -> Result<TargetGraph, GraphError> {
        if self.targets.contains_key(&target.name) {
            return Err(GraphError::DuplicateTarget(target.name));
        }
        let mut next = self.clone();
        next.targets.insert(target.name.clone(), target);
        Ok(next)
    }

    /// Adds a natively built target. `.msg` sources are recorded separately so
    /// the message compiler can run as an intermediate step.
    pub fn add_opp_target(&self, spec: TargetSpec) -> Result<TargetGraph, GraphError> {
        if self.targets.contains_key(&spec.name) {
            return Err(GraphError::DuplicateTarget(spec.name));
        }
        let kind = spec.kind.unwrap_or(TargetKind::OppModelLibrary);
        if kind == TargetKind::Imported {
            return Err(GraphError::ImportedKind);
        }
        let mut cc_sources = Vec::new();
        let mut msg_sources = Vec::new();
        for src in spec.sources {
            match extension(&src) {
                "cc" => cc_sources.push(src),
                "msg" => msg_sources.push(src),
                ext => {
                    return Err(GraphError::UnsupportedSource {
                        ext: ext.to_string(),
                        path: src,
                    })
                }
            }
        }
        if matches!(kind, TargetKind::Executable | TargetKind::TestExecutable) && cc_sources.is_empty() {
            return Err(GraphError::NoSources(spec.name));
        }
        self.with(Target {
            name: spec.name,
            kind,
            linkage: spec.linkage,
            cc_sources,
            msg_sources,
            include_dirs: spec.include_dirs,
            defines: spec.defines,
            own_ned_folders: spec.ned_folders,
            deps: spec.deps,
            output_artifact: None,
        })
    }

    /// Adds a pre-built project described by an imported Makefile manifest.
    pub fn import_opp_target(&self, manifest: &ProjectManifest) -> Result<TargetGraph, GraphError> {
        let ned = if manifest.ned_folders.is_empty() {
            alloc::vec![manifest.project_root.clone()]
        } else {
            manifest.ned_folders.clone()
        };
        self.with(Target {
            name: manifest.name.clone(),
            kind: TargetKind::Imported,
            linkage: match manifest.kind {
                crate::manifest::ArtifactKind::StaticLibrary => Linkage::Static,
                _ => Linkage::Shared,
            },
            cc_sources: Vec::new(),
            msg_sources: Vec::new(),
            include_dirs: manifest.include_dirs.clone(),
            defines: manifest.defines.clone(),
            own_ned_folders: ned,
            deps: Vec::new(),
            output_artifact: Some(manifest.artifact_path()),
        })
    }

    /// Returns a new graph with an extra dependency edge `from -> to`.
    pub fn with_dependency(&self, from: &str, to: &str) -> Result<TargetGraph, GraphError> {
        if !self.targets.contains_key(to) {
            return Err(GraphError::UnknownTarget(to.to_string()));
        }
        let mut next = self.clone();
        let t = next
            .targets
            .get_mut(from)
            .ok_or_else(|| GraphError::UnknownTarget(from.to_string()))?;
        if !t.deps.iter().any(|d| d == to) {
            t.deps.push(to.to_string());
        }
        Ok(next)
    }

    /// Dependencies-first order. Among targets that are ready at the same
    /// time the earliest inserted one comes first.
    pub fn resolve(&self) -> Result<Vec<String>, GraphError> {
        let n = self.targets.len();
        let mut pending = alloc::vec![0usize; n];
        let mut dependents: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for (i, t) in self.targets.values().enumerate() {
            let mut seen = BTreeSet::new();
            for d in &t.deps {
                let j = self.targets.position(d.as_str()).ok_or_else(|| GraphError::UnknownDependency {
                    target: t.name.clone(),
                    dep: d.clone(),
                })?;
                if seen.insert(j) {
                    pending[i] += 1;
                    dependents[j].push(i);
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &k in &dependents[i] {
                pending[k] -= 1;
                if pending[k] == 0 {
                    ready.insert(k);
                }
            }
        }
        if order.len() < n {
            return Err(GraphError::CycleDetected(self.find_cycle(&pending)));
        }
        Ok(order
            .into_iter()
            .map(|i| self.targets.get_index(i).unwrap().0.clone())
            .collect())
    }

    fn find_cycle(&self, pending: &[usize]) -> Vec<String> {
        let stuck = |i: usize| pending[i] > 0;
        let Some(mut cur) = (0..pending.len()).find(|&i| stuck(i)) else {
            return Vec::new();
        };
        let mut path: Vec<usize> = Vec::new();
        loop {
            if let Some(pos) = path.iter().position(|&p| p == cur) {
                return path[pos..]
                    .iter()
                    .map(|&i| self.targets.get_index(i).unwrap().0.clone())
                    .collect();
            }
            path.push(cur);
            let (_, t) = self.targets.get_index(cur).unwrap();
            // A stuck node always has at least one stuck dependency.
            cur = t
                .deps
                .iter()
                .filter_map(|d| self.targets.position(d.as_str()))
                .find(|&j| stuck(j))
                .unwrap_or(cur);
        }
    }

    /// Transitive dependencies of `name` in depth-first pre-order, each once,
    /// excluding `name` itself.
    pub fn dependency_closure(&self, name: &str) -> Result<Vec<&Target>, GraphError> {
        let mut out = Vec::new();
        let mut visited = BTreeSet::new();
        let root = self
            .targets
            .get(name)
            .ok_or_else(|| GraphError::UnknownTarget(name.to_string()))?;
        visited.insert(name);
        let mut stack: VecDeque<&str> = root.deps.iter().map(String::as_str).collect();
        while let Some(d) = stack.pop_front() {
            if !visited.insert(d) {
                continue;
            }
            let t = self
                .targets
                .get(d)
                .ok_or_else(|| GraphError::UnknownTarget(d.to_string()))?;
            out.push(t);
            for dd in t.deps.iter().rev() {
                stack.push_front(dd);
            }
        }
        Ok(out)
    }

    /// NED folders visible to `name`: its own first, then those of its
    /// dependencies depth-first, keeping the first occurrence of each folder.
    pub fn collect_ned_folders(&self, name: &str) -> Result<Vec<String>, GraphError> {
        let root = self
            .targets
            .get(name)
            .ok_or_else(|| GraphError::UnknownTarget(name.to_string()))?;
        let mut out: Vec<String> = Vec::new();
        let mut push = |folders: &[String]| {
            for f in folders {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
        };
        push(&root.own_ned_folders);
        for t in self.dependency_closure(name)? {
            push(&t.own_ned_folders);
        }
        Ok(out)
    }
}
