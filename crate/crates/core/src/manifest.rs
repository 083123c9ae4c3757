//! Typed import metadata extracted from an `opp_makemake` Makefile.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::json::JsonDoc;
use crate::path;
use crate::varmap::{VarMap, MODE_PLACEHOLDER};
use crate::BuildMode;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("required variable `{0}` is not defined")]
    MissingVariable(String),
    #[error("cannot determine target kind: {0}")]
    UnknownKind(String),
    #[error("invalid target name `{0}`")]
    InvalidTargetName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArtifactKind {
    SharedLibrary,
    StaticLibrary,
    Executable,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::SharedLibrary => "shared_library",
            ArtifactKind::StaticLibrary => "static_library",
            ArtifactKind::Executable => "executable",
        }
    }

    fn file_name(self, name: &str, lib_prefix: bool) -> String {
        let prefix = if lib_prefix && self != ArtifactKind::Executable {
            "lib"
        } else {
            ""
        };
        let suffix = match self {
            ArtifactKind::SharedLibrary => ".so",
            ArtifactKind::StaticLibrary => ".a",
            ArtifactKind::Executable => "",
        };
        alloc::format!("{prefix}{name}{suffix}")
    }
}

/// Suffix variables `opp_makemake` appends to `TARGET`, one per artifact kind.
const KIND_MARKERS: [(&str, ArtifactKind); 3] = [
    ("$(SHARED_LIB_SUFFIX)", ArtifactKind::SharedLibrary),
    ("$(A_LIB_SUFFIX)", ArtifactKind::StaticLibrary),
    ("$(EXE_SUFFIX)", ArtifactKind::Executable),
];

const LIB_PREFIX_MARKER: &str = "$(LIB_PREFIX)";
const LIBPATH_MARKER: &str = "$(LDFLAG_LIBPATH)";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectManifest {
    pub name: String,
    pub kind: ArtifactKind,
    /// Relative to `project_root` unless `TARGET_DIR` was absolute.
    pub output_artifact: String,
    pub include_dirs: Vec<String>,
    pub ned_folders: Vec<String>,
    pub link_libs: Vec<String>,
    pub defines: Vec<String>,
    pub project_root: String,
}

impl ProjectManifest {
    /// Absolute location of the built artifact.
    pub fn artifact_path(&self) -> String {
        path::join(&self.project_root, &self.output_artifact)
    }

    pub fn to_json(&self) -> JsonDoc {
        JsonDoc::object([
            ("name", self.name.as_str().into()),
            ("kind", self.kind.as_str().into()),
            ("output_artifact", self.output_artifact.as_str().into()),
            ("include_dirs", JsonDoc::string_array(&self.include_dirs)),
            ("ned_folders", JsonDoc::string_array(&self.ned_folders)),
            ("link_libs", JsonDoc::string_array(&self.link_libs)),
            ("defines", JsonDoc::string_array(&self.defines)),
            ("project_root", self.project_root.as_str().into()),
        ])
    }
}

fn push_unique(list: &mut Vec<String>, item: String) {
    if !list.contains(&item) {
        list.push(item);
    }
}

/// Lines of a `.nedfolders` file resolved against `project_root`. Blank
/// lines and `#` comments are skipped; duplicates are dropped.
pub fn parse_nedfolders(text: &str, project_root: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        push_unique(&mut out, path::join(project_root, line));
    }
    out
}

fn detect_kind(vars: &VarMap, target: &str) -> Result<ArtifactKind, ManifestError> {
    if vars.get("SUBDIRS").is_some_and(|s| !s.trim().is_empty()) {
        return Err(ManifestError::UnknownKind(
            "recursive per-directory Makefiles (SUBDIRS) are not supported".to_string(),
        ));
    }
    let found: Vec<ArtifactKind> = KIND_MARKERS
        .iter()
        .filter(|(marker, _)| target.contains(marker))
        .map(|&(_, kind)| kind)
        .collect();
    match found.as_slice() {
        [kind] => Ok(*kind),
        [] => Err(ManifestError::UnknownKind(alloc::format!(
            "TARGET `{target}` carries no artifact suffix marker"
        ))),
        _ => Err(ManifestError::UnknownKind(alloc::format!(
            "TARGET `{target}` carries contradictory artifact suffix markers"
        ))),
    }
}

fn resolve_mode(s: &str, mode: BuildMode) -> String {
    s.replace(&alloc::format!("$({MODE_PLACEHOLDER})"), mode.suffix())
}

/// Whitespace-separated words of a variable, keeping `$(fn a b)` calls in
/// one piece.
fn tokens(vars: &VarMap, name: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    let mut prev = '\0';
    for c in vars.get(name).unwrap_or("").chars() {
        match c {
            '(' if prev == '$' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(core::mem::take(&mut cur));
                }
                prev = c;
                continue;
            }
            _ => {}
        }
        cur.push(c);
        prev = c;
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Values of `flag`-prefixed tokens (`-Ix` or `-I x`).
fn flag_values(toks: &[String], flag: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = toks.iter();
    while let Some(t) = it.next() {
        if t == flag {
            if let Some(v) = it.next() {
                out.push(v.clone());
            }
        } else if let Some(v) = t.strip_prefix(flag) {
            out.push(v.to_string());
        }
    }
    out
}

/// Builds the import manifest for one project from its Makefile variables.
///
/// `ned_folders` is the result of reading the project's `.nedfolders`; an
/// empty list falls back to the project root.
pub fn manifest_from_vars(
    vars: &VarMap,
    project_root: &str,
    mode: BuildMode,
    ned_folders: &[String],
) -> Result<ProjectManifest, ManifestError> {
    let project_root = path::normalize(project_root);
    let target = vars
        .get("TARGET")
        .ok_or_else(|| ManifestError::MissingVariable("TARGET".to_string()))?;
    let kind = detect_kind(vars, target)?;

    let mut stem = target.to_string();
    for (marker, _) in KIND_MARKERS {
        stem = stem.replace(marker, "");
    }
    let lib_prefix = stem.contains(LIB_PREFIX_MARKER);
    let name = resolve_mode(&stem.replace(LIB_PREFIX_MARKER, ""), mode);
    if name.is_empty() || name.contains(['/', '\\']) || name.contains("$(") {
        return Err(ManifestError::InvalidTargetName(name));
    }

    let target_dir = vars.get("TARGET_DIR").map(str::trim).filter(|d| !d.is_empty()).unwrap_or(".");
    let output_artifact = path::join(target_dir, &kind.file_name(&name, lib_prefix));

    let mut include_dirs = Vec::new();
    for dir in flag_values(&tokens(vars, "INCLUDE_PATH"), "-I") {
        if !dir.contains("$(") {
            push_unique(&mut include_dirs, path::join(&project_root, &dir));
        }
    }

    let mut defines = Vec::new();
    for var in ["DEFINES", "COPTS"] {
        for d in flag_values(&tokens(vars, var), "-D") {
            if !d.is_empty() && !d.contains("$(") {
                push_unique(&mut defines, d);
            }
        }
    }

    let mut link_libs = Vec::new();
    let lib_tokens: Vec<String> = tokens(vars, "LIBS")
        .iter()
        .map(|t| match t.strip_prefix(LIBPATH_MARKER) {
            Some(rest) => alloc::format!("-L{rest}"),
            None => t.clone(),
        })
        .collect();
    let mut it = lib_tokens.iter();
    while let Some(t) = it.next() {
        let t = resolve_mode(t, mode);
        let entry = if t == "-L" {
            it.next().map(|d| path::join(&project_root, &resolve_mode(d, mode)))
        } else if let Some(dir) = t.strip_prefix("-L") {
            Some(path::join(&project_root, dir))
        } else if let Some(lib) = t.strip_prefix("-l") {
            Some(lib.to_string())
        } else if t.starts_with('-') || t.contains("$(") {
            None
        } else {
            Some(path::join(&project_root, &t))
        };
        if let Some(e) = entry.filter(|e| !e.is_empty() && !e.contains("$(")) {
            push_unique(&mut link_libs, e);
        }
    }

    let mut neds = Vec::new();
    for n in ned_folders {
        push_unique(&mut neds, path::join(&project_root, n));
    }
    if neds.is_empty() {
        neds.push(project_root.clone());
    }

    Ok(ProjectManifest {
        name,
        kind,
        output_artifact,
        include_dirs,
        ned_folders: neds,
        link_libs,
        defines,
        project_root,
    })
}
