//! Editor configuration: debug launch entries, CMake kits and the
//! environment script a kit runs before configuring.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::install::OmnetInstall;
use crate::json::{JsonDoc, JsonObject};
use crate::plan::shell_quote;
use crate::run::{RunError, RunSpec};

pub const LAUNCH_VERSION: &str = "0.2.0";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdeError {
    #[error("lldb configuration requested but the installation ships no formatter script")]
    FlavorUnavailable,
    #[error("existing launch file has no \"configurations\" array")]
    MalformedLaunchFile,
    #[error("existing kits file is not an array")]
    MalformedKitsFile,
    #[error("generated entry `{0}` appears twice")]
    DuplicateName(String),
    #[error(transparent)]
    Run(#[from] RunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DebugFlavor {
    Gdb,
    Lldb,
}

impl DebugFlavor {
    pub fn as_str(self) -> &'static str {
        match self {
            DebugFlavor::Gdb => "gdb",
            DebugFlavor::Lldb => "lldb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gdb" => Some(DebugFlavor::Gdb),
            "lldb" => Some(DebugFlavor::Lldb),
            _ => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            DebugFlavor::Gdb => "GDB",
            DebugFlavor::Lldb => "CodeLLDB",
        }
    }
}

/// What to do when an lldb entry is wanted but no formatter script exists.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FormatterPolicy {
    /// Emit the entry without `initCommands`.
    #[default]
    Warn,
    /// Fail with [`IdeError::FlavorUnavailable`].
    Require,
}

/// Display name of a generated launch entry.
pub fn launch_name(run: &str, flavor: DebugFlavor) -> String {
    alloc::format!("Launch {run} - {} (OMNeT++)", flavor.label())
}

/// A warning for the caller to print, if `flavor` will miss the formatter.
pub fn formatter_warning(flavor: DebugFlavor, install: &OmnetInstall) -> Option<String> {
    (flavor == DebugFlavor::Lldb && install.lldb_formatter.is_none()).then(|| {
        alloc::format!(
            "OMNeT++ {} has no lldb formatter; data structures will not be pretty-printed",
            install.version
        )
    })
}

/// One entry for the `configurations` array.
pub fn generate_launch_config(
    spec: &RunSpec,
    flavor: DebugFlavor,
    install: &OmnetInstall,
    policy: FormatterPolicy,
) -> Result<JsonDoc, IdeError> {
    let args = spec.runner_args()?;
    let program = spec.debug_program(install);
    let mut cfg = JsonObject::new();
    let mut put = |k: &str, v: JsonDoc| {
        cfg.insert(k.to_string(), v);
    };
    put("name", launch_name(&spec.name, flavor).into());
    match flavor {
        DebugFlavor::Lldb => {
            if install.lldb_formatter.is_none() && policy == FormatterPolicy::Require {
                return Err(IdeError::FlavorUnavailable);
            }
            put("type", "lldb".into());
            put("request", "launch".into());
            put("program", program.into());
            put("args", JsonDoc::string_array(&args));
            put("stopOnEntry", false.into());
            put("cwd", spec.working_dir.as_str().into());
            if let Some(f) = &install.lldb_formatter {
                put("initCommands", JsonDoc::string_array([alloc::format!("command script import {f}")]));
            }
        }
        DebugFlavor::Gdb => {
            put("type", "cppdbg".into());
            put("request", "launch".into());
            put("program", program.into());
            put("args", JsonDoc::string_array(&args));
            put("stopAtEntry", false.into());
            put("cwd", spec.working_dir.as_str().into());
            put("environment", JsonDoc::Array(Vec::new()));
            put("externalConsole", false.into());
            put("MIMode", "gdb".into());
            put(
                "setupCommands",
                JsonDoc::Array(alloc::vec![JsonDoc::object([
                    ("description", "Enable pretty-printing for gdb".into()),
                    ("text", "-enable-pretty-printing".into()),
                    ("ignoreFailures", true.into()),
                ])]),
            );
        }
    }
    Ok(JsonDoc::Object(cfg))
}

fn entry_name(v: &JsonDoc) -> Option<&str> {
    v.get("name").and_then(JsonDoc::as_str)
}

/// Name-keyed merge: existing entries with a generated name are replaced
/// where they stand, everything else is kept as is, and the remaining
/// generated entries are appended in order.
pub fn merge_named(existing: &[JsonDoc], generated: &[JsonDoc]) -> Result<Vec<JsonDoc>, IdeError> {
    let mut names: Vec<&str> = Vec::with_capacity(generated.len());
    for g in generated {
        if let Some(n) = entry_name(g) {
            if names.contains(&n) {
                return Err(IdeError::DuplicateName(n.to_string()));
            }
            names.push(n);
        }
    }
    let mut used = alloc::vec![false; generated.len()];
    let mut out = Vec::with_capacity(existing.len() + generated.len());
    for e in existing {
        let hit = entry_name(e).and_then(|n| generated.iter().position(|g| entry_name(g) == Some(n)));
        match hit {
            // A user file may hold the same name twice; only the first copy
            // is replaced, later copies are dropped so the name stays unique.
            Some(i) if used[i] => {}
            Some(i) => {
                used[i] = true;
                out.push(generated[i].clone());
            }
            None => out.push(e.clone()),
        }
    }
    out.extend(generated.iter().zip(&used).filter(|(_, u)| !**u).map(|(g, _)| g.clone()));
    Ok(out)
}

fn is_empty_doc(doc: &JsonDoc) -> bool {
    match doc {
        JsonDoc::Null => true,
        JsonDoc::Object(o) => o.is_empty(),
        _ => false,
    }
}

/// Merges generated configurations into an existing launch document.
pub fn merge_launch(existing: Option<&JsonDoc>, generated: &[JsonDoc]) -> Result<JsonDoc, IdeError> {
    let existing = existing.filter(|d| !is_empty_doc(d));
    let Some(doc) = existing else {
        merge_named(&[], generated)?;
        return Ok(JsonDoc::object([
            ("version", LAUNCH_VERSION.into()),
            ("configurations", JsonDoc::Array(generated.to_vec())),
        ]));
    };
    let JsonDoc::Object(obj) = doc else {
        return Err(IdeError::MalformedLaunchFile);
    };
    let configs = obj
        .get("configurations")
        .and_then(JsonDoc::as_array)
        .ok_or(IdeError::MalformedLaunchFile)?;
    let merged = merge_named(configs, generated)?;
    let mut out = obj.clone();
    if obj.get("version").and_then(JsonDoc::as_str) != Some(LAUNCH_VERSION) {
        if obj.contains_key("version") {
            out.insert("version".to_string(), LAUNCH_VERSION.into());
        } else {
            out.insert_first("version".to_string(), LAUNCH_VERSION.into());
        }
    }
    out.insert("configurations".to_string(), JsonDoc::Array(merged));
    Ok(JsonDoc::Object(out))
}

/// A one-kit array.
pub fn generate_cmake_kits(kit_name: &str, env_script: &str, c_compiler: &str, cxx_compiler: &str) -> JsonDoc {
    JsonDoc::Array(alloc::vec![JsonDoc::object([
        ("name", kit_name.into()),
        ("environmentSetupScript", env_script.into()),
        (
            "compilers",
            JsonDoc::object([("C", c_compiler.into()), ("CXX", cxx_compiler.into())]),
        ),
    ])])
}

/// Kit name such as `CLang OMNeT++ 6.0pre10 with Python VENV`.
pub fn kit_name(compiler_label: &str, install: &OmnetInstall, venv: bool) -> String {
    let mut s = alloc::format!("{compiler_label} OMNeT++ {}", install.version);
    if venv {
        s.push_str(" with Python VENV");
    }
    s
}

/// Clang from the bundled MinGW toolchain of a Windows installation.
pub fn bundled_clang(install: &OmnetInstall) -> (String, String) {
    let bin = crate::path::join(&install.root, "tools/win64/mingw64/bin");
    (
        crate::path::join(&bin, "clang.exe"),
        crate::path::join(&bin, "clang++.exe"),
    )
}

/// Environment script name, e.g. `omnetpp-6.0pre10env.cmd`.
pub fn env_script_name(install: &OmnetInstall, style: ScriptStyle) -> String {
    alloc::format!("omnetpp-{}env.{}", install.version, style.extension())
}

/// Merges generated kits into an existing `cmake-kits.json` array.
pub fn merge_kits(existing: Option<&JsonDoc>, generated: &[JsonDoc]) -> Result<JsonDoc, IdeError> {
    match existing.filter(|d| !is_empty_doc(d)) {
        None => Ok(JsonDoc::Array(merge_named(&[], generated)?)),
        Some(JsonDoc::Array(items)) => Ok(JsonDoc::Array(merge_named(items, generated)?)),
        Some(_) => Err(IdeError::MalformedKitsFile),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptStyle {
    WindowsCmd,
    PosixSh,
}

impl ScriptStyle {
    pub fn extension(self) -> &'static str {
        match self {
            ScriptStyle::WindowsCmd => "cmd",
            ScriptStyle::PosixSh => "sh",
        }
    }
}

fn backslashes(p: &str) -> String {
    p.replace('/', "\\")
}

/// Script prepending the installation's tool directories to `PATH` and
/// optionally activating a Python virtual environment.
pub fn generate_env_script(install: &OmnetInstall, style: ScriptStyle, venv_activate: Option<&str>) -> String {
    let mut lines: Vec<String> = Vec::new();
    match style {
        ScriptStyle::WindowsCmd => {
            for e in &install.tool_path_entries {
                lines.push(alloc::format!("set PATH={};%PATH%", backslashes(e)));
            }
            if let Some(v) = venv_activate {
                lines.push(String::new());
                lines.push("rem Optional: Activate a python virtual environment".into());
                lines.push("set current_dir=\"%~dp0\"".into());
                lines.push(alloc::format!("call {}", backslashes(v)));
            }
        }
        ScriptStyle::PosixSh => {
            for e in &install.tool_path_entries {
                lines.push(alloc::format!("export PATH={}:\"$PATH\"", shell_quote(e)));
            }
            if let Some(v) = venv_activate {
                lines.push(String::new());
                lines.push("# Optional: Activate a python virtual environment".into());
                lines.push(alloc::format!(". {}", shell_quote(v)));
            }
        }
    }
    let eol = match style {
        ScriptStyle::WindowsCmd => "\r\n",
        ScriptStyle::PosixSh => "\n",
    };
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push_str(eol);
    }
    out
}
