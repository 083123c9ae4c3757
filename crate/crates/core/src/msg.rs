//! Planning of message-compiler invocations for `.msg` sources.
//!
//! The compiler itself is an external tool; this module only derives file
//! names, argument vectors and import edges.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::TargetGraph;
use crate::install::OmnetInstall;
use crate::path;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MsgError {
    #[error("`{0}` is not a .msg file")]
    NotAMsgFile(String),
}

/// One message-compiler invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenStep {
    pub input: String,
    /// Generated `(source, header)`.
    pub outputs: (String, String),
    pub command: Vec<String>,
    pub import_dirs: Vec<String>,
    /// Directory the compiler runs in; the generated files land here.
    pub working_dir: String,
}

/// Plans the compiler run for `msg`. Outputs mirror the source-relative
/// location of `msg` below `build_dir` and never leave it.
pub fn plan_msg(
    install: &OmnetInstall,
    msg: &str,
    import_dirs: &[String],
    build_dir: &str,
) -> Result<GenStep, MsgError> {
    let stem = msg
        .strip_suffix(".msg")
        .filter(|s| !s.ends_with(['/', '\\']) && path::file_name(s).is_some())
        .ok_or_else(|| MsgError::NotAMsgFile(msg.to_string()))?;
    let mirrored = path::join(build_dir, &path::confine(stem));
    let outputs = (alloc::format!("{mirrored}_m.cc"), alloc::format!("{mirrored}_m.h"));
    let working_dir = path::parent(&mirrored).unwrap_or_else(|| build_dir.to_string());

    let mut command = Vec::with_capacity(2 + 2 * import_dirs.len());
    command.push(install.msgc_path.clone());
    for dir in import_dirs {
        command.push("-I".to_string());
        command.push(dir.clone());
    }
    command.push(msg.to_string());

    Ok(GenStep {
        input: msg.to_string(),
        outputs,
        command,
        import_dirs: import_dirs.to_vec(),
        working_dir,
    })
}

/// Dotted names from `import a.b.C;` lines, outside comments, each once in
/// first-seen order.
pub fn scan_msg_imports(text: &str) -> Vec<String> {
    let code = strip_comments(text);
    let mut out: Vec<String> = Vec::new();
    for line in code.lines() {
        let Some(rest) = line.trim_start().strip_prefix("import") else {
            continue;
        };
        if !rest.starts_with([' ', '\t']) {
            continue;
        }
        let Some(body) = rest.trim().strip_suffix(';') else {
            continue;
        };
        let name = body.trim();
        if is_dotted_name(name) && !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
    }
    out
}

fn is_dotted_name(s: &str) -> bool {
    !s.is_empty()
        && s.split('.').all(|part| {
            let mut chars = part.chars();
            matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}

/// Blanks out `//` and `/* */` comments, keeping newlines so line structure
/// survives. Double-quoted strings are copied through untouched.
fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                out.push(c);
                while let Some(s) = chars.next() {
                    out.push(s);
                    match s {
                        '\\' => {
                            if let Some(n) = chars.next() {
                                out.push(n);
                            }
                        }
                        '"' | '\n' => break,
                        _ => {}
                    }
                }
            }
            '/' if chars.peek() == Some(&'/') => {
                for s in chars.by_ref() {
                    if s == '\n' {
                        out.push('\n');
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = '\0';
                for s in chars.by_ref() {
                    if s == '\n' {
                        out.push('\n');
                    }
                    if prev == '*' && s == '/' {
                        break;
                    }
                    prev = s;
                }
                out.push(' ');
            }
            _ => out.push(c),
        }
    }
    out
}

/// Relative `.msg` path an import name refers to, e.g. `a.b.C` -> `a/b/C.msg`.
pub fn import_path(name: &str) -> String {
    alloc::format!("{}.msg", name.replace('.', "/"))
}

/// The target (other than `from`) whose `.msg` sources provide `import`.
pub fn import_provider<'g>(graph: &'g TargetGraph, from: &str, import: &str) -> Option<&'g str> {
    let rel = import_path(import);
    let suffix = alloc::format!("/{rel}");
    graph
        .targets()
        .filter(|t| t.name != from)
        .find(|t| {
            t.msg_sources.iter().any(|m| {
                let m = path::normalize(m);
                m == rel || m.ends_with(&suffix)
            })
        })
        .map(|t| t.name.as_str())
}
