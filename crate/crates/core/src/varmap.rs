//! Make-variable extraction for `Makefile.inc` and `opp_makemake` output.
//!
//! Only the assignment subset of make is understood: `=`, `:=`, `::=`, `?=`
//! and `+=`, backslash continuations, `#` comments and `$(NAME)` references.
//! Conditionals are not evaluated; every branch is read in file order, so the
//! last textual assignment wins. Rule recipes, `define` blocks and other
//! directives are skipped.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ordmap::OrderedMap;

/// Placeholder `opp_makemake` uses for the debug suffix of artifact names.
pub const MODE_PLACEHOLDER: &str = "D";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MakeError {
    #[error("variable `{0}` references itself (directly or transitively)")]
    CycleDetected(String),
}

/// Ordered map from variable name to fully expanded value. Surrounding
/// whitespace of each value is dropped.
///
/// Lookups of names that were never assigned return `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarMap {
    vars: OrderedMap<String, String>,
}

impl VarMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.vars.get(name).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.vars.insert(name.into(), value.into());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Serializes as one `NAME = value` line per variable. Parsing the result
    /// again yields an equal map.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.iter() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v.replace('#', "\\#"));
            if v.ends_with('\\') {
                // Keeps the final backslash from reading as a continuation.
                out.push_str(" #");
            }
            out.push('\n');
        }
        out
    }
}

/// Parses the text of an installation's `Makefile.inc`.
pub fn parse_makefile_inc(text: &str) -> Result<VarMap, MakeError> {
    parse(text, &[])
}

/// Parses an `opp_makemake`-generated Makefile. `$(D)` is left symbolic so
/// the manifest builder can resolve it per build mode.
pub fn parse_opp_makefile(text: &str) -> Result<VarMap, MakeError> {
    parse(text, &[MODE_PLACEHOLDER])
}

/// Byte-level entry point; invalid UTF-8 is replaced, never rejected.
pub fn parse_opp_makefile_bytes(bytes: &[u8]) -> Result<VarMap, MakeError> {
    parse_opp_makefile(&String::from_utf8_lossy(bytes))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flavor {
    Recursive,
    Simple,
}

struct Raw {
    order: Vec<String>,
    values: BTreeMap<String, (String, Flavor)>,
}

impl Raw {
    fn set(&mut self, name: &str, value: String, flavor: Flavor) {
        if !self.values.contains_key(name) {
            self.order.push(name.to_string());
        }
        self.values.insert(name.to_string(), (value, flavor));
    }
}

fn parse(text: &str, symbolic: &[&str]) -> Result<VarMap, MakeError> {
    let mut raw = Raw {
        order: Vec::new(),
        values: BTreeMap::new(),
    };
    let mut in_rule = false;
    let mut in_define = false;

    for line in logical_lines(text) {
        if in_define {
            if first_word(line.trim_start()) == "endef" {
                in_define = false;
            }
            continue;
        }
        if line.starts_with('\t') && in_rule {
            continue;
        }
        let stripped = strip_comment(&line);
        let content = stripped.trim();
        if content.is_empty() {
            continue;
        }
        in_rule = false;

        let mut stmt = content;
        match first_word(stmt) {
            "define" => {
                in_define = true;
                continue;
            }
            "ifeq" | "ifneq" | "ifdef" | "ifndef" | "else" | "endif" | "include" | "-include"
            | "sinclude" | "vpath" | "unexport" | "undefine" => continue,
            kw @ ("export" | "override" | "private") => {
                stmt = stmt[kw.len()..].trim_start();
            }
            _ => {}
        }

        match split_assignment(stmt) {
            Some((name, op, value)) => {
                let value = value.trim().to_string();
                match op {
                    "=" => raw.set(name, value, Flavor::Recursive),
                    ":=" | "::=" => {
                        let v = expand_text(&value, &raw, &mut BTreeMap::new(), &mut Vec::new(), symbolic)?;
                        raw.set(name, v, Flavor::Simple);
                    }
                    "?=" => {
                        if !raw.values.contains_key(name) {
                            raw.set(name, value, Flavor::Recursive);
                        }
                    }
                    "+=" => match raw.values.get(name).cloned() {
                        None => raw.set(name, value, Flavor::Recursive),
                        Some((old, flavor)) => {
                            let add = if flavor == Flavor::Simple {
                                expand_text(&value, &raw, &mut BTreeMap::new(), &mut Vec::new(), symbolic)?
                            } else {
                                value
                            };
                            let joined = match (old.is_empty(), add.is_empty()) {
                                (true, _) => add,
                                (false, true) => old,
                                (false, false) => alloc::format!("{} {}", old, add),
                            };
                            raw.set(name, joined, flavor);
                        }
                    },
                    // `!=` runs a shell command; keep the command text.
                    _ => raw.set(name, value, Flavor::Simple),
                }
            }
            None => {
                if stmt.contains(':') {
                    in_rule = true;
                }
            }
        }
    }

    let mut cache = BTreeMap::new();
    let mut vars = VarMap::new();
    for name in &raw.order {
        let value = expand_var(name, &raw, &mut cache, &mut Vec::new(), symbolic)?;
        vars.insert(name.clone(), value.trim().to_string());
    }
    Ok(vars)
}

/// Joins backslash continuations. Each logical line keeps its leading
/// whitespace so recipe lines can be recognized.
fn logical_lines(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Option<String> = None;
    for physical in text.split('\n') {
        let physical = physical.strip_suffix('\r').unwrap_or(physical);
        let trailing = physical.bytes().rev().take_while(|&b| b == b'\\').count();
        let continued = trailing % 2 == 1;
        let body = if continued {
            &physical[..physical.len() - 1]
        } else {
            physical
        };
        let piece = match current.take() {
            None => body.trim_end_matches([' ', '\t']).to_string(),
            Some(mut acc) => {
                let next = body.trim_matches([' ', '\t']);
                if !next.is_empty() {
                    if !acc.is_empty() && !acc.ends_with(' ') {
                        acc.push(' ');
                    }
                    acc.push_str(next);
                }
                acc
            }
        };
        if continued {
            let mut piece = piece;
            piece.truncate(piece.trim_end_matches([' ', '\t']).len());
            current = Some(piece);
        } else {
            out.push(piece);
        }
    }
    if let Some(rest) = current {
        out.push(rest);
    }
    out
}

/// Removes a trailing `#` comment; `\#` is a literal hash.
fn strip_comment(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'#') => {
                out.push('#');
                chars.next();
            }
            '#' => break,
            _ => out.push(c),
        }
    }
    out
}

fn first_word(s: &str) -> &str {
    s.split(|c: char| c.is_whitespace() || c == '(').next().unwrap_or("")
}

fn is_var_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

/// Splits `NAME op value`. Returns `None` for anything that is not a plain
/// variable assignment (rules, target-specific variables, function calls).
fn split_assignment(stmt: &str) -> Option<(&str, &'static str, &str)> {
    let bytes = stmt.as_bytes();
    let mut depth = 0usize;
    let mut eq = None;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'$' if i + 1 < bytes.len() && (bytes[i + 1] == b'(' || bytes[i + 1] == b'{') => {
                depth += 1;
                i += 1;
            }
            b')' | b'}' if depth > 0 => depth -= 1,
            b'=' if depth == 0 => {
                eq = Some(i);
                break;
            }
            _ => {}
        }
        i += 1;
    }
    let eq = eq?;
    let lhs = &stmt[..eq];
    let value = &stmt[eq + 1..];
    let (name, op) = if let Some(n) = lhs.strip_suffix("::") {
        (n, "::=")
    } else if let Some(n) = lhs.strip_suffix(':') {
        (n, ":=")
    } else if let Some(n) = lhs.strip_suffix('+') {
        (n, "+=")
    } else if let Some(n) = lhs.strip_suffix('?') {
        (n, "?=")
    } else if let Some(n) = lhs.strip_suffix('!') {
        (n, "!=")
    } else {
        (lhs, "=")
    };
    let name = name.trim();
    if is_var_name(name) {
        Some((name, op, value))
    } else {
        None
    }
}

fn expand_var(
    name: &str,
    raw: &Raw,
    cache: &mut BTreeMap<String, String>,
    stack: &mut Vec<String>,
    symbolic: &[&str],
) -> Result<String, MakeError> {
    if let Some(v) = cache.get(name) {
        return Ok(v.clone());
    }
    if stack.iter().any(|s| s == name) {
        return Err(MakeError::CycleDetected(name.to_string()));
    }
    let Some((value, _)) = raw.values.get(name) else {
        return Ok(alloc::format!("$({})", name));
    };
    stack.push(name.to_string());
    let expanded = expand_text(value, raw, cache, stack, symbolic)?;
    stack.pop();
    cache.insert(name.to_string(), expanded.clone());
    Ok(expanded)
}

fn expand_text(
    text: &str,
    raw: &Raw,
    cache: &mut BTreeMap<String, String>,
    stack: &mut Vec<String>,
    symbolic: &[&str],
) -> Result<String, MakeError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('$') {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 1..];
        if let Some(tail) = after.strip_prefix('$') {
            out.push_str("$$");
            rest = tail;
            continue;
        }
        if !after.starts_with('(') {
            out.push('$');
            rest = after;
            continue;
        }
        let Some(close) = matching_paren(after) else {
            out.push_str(&rest[pos..]);
            return Ok(out);
        };
        let inner = &after[1..close];
        if is_var_name(inner) {
            if symbolic.contains(&inner) || !raw.values.contains_key(inner) {
                out.push_str("$(");
                out.push_str(inner);
                out.push(')');
            } else {
                out.push_str(&expand_var(inner, raw, cache, stack, symbolic)?);
            }
        } else {
            // Function call or substitution reference: keep the call, expand
            // the references inside it.
            out.push_str("$(");
            out.push_str(&expand_text(inner, raw, cache, stack, symbolic)?);
            out.push(')');
        }
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Index of the `)` matching the `(` at `s[0]`.
fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, b) in s.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}
