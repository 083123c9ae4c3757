//! Everything related to writing the `build.ninja` file format.

use alloc::string::String;

use crate::plan::{BuildPlan, Rule};

const RULES: &str = "\
rule compile
  command = $cxx $flags $defines $includes -MMD -MF $out.d -c $in -o $out
  description = CXX $out
  depfile = $out.d
  deps = gcc

rule msgc
  command = cd $cwd && $msgc $includes $in
  description = MSGC $in

rule archive
  command = rm -f $out && $ar rcs $out $in
  description = AR $out

rule link_shared
  command = $cxx -shared $flags -o $out $in $libs
  description = LINK $out

rule link_exe
  command = $cxx $flags -o $out $in $libs
  description = LINK $out
";

/// Escapes a path for use in a `build` or `default` line.
pub fn escape_path(p: &str) -> String {
    let mut out = String::with_capacity(p.len());
    for c in p.chars() {
        match c {
            '$' => out.push_str("$$"),
            ' ' => out.push_str("$ "),
            ':' => out.push_str("$:"),
            c => out.push(c),
        }
    }
    out
}

/// Escapes the right-hand side of a variable binding.
pub fn escape_value(v: &str) -> String {
    v.replace('$', "$$")
}

fn push_paths(out: &mut String, paths: &[String]) {
    for p in paths {
        out.push(' ');
        out.push_str(&escape_path(p));
    }
}

/// Renders `plan` as Ninja syntax: global bindings, rule declarations, build
/// statements in plan order, then the `default` line. LF endings, trailing
/// newline, no timestamps: equal plans give identical bytes.
pub fn emit_ninja(plan: &BuildPlan) -> String {
    let mut out = String::new();
    if !plan.globals.is_empty() {
        for (k, v) in plan.globals.iter() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&escape_value(v));
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(RULES);

    for step in &plan.steps {
        out.push_str("\nbuild");
        push_paths(&mut out, &step.outputs);
        out.push_str(": ");
        out.push_str(step.rule.as_str());
        push_paths(&mut out, &step.inputs);
        if !step.implicit_inputs.is_empty() {
            out.push_str(" |");
            push_paths(&mut out, &step.implicit_inputs);
        }
        out.push('\n');
        if step.rule != Rule::Phony {
            for (k, v) in step.variables.iter() {
                out.push_str("  ");
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(&escape_value(v));
                out.push('\n');
            }
        }
    }

    if !plan.defaults.is_empty() {
        out.push_str("\ndefault");
        push_paths(&mut out, &plan.defaults);
        out.push('\n');
    }
    out
}
