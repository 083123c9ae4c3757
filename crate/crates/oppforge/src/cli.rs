//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, ExitCode};

use clap::{Parser, Subcommand, ValueEnum};

use oppforge_core::ide::{
    bundled_clang, env_script_name, formatter_warning, generate_cmake_kits, generate_env_script,
    generate_launch_config, kit_name, merge_kits, merge_launch, DebugFlavor, FormatterPolicy, ScriptStyle,
};
use oppforge_core::json::is_blank_jsonc;
use oppforge_core::run::run_spec_from_graph;
use oppforge_core::{emit_ninja, lower, make_run_targets, parse_jsonc, BuildMode, JsonDoc, OmnetInstall, RunVariant};

use crate::discover::{discover, ROOT_ENV};
use crate::fsio::{find_on_path, path_string, split_search_path, write_if_changed};
use crate::project::{import_manifest, parse_script_style, Project, DEFAULT_PROJECT_FILE};

pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "oppforge", version, about = "Build, run and debug OMNeT++ projects with Ninja")]
pub struct Cli {
    /// Project file.
    #[arg(long, global = true, default_value = DEFAULT_PROJECT_FILE)]
    project: PathBuf,
    /// Build mode; overrides the project file.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// OMNeT++ installation root; overrides $OMNETPP_ROOT and the project file.
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Release,
    Debug,
}

impl From<ModeArg> for BuildMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Release => BuildMode::Release,
            ModeArg::Debug => BuildMode::Debug,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Run,
    Debug,
    Memcheck,
}

impl From<VariantArg> for RunVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Run => RunVariant::Run,
            VariantArg::Debug => RunVariant::Debug,
            VariantArg::Memcheck => RunVariant::Memcheck,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the located installation as JSON.
    Discover,
    /// Print the manifest of an opp_makemake Makefile as JSON.
    Import {
        makefile: PathBuf,
        /// Defaults to the Makefile's directory.
        #[arg(long)]
        project_root: Option<PathBuf>,
    },
    /// Print the build plan as JSON.
    Plan,
    /// Write build.ninja into the build directory.
    Emit {
        /// Dry-run the result with ninja, if installed.
        #[arg(long, conflicts_with = "dry_run")]
        check: bool,
        /// Print to stdout instead of writing.
        #[arg(long)]
        dry_run: bool,
    },
    /// Run a simulation declared in the project file.
    Run {
        name: String,
        #[arg(value_enum, default_value = "run")]
        variant: VariantArg,
        /// Print the command line, one argument per line, without running it.
        #[arg(long)]
        dry_run: bool,
    },
    /// Update launch.json, cmake-kits.json and the environment script.
    GenIde {
        /// Print what would change without writing.
        #[arg(long)]
        diff: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Domain(String),
    Io(String),
    Child(u8),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn write_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("cannot write {}: {e}", path_string(path)))
}

struct Ctx {
    cli: Cli,
    root_env: Option<OsString>,
    search_path: Vec<PathBuf>,
}

impl Ctx {
    fn project(&self) -> Result<Project, Failure> {
        Ok(Project::load(&self.cli.project)?)
    }

    fn mode(&self, project: Option<&Project>) -> BuildMode {
        let cli = self.cli.mode.map(BuildMode::from);
        match project {
            Some(p) => p.mode(cli),
            None => cli.unwrap_or_default(),
        }
    }

    /// `--root`, then the environment, then the project file, then `PATH`.
    fn install(&self, project: Option<&Project>) -> Result<OmnetInstall, Failure> {
        let root = self
            .cli
            .root
            .clone()
            .or_else(|| self.root_env.clone().filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| project.and_then(Project::omnetpp_root).map(PathBuf::from));
        Ok(discover(root.as_deref(), &self.search_path)?)
    }
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        cli,
        root_env: std::env::var_os(ROOT_ENV),
        search_path: split_search_path(std::env::var_os("PATH").as_deref()),
    };
    let result = dispatch(&ctx);
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Child(code)) => ExitCode::from(code),
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn dispatch(ctx: &Ctx) -> Result<(), Failure> {
    match &ctx.cli.command {
        Command::Discover => {
            let project = ctx.cli.project.is_file().then(|| ctx.project()).transpose()?;
            print!("{}", ctx.install(project.as_ref())?.to_json().to_pretty(4));
            Ok(())
        }
        Command::Import { makefile, project_root } => {
            let root = project_root.as_deref().map(path_string);
            let m = import_manifest(makefile, root.as_deref(), ctx.mode(None))?;
            print!("{}", m.to_json().to_pretty(4));
            Ok(())
        }
        Command::Plan => {
            let project = ctx.project()?;
            let mode = ctx.mode(Some(&project));
            let install = ctx.install(Some(&project))?;
            let plan = lower(&project.graph(mode)?, &install, &project.plan_config(mode))?;
            print!("{}", plan.to_json().to_pretty(4));
            Ok(())
        }
        Command::Emit { check, dry_run } => emit(ctx, *check, *dry_run),
        Command::Run { name, variant, dry_run } => run(ctx, name, (*variant).into(), *dry_run),
        Command::GenIde { diff } => gen_ide(ctx, *diff),
    }
}

fn emit(ctx: &Ctx, check: bool, dry_run: bool) -> Result<(), Failure> {
    let project = ctx.project()?;
    let mode = ctx.mode(Some(&project));
    let install = ctx.install(Some(&project))?;
    let config = project.plan_config(mode);
    let text = emit_ninja(&lower(&project.graph(mode)?, &install, &config)?);
    if dry_run {
        print!("{text}");
        return Ok(());
    }
    let out = Path::new(&config.build_dir).join("build.ninja");
    let changed = write_if_changed(&out, text.as_bytes()).map_err(|e| write_failed(&out, e))?;
    eprintln!("{} {}", if changed { "wrote" } else { "unchanged" }, path_string(&out));
    if check {
        let Some(ninja) = find_on_path("ninja", &ctx.search_path) else {
            eprintln!("ninja not found; skipping check");
            return Ok(());
        };
        let status = Process::new(ninja)
            .arg("-n")
            .arg("-f")
            .arg(&out)
            .current_dir(&config.build_dir)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| Failure::Domain(format!("cannot start ninja: {e}")))?;
        if !status.success() {
            return Err(Failure::Domain(format!("ninja -n rejected {}", path_string(&out))));
        }
        eprintln!("ninja -n: ok");
    }
    Ok(())
}

fn run(ctx: &Ctx, name: &str, variant: RunVariant, dry_run: bool) -> Result<(), Failure> {
    let project = ctx.project()?;
    let mode = ctx.mode(Some(&project));
    let install = ctx.install(Some(&project))?;
    let req = project
        .run_request(name)
        .ok_or_else(|| Failure::Domain(format!("unknown run `{name}`")))?;
    let spec = run_spec_from_graph(&project.graph(mode)?, &req, &project.plan_config(mode))?;
    let valgrind = find_on_path("valgrind", &ctx.search_path).is_some();
    let targets = make_run_targets(&spec, &install, mode, valgrind)?;
    let target = targets.get(&variant.target_name(name)).ok_or_else(|| {
        Failure::Domain(match variant {
            RunVariant::Debug => format!("variant `debug` of `{name}` needs --mode debug"),
            RunVariant::Memcheck => format!("variant `memcheck` of `{name}` needs valgrind on PATH"),
            RunVariant::Run => format!("variant `run` of `{name}` unavailable"),
        })
    })?;
    if dry_run {
        for a in &target.argv {
            println!("{a}");
        }
        return Ok(());
    }
    let status = Process::new(&target.argv[0])
        .args(&target.argv[1..])
        .current_dir(&target.working_dir)
        .status()
        .map_err(|e| Failure::Domain(format!("cannot start {}: {e}", target.argv[0])))?;
    match status.code() {
        Some(0) => Ok(()),
        Some(c) => Err(Failure::Child(c.clamp(1, 255) as u8)),
        None => Err(Failure::Child(signal_code(&status))),
    }
}

#[cfg(unix)]
fn signal_code(status: &std::process::ExitStatus) -> u8 {
    use std::os::unix::process::ExitStatusExt;
    status.signal().map_or(1, |s| (128 + s).clamp(1, 255) as u8)
}

#[cfg(not(unix))]
fn signal_code(_: &std::process::ExitStatus) -> u8 {
    1
}

fn read_existing(path: &Path) -> Result<Option<JsonDoc>, Failure> {
    match std::fs::read(path) {
        Ok(bytes) => {
            let text = String::from_utf8_lossy(&bytes);
            if is_blank_jsonc(&text) {
                return Ok(None);
            }
            parse_jsonc(&text)
                .map(Some)
                .map_err(|e| Failure::Domain(format!("{}: {e}", path_string(path))))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Failure::Domain(format!("cannot read {}: {e}", path_string(path)))),
    }
}

fn gen_ide(ctx: &Ctx, diff: bool) -> Result<(), Failure> {
    let project = ctx.project()?;
    let ide = project
        .file
        .ide
        .clone()
        .ok_or_else(|| Failure::Domain("project file has no `ide` section".into()))?;
    let mode = ctx.mode(Some(&project));
    let install = ctx.install(Some(&project))?;
    let graph = project.graph(mode)?;
    let config = project.plan_config(mode);
    let vscode = Path::new(&project.root).join(".vscode");

    let policy = if ide.require_formatter {
        FormatterPolicy::Require
    } else {
        FormatterPolicy::Warn
    };
    let flavors: Vec<DebugFlavor> = ide.flavors.iter().filter_map(|f| DebugFlavor::parse(f)).collect();
    for f in &flavors {
        if let Some(w) = formatter_warning(*f, &install) {
            if policy == FormatterPolicy::Warn {
                eprintln!("warning: {w}");
            }
        }
    }
    let mut generated = Vec::new();
    for r in &project.file.runs {
        let req = project.run_request(&r.name).expect("declared run");
        let spec = run_spec_from_graph(&graph, &req, &config)?;
        for f in &flavors {
            generated.push(generate_launch_config(&spec, *f, &install, policy)?);
        }
    }
    let launch_path = vscode.join("launch.json");
    let launch = merge_launch(read_existing(&launch_path)?.as_ref(), &generated)?;

    let style = match &ide.env_script {
        Some(s) => parse_script_style(s)?,
        None if cfg!(windows) => ScriptStyle::WindowsCmd,
        None => ScriptStyle::PosixSh,
    };
    let venv = ide.venv.as_deref().map(|v| project.abs(v));
    let script_name = env_script_name(&install, style);
    let script = generate_env_script(&install, style, venv.as_deref());
    let (c, cxx) = match style {
        ScriptStyle::WindowsCmd => bundled_clang(&install),
        ScriptStyle::PosixSh => (
            install.config_or("CC", "clang").to_string(),
            install.config_or("CXX", "clang++").to_string(),
        ),
    };
    let name = ide
        .kit_name
        .clone()
        .unwrap_or_else(|| kit_name(ide.compiler_label.as_deref().unwrap_or("CLang"), &install, venv.is_some()));
    let kits = generate_cmake_kits(
        &name,
        &format!("${{workspaceFolder}}/.vscode/{script_name}"),
        ide.c_compiler.as_deref().unwrap_or(&c),
        ide.cxx_compiler.as_deref().unwrap_or(&cxx),
    );
    let kits_path = vscode.join("cmake-kits.json");
    let kits = merge_kits(read_existing(&kits_path)?.as_ref(), kits.as_array().expect("kit array"))?;

    let outputs = [
        (launch_path, launch.to_pretty(4)),
        (kits_path, kits.to_pretty(2)),
        (vscode.join(&script_name), script),
    ];
    for (path, text) in &outputs {
        let old = std::fs::read(path).map(|b| String::from_utf8_lossy(&b).into_owned()).ok();
        if diff {
            if old.as_deref() != Some(text.as_str()) {
                let shown = path_string(path);
                let d = similar::TextDiff::from_lines(old.as_deref().unwrap_or(""), text.as_str());
                print!("{}", d.unified_diff().header(&shown, &shown));
            }
            continue;
        }
        let changed = write_if_changed(path, text.as_bytes()).map_err(|e| write_failed(path, e))?;
        eprintln!("{} {}", if changed { "wrote" } else { "unchanged" }, path_string(path));
    }
    Ok(())
}
