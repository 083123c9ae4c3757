//! Fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn slash(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

#[derive(Clone, Copy)]
pub struct Layout {
    pub formatter: bool,
    pub windows_tools: bool,
    pub version_file: bool,
    pub debug_runner: bool,
    pub msgc: bool,
}

impl Default for Layout {
    fn default() -> Self {
        Layout { formatter: true, windows_tools: false, version_file: true, debug_runner: true, msgc: true }
    }
}

fn executable(p: &Path, body: &str) {
    fs::create_dir_all(p.parent().unwrap()).unwrap();
    fs::write(p, body).unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(p, fs::Permissions::from_mode(0o755)).unwrap();
    }
}

/// Runner stub: prints its arguments and exits with `$FAKE_EXIT`.
const RUNNER: &str = "#!/bin/sh\necho \"$0 $*\"\nexit ${FAKE_EXIT:-0}\n";

/// Lays out an installation tree for `version` under `root`.
pub fn fake_install(root: &Path, version: &str, layout: Layout) -> PathBuf {
    fs::create_dir_all(root.join("include")).unwrap();
    fs::create_dir_all(root.join("lib")).unwrap();
    executable(&root.join("bin/opp_run"), RUNNER);
    if layout.debug_runner {
        executable(&root.join("bin/opp_run_dbg"), RUNNER);
    }
    if layout.msgc {
        executable(&root.join("bin/opp_msgc"), "#!/bin/sh\nexit 0\n");
    }
    let inc = fs::read_to_string(fixtures().join("install/Makefile.inc"))
        .unwrap()
        .replace("/opt/omnetpp-6.0pre10", &slash(root))
        .replace("6.0pre10", version);
    fs::write(root.join("Makefile.inc"), inc).unwrap();
    if layout.version_file {
        fs::write(root.join("Version"), format!("omnetpp-{version}\n")).unwrap();
    }
    if layout.formatter {
        let f = root.join("python/omnetpp/lldb/formatters/omnetpp.py");
        fs::create_dir_all(f.parent().unwrap()).unwrap();
        fs::write(f, "# formatters\n").unwrap();
    }
    if layout.windows_tools {
        for d in ["tools/win64/mingw64/bin", "tools/win64/usr/bin", "tools/win64/opt/mingw64/bin"] {
            fs::create_dir_all(root.join(d)).unwrap();
        }
    }
    root.to_path_buf()
}

/// Copies a fixture directory tree.
pub fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let dest = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_tree(&e.path(), &dest);
        } else {
            fs::copy(e.path(), dest).unwrap();
        }
    }
}

pub fn oppforge() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oppforge"));
    c.env_remove("OMNETPP_ROOT");
    c
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
