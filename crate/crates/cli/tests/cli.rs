use std::fs;
use std::process::Command;

const SMALL: &str = "\
[scenario]
name = tiny

[material]
preset = nu0245
horizon = 0.004

[domain]
x0 = 0
x1 = 0.012
y0 = 0
y1 = 0.012

[mesh]
h_ratio = 2

[time]
dt = 4e-9
t_final = 4e-8

[initial]
kind = uniform_velocity
velocity = 0.5 0

[output]
diag_stride = 5
";

fn nlfrac() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlfrac"))
}

#[test]
fn run_writes_diagnostics_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.ini");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let o = nlfrac()
        .args(["--threads", "2", "run"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--snapshot-stride", "5"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("μs"), "{stdout}");
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,kinetic,pd,total,augmented,pe,ge,crack_length,max_z,u_l2,v_l2\n"));
    // steps 0, 5 and 10
    assert_eq!(csv.lines().count(), 4);
    assert!(out.join("snapshot_00000005.vtk").exists());
    assert!(out.join("snapshot_00000010.vtk").exists());
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, SMALL.replace("horizon = 0.004", "epsilonn = 0.004")).unwrap();
    let o = nlfrac().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("material.epsilonn"), "{err}");
    assert!(err.contains(":6:"), "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    let o = nlfrac().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = nlfrac()
        .args(["--threads", "0", "presets"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn blow_up_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fast.ini");
    let text = SMALL
        .replace("dt = 4e-9\nt_final = 4e-8", "dt = 1e-6\nt_final = 1e-1")
        .replace(
            "kind = uniform_velocity\nvelocity = 0.5 0",
            "kind = bump\namplitude = 1e-6\ncenter = 0.006 0.006\nsigma = 0.002",
        );
    fs::write(&cfg, text).unwrap();
    let o = nlfrac()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn presets_are_listed_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlfrac()
        .arg("presets")
        .arg("--write")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for name in [
        "crack_eps8_h2",
        "crack_eps1_h8",
        "bending_single",
        "bending_double",
        "relaxation",
        "manufactured",
    ] {
        assert!(stdout.contains(name), "{name}");
        assert!(dir.path().join(format!("{name}.ini")).exists());
    }
}

#[test]
fn shipped_files_match_the_builtin_presets() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");
    let mut seen = 0;
    for (name, cfg) in nlfrac::scenario::presets::catalog() {
        let path = std::path::Path::new(root).join(format!("{name}.ini"));
        let parsed = nlfrac::scenario::parse_config(&path).unwrap();
        assert_eq!(parsed, cfg, "{name}");
        seen += 1;
    }
    assert!(seen >= 16);
}
