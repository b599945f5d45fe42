use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_nppac");

const TINY: &str = "nx = 16\nny = 16\nend_time = 0.0122\nsnapshot_times = 0, 0.0061, 0.0122\n";

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tiny.cfg");
    std::fs::write(&path, TINY).unwrap();
    path
}

fn nppac(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().unwrap()
}

#[test]
fn run_is_deterministic_and_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = nppac(&["run", "--config", cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a/diagnostics.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 21);
    for k in [0, 10, 20] {
        for f in [format!("snapshot_{k:05}.vtk"), format!("u_{k:05}.pgm"), format!("c_{k:05}.pgm")] {
            assert!(dir.path().join("a").join(&f).exists(), "{f}");
        }
    }
    let cfg_back = std::fs::read_to_string(dir.path().join("a/config.txt")).unwrap();
    assert!(cfg_back.contains("nx = 16"));
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("sweep");
    let o = nppac(&[
        "sweep",
        "--param",
        "mu",
        "--values",
        "0,0.5,1.0",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--snapshot-time",
        "0.0061",
        "--jobs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(summary.starts_with("param,value,dir,t,mode0,"));
    for (i, v) in ["0", "0.5", "1.0"].iter().enumerate() {
        let d = format!("mu_{i:02}_{v}");
        assert!(out.join(&d).join("diagnostics.csv").exists(), "{d}");
        assert!(rows[i].starts_with(&format!("mu,{v},{d},")), "{}", rows[i]);
    }
}

#[test]
fn sweep_rejects_unknown_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let o = nppac(&[
        "sweep",
        "--param",
        "colour",
        "--values",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_on_defaults_passes() {
    let o = nppac(&["verify"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("PASS ")).count() >= 8, "{stdout}");
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn usage_errors() {
    let o = nppac(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(nppac(&["run", "--out"]).status.code(), Some(2));
}

#[test]
fn bad_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "delta = banana\n").unwrap();
    let o = nppac(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("delta") && err.contains("line 1"), "{err}");
}
