use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn tppar(args: &[&str], spec: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tppar"))
        .args(args)
        .arg(spec)
        .arg("-o")
        .arg(out)
        .env("TPPAR_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn tangential_condition_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = tppar(&["check"], &spec("tangential_bc.toml"), dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("check.json")).unwrap();
    assert!(report.contains("SingularF") || report.contains("singular"), "{report}");
}

#[test]
fn heat_solve_writes_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = tppar(&["solve"], &spec("heat_whole.toml"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let u = tppar::io::read_field(dir.path().join("u.tpf")).unwrap();
    assert_eq!(u.grid().dim(), 2);
    assert!(dir.path().join("norms.csv").exists());
}

#[test]
fn half_space_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tppar(&["verify"], &spec("heat_neumann_half.toml"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("verify.csv").exists());
}

#[test]
fn sweep_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = tppar(&["sweep", "--samples", "10", "--seed", "3"], &spec("heat_whole.toml"), d.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["sweep.json", "sweep.csv", "summary.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn missing_spec_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tppar(&["check"], &dir.path().join("nope.toml"), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mean_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(spec("heat_whole.toml")).unwrap().replace("k = -3", "k = 0");
    std::fs::write(&path, text).unwrap();
    let out = tppar(&["solve"], &path, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
}
