use std::process::{Command, Output};

fn antijam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antijam")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&antijam(&["--help"])), 0);
    assert_eq!(code(&antijam(&["--version"])), 0);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    for args in [
        vec!["--bogus"],
        vec!["--scheme", "QLX", "--out-dir", out_dir],
        vec!["--grid-levels", "0", "--out-dir", out_dir],
        vec!["--slots", "0", "--out-dir", out_dir],
        vec!["--seeds", "5-2", "--out-dir", out_dir],
        vec!["--jammer-mode", "psychic", "--out-dir", out_dir],
        vec!["--config", "/nonexistent/run.cfg"],
    ] {
        assert_eq!(code(&antijam(&args)), 1, "{args:?}");
    }

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "slots = 10\nfrobnicate = 3\n").unwrap();
    let out = antijam(&["--config", cfg.to_str().unwrap(), "--out-dir", out_dir]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg") && err.contains("line 2"), "{err}");
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = antijam(&["--slots", "5", "--seeds", "1", "--out-dir", blocker.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("file"));
}

#[test]
fn runs_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = antijam(&["--scheme", "QLS", "--slots", "20", "--seeds", "1-2", "--grid-levels", "4", "--out-dir", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("qls_slots.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 40);
    assert!(dir.path().join("qls_summary.json").exists());

    let out = antijam(&["--scheme", "NE-ANALYSIS", "--seeds", "1-3", "--grid-levels", "4", "--out-dir", d]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("ne_analysis.json").exists());
}
