use std::path::Path;
use std::process::{Command, Output};

fn overnight(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overnight")).args(args).current_dir(cwd).output().unwrap()
}

fn scenarios() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
}

#[test]
fn nullmodel_writes_the_full_tree() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "panel_count = 3\nyears = 4\n").unwrap();
    let out = overnight(&["nullmodel", "--manifest", "p.txt", "--out", "o", "--seed", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["grid.svg", "labels.csv", "summary.json", "report.txt", "panel_meta.txt"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    assert_eq!(std::fs::read_dir(dir.path().join("o/curves")).unwrap().count(), 3);
}

#[test]
fn simulate_example_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = scenarios().join("strategies.manifest");
    let out = overnight(&["simulate", "--manifest", manifest.to_str().unwrap(), "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let labels = std::fs::read_to_string(dir.path().join("o/labels.csv")).unwrap();
    assert!(labels.lines().any(|l| l.starts_with("long_book,long,")));
    assert!(labels.lines().any(|l| l.starts_with("short_book,short,")));
    assert!(labels.lines().any(|l| l.starts_with("t_plus_one,none,")));
    let ledger = std::fs::read_to_string(dir.path().join("o/ledger/long_book.csv")).unwrap();
    assert!(ledger.starts_with("day,mtm_gain,round_trip_cost,net,cum_net\n"));
}

#[test]
fn render_only_writes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "panel_count = 2\nyears = 3\n").unwrap();
    let out = overnight(&["render", "--mode", "null-model", "--manifest", "p.txt", "--out", "o", "--scale", "log"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<_> = std::fs::read_dir(dir.path().join("o")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["grid.svg"]);
}

#[test]
fn empty_manifest_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m"), "").unwrap();
    let out = overnight(&["decompose", "--manifest", "m", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no instruments"));
}

#[test]
fn corrupt_instrument_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "Date,Open\n").unwrap();
    std::fs::write(dir.path().join("m"), "bad.csv\n").unwrap();
    let out = overnight(&["classify", "--manifest", "m", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad"));
}

#[test]
fn bad_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = overnight(&["nullmodel", "--scale", "cubic"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = overnight(&["nullmodel", "--theta", "-1", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
