use std::path::Path;

use chrono::NaiveDate;
use overnight_core::batch::{run_manifest, Mode, Outputs, RunOptions, EXIT_PARTIAL};
use overnight_core::decomposition::daily_pairs;
use overnight_core::market_data::{adjust, parse_csv, validate_and_sort, write_csv, Bar};
use overnight_core::render::YScale;
use overnight_core::strategy_sim::{run_sim, ImpactParams, ManipulatorConfig};
use overnight_core::Error;

fn sim_bars(n_days: usize, seed: u64) -> Vec<Bar> {
    let m = ManipulatorConfig { n_days, ..ManipulatorConfig::default() };
    run_sim(&ImpactParams::default(), &m, seed).unwrap().bars
}

fn write_bars(path: &Path, bars: &[Bar]) {
    let mut buf = Vec::new();
    write_csv(bars, &mut buf).unwrap();
    std::fs::write(path, buf).unwrap();
}

#[test]
fn simulated_bars_survive_a_csv_round_trip() {
    let bars = sim_bars(400, 5);
    let direct = daily_pairs(&adjust("SIM", &bars).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_csv(&bars, &mut buf).unwrap();
    let parsed = parse_csv(buf.as_slice(), "SIM").unwrap();
    assert!(parsed.row_errors.is_empty());
    let clean = validate_and_sort("SIM", &parsed.bars).unwrap();
    assert!(clean.warnings.is_empty());
    let reread = daily_pairs(&adjust("SIM", &clean.bars).unwrap()).unwrap();
    assert_eq!(direct, reread);
}

#[test]
fn one_corrupt_file_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_bars(&dir.path().join("good.csv"), &sim_bars(300, 1));
    std::fs::write(dir.path().join("bad.csv"), "this is not,a price file\n1,2\n").unwrap();
    std::fs::write(dir.path().join("m.manifest"), "good = good.csv\nbad = bad.csv\n").unwrap();
    let out = dir.path().join("out");
    let report = run_manifest(&RunOptions::new(Mode::RealData, Some(dir.path().join("m.manifest")), out.clone())).unwrap();
    assert_eq!(report.exit_code, EXIT_PARTIAL);
    assert_eq!(report.summary.instruments.len(), 1);
    assert_eq!(report.summary.failures.len(), 1);
    assert_eq!(report.summary.failures[0].id, "bad");
    assert!(out.join("curves/good.csv").exists());
    assert!(!out.join("curves/bad.csv").exists());
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failures"][0]["id"], "bad");
    assert_eq!(summary["instruments"][0]["label"]["label"], "long");
    let labels = std::fs::read_to_string(out.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 2);
}

#[test]
fn missing_file_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_bars(&dir.path().join("good.csv"), &sim_bars(30, 1));
    std::fs::write(dir.path().join("m.manifest"), "good.csv\nghost.csv\n").unwrap();
    let report = run_manifest(&RunOptions::new(Mode::RealData, Some(dir.path().join("m.manifest")), dir.path().join("out"))).unwrap();
    assert_eq!(report.exit_code, EXIT_PARTIAL);
    assert_eq!(report.summary.failures[0].id, "ghost");
    // too short to classify, but still decomposed
    let good = &report.summary.instruments[0];
    assert!(good.label.is_none());
    assert!(good.notes.iter().any(|n| n.contains("not classified")));
}

#[test]
fn empty_manifest_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.manifest"), "# nothing here\n").unwrap();
    let err = run_manifest(&RunOptions::new(Mode::RealData, Some(dir.path().join("m.manifest")), dir.path().join("out"))).unwrap_err();
    assert!(matches!(&err, Error::Config(m) if m.contains("no instruments")), "{err}");
}

#[test]
fn date_range_flags_and_entry_overrides() {
    let dir = tempfile::tempdir().unwrap();
    write_bars(&dir.path().join("x.csv"), &sim_bars(300, 2));
    std::fs::write(dir.path().join("m.manifest"), "wide = x.csv\nnarrow = x.csv 1990-03-01 1990-03-30\n").unwrap();
    let mut opts = RunOptions::new(Mode::RealData, Some(dir.path().join("m.manifest")), dir.path().join("out"));
    opts.start = NaiveDate::from_ymd_opt(1990, 2, 1);
    opts.end = NaiveDate::from_ymd_opt(1990, 6, 29);
    let report = run_manifest(&opts).unwrap();
    let range = |k: usize| {
        let c = &report.curves[k];
        (c.dates[0], *c.dates.last().unwrap())
    };
    let d = |m, day| NaiveDate::from_ymd_opt(1990, m, day).unwrap();
    assert_eq!(range(0), (d(2, 1), d(6, 29)));
    assert_eq!(range(1), (d(3, 1), d(3, 30)));
}

#[test]
fn null_model_parameter_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("params.txt"), "panel_count = 4\nyears = 2\nsurvivorship_threshold = 0.0\nseed = 99\n").unwrap();
    let out = dir.path().join("out");
    let mut opts = RunOptions::new(Mode::NullModel, Some(dir.path().join("params.txt")), out.clone());
    opts.seed = Some(3);
    let report = run_manifest(&opts).unwrap();
    assert_eq!(report.exit_code, 0);
    assert_eq!(report.summary.instruments.len(), 4);
    assert!(report.summary.instruments.iter().all(|i| i.id.starts_with("path-") && i.id.len() == 11));
    let meta = std::fs::read_to_string(out.join("panel_meta.txt")).unwrap();
    assert!(meta.contains("seed = 3\n") && meta.contains("panel_count = 4\n"));
}

#[test]
fn log_scale_drops_only_the_unplottable_instrument() {
    let dir = tempfile::tempdir().unwrap();
    let mut wiped = sim_bars(30, 3);
    // a close of essentially nothing: intraday return rounds to -100%
    wiped[10].close = 1e-300;
    wiped[10].adj_close = 1e-300;
    wiped[10].low = 1e-300;
    write_bars(&dir.path().join("wiped.csv"), &wiped);
    write_bars(&dir.path().join("fine.csv"), &sim_bars(30, 4));
    std::fs::write(dir.path().join("m.manifest"), "wiped.csv\nfine.csv\n").unwrap();
    let out = dir.path().join("out");
    let mut opts = RunOptions::new(Mode::RealData, Some(dir.path().join("m.manifest")), out.clone());
    opts.scale = YScale::Log;
    opts.outputs = Outputs { grid: true, summary: true, ..Outputs::NONE };
    let report = run_manifest(&opts).unwrap();
    assert_eq!(report.exit_code, EXIT_PARTIAL);
    assert_eq!(report.summary.failures[0].id, "wiped");
    let svg = std::fs::read_to_string(out.join("grid.svg")).unwrap();
    assert!(svg.contains("cell-fine") && !svg.contains("cell-wiped"));
    assert!(!out.join("curves").exists());
}
