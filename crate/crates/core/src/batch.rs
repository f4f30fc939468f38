//! Manifest-driven batch runs: load or generate every instrument, decompose,
//! classify, then write curves, labels, the grid figure and a JSON summary.
//!
//! Output tree under `out`:
//!
//! ```text
//! curves/<id>.csv     cumulative curves
//! labels.csv          classifier output
//! grid.svg            small-multiples figure
//! summary.json        per-instrument headline numbers, stats, label, notes
//! report.txt          headline numbers as text
//! panel_meta.txt      null-model mode only
//! bars/<id>.csv       strategy-sim mode only: synthetic bars
//! ledger/<id>.csv     strategy-sim mode only: daily profit and loss
//! ```
//!
//! One instrument failing is recorded and the rest carry on; the run then
//! exits with status 1.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{classify, write_labels_csv, PatternLabel};
use crate::config::Manifest;
use crate::decomposition::{slice_range, summary_stats, CumulativeCurves, DailyReturnPair, SummaryStats};
use crate::error::{Error, Result};
use crate::market_data::{adjust, load_file, validate_and_sort, write_csv};
use crate::null_model::{NullModel, NullModelParams};
use crate::render::{render_grid, PlotSpec, YScale};
use crate::report::{headline_numbers, HeadlineNumbers};
use crate::strategy_sim::{profitability_threshold, run_sim, Scenario, SimResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RealData,
    NullModel,
    StrategySim,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real-data" => Ok(Mode::RealData),
            "null-model" => Ok(Mode::NullModel),
            "strategy-sim" => Ok(Mode::StrategySim),
            other => Err(Error::Config(format!("unknown mode `{other}` (real-data|null-model|strategy-sim)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::RealData => "real-data",
            Mode::NullModel => "null-model",
            Mode::StrategySim => "strategy-sim",
        })
    }
}

/// Which files a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    /// Curve CSVs, plus bars, ledgers and panel metadata in the modes that have them.
    pub curves: bool,
    pub labels: bool,
    pub grid: bool,
    pub summary: bool,
    pub report: bool,
}

impl Outputs {
    pub const ALL: Outputs = Outputs { curves: true, labels: true, grid: true, summary: true, report: true };
    pub const NONE: Outputs = Outputs { curves: false, labels: false, grid: false, summary: false, report: false };
}

impl Default for Outputs {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Instrument list for real-data and strategy-sim; optional parameter
    /// file for null-model.
    pub manifest: Option<PathBuf>,
    pub mode: Mode,
    pub out: PathBuf,
    /// Overrides seeds from parameter and scenario files.
    pub seed: Option<u64>,
    /// Date range for manifest entries that do not set their own.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub scale: YScale,
    pub theta: f64,
    pub outputs: Outputs,
}

impl RunOptions {
    pub fn new(mode: Mode, manifest: Option<PathBuf>, out: PathBuf) -> Self {
        Self {
            manifest,
            mode,
            out,
            seed: None,
            start: None,
            end: None,
            scale: YScale::Linear,
            theta: crate::classifier::DEFAULT_THETA,
            outputs: Outputs::ALL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstrumentFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub cumulative_net: f64,
    /// `None` when no book size makes the strategy pay.
    pub profitability_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstrumentSummary {
    pub id: String,
    pub headline: HeadlineNumbers,
    pub stats: Option<SummaryStats>,
    pub label: Option<PatternLabel>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub instruments: Vec<InstrumentSummary>,
    pub failures: Vec<InstrumentFailure>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub exit_code: i32,
    pub summary: RunSummary,
    pub curves: Vec<CumulativeCurves>,
}

/// Exit status for a run that could not start or could not write its output.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_PARTIAL,
    }
}

struct Processed {
    summary: InstrumentSummary,
    curves: CumulativeCurves,
    sim: Option<SimResult>,
}

fn analyse(id: &str, curves: CumulativeCurves, pairs: &[DailyReturnPair], theta: f64, mut notes: Vec<String>) -> Processed {
    let stats = match summary_stats(pairs, SummaryStats::DEFAULT_MIN_PAIRS) {
        Ok(s) => Some(s),
        Err(e) => {
            notes.push(format!("no summary statistics: {e}"));
            None
        }
    };
    let label = match classify(id, pairs, theta) {
        Ok(l) => Some(l),
        Err(e) => {
            notes.push(format!("not classified: {e}"));
            None
        }
    };
    Processed {
        summary: InstrumentSummary {
            id: id.to_string(),
            headline: headline_numbers(&curves),
            stats,
            label,
            notes,
            strategy: None,
        },
        curves,
        sim: None,
    }
}

fn load_manifest(opts: &RunOptions) -> Result<Manifest> {
    let path = opts
        .manifest
        .as_deref()
        .ok_or_else(|| Error::Config(format!("{} mode needs a manifest", opts.mode)))?;
    let manifest = Manifest::load(path).map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))?;
    if manifest.entries.is_empty() {
        return Err(Error::Config(format!("no instruments in manifest {}", path.display())));
    }
    Ok(manifest)
}

fn real_data(opts: &RunOptions) -> Result<Vec<Result<Processed, InstrumentFailure>>> {
    let manifest = load_manifest(opts)?;
    Ok(manifest
        .entries
        .par_iter()
        .map(|entry| {
            let run = || -> Result<Processed> {
                let loaded = load_file(&entry.path, &entry.id)?;
                let mut notes: Vec<String> = loaded.row_errors.iter().map(|e| format!("skipped row: {e}")).collect();
                notes.extend(loaded.warnings.iter().map(|w| w.to_string()));
                let start = entry.start.or(opts.start).unwrap_or(NaiveDate::MIN);
                let end = entry.end.or(opts.end).unwrap_or(NaiveDate::MAX);
                let series = slice_range(&loaded.series, start, end)?;
                let (curves, pairs) = CumulativeCurves::from_series(&series)?;
                Ok(analyse(&entry.id, curves, &pairs, opts.theta, notes))
            };
            run().map_err(|e| InstrumentFailure { id: entry.id.clone(), error: e.to_string() })
        })
        .collect())
}

fn null_model(opts: &RunOptions) -> Result<(Vec<Result<Processed, InstrumentFailure>>, String)> {
    let mut params = match &opts.manifest {
        Some(path) => NullModelParams::from_file(path).map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(format!("parameter file {}: {other}", path.display())),
        })?,
        None => NullModelParams::default(),
    };
    if let Some(seed) = opts.seed {
        params.seed = seed;
    }
    let model = NullModel::new(params)?;
    let panel = model.generate_panel()?;
    let processed = panel
        .paths
        .par_iter()
        .map(|path| {
            let id = format!("path-{:06}", path.path_seed);
            let curves = CumulativeCurves::from_pairs(id.clone(), model.anchor(), &path.pairs);
            let notes = if path.redraws > 0 {
                vec![format!("{} draws at or below -100% were redrawn", path.redraws)]
            } else {
                Vec::new()
            };
            Ok(analyse(&id, curves, &path.pairs, opts.theta, notes))
        })
        .collect();
    Ok((processed, panel.meta_text()))
}

fn strategy_sim(opts: &RunOptions) -> Result<Vec<Result<Processed, InstrumentFailure>>> {
    let manifest = load_manifest(opts)?;
    Ok(manifest
        .entries
        .par_iter()
        .map(|entry| {
            let run = || -> Result<Processed> {
                let scenario = Scenario::from_file(&entry.path)?;
                let seed = opts.seed.or(scenario.seed).unwrap_or(0);
                let sim = run_sim(&scenario.impact, &scenario.manipulator, seed)?;
                let clean = validate_and_sort(&entry.id, &sim.bars)?;
                let series = adjust(&entry.id, &clean.bars)?;
                let (curves, pairs) = CumulativeCurves::from_series(&series)?;
                let notes = clean.warnings.iter().map(|w| w.to_string()).collect();
                let mut p = analyse(&entry.id, curves, &pairs, opts.theta, notes);
                p.summary.strategy = Some(StrategySummary {
                    cumulative_net: sim.cumulative_net,
                    profitability_threshold: profitability_threshold(&scenario.impact, &scenario.manipulator).ok(),
                });
                p.sim = Some(sim);
                Ok(p)
            };
            run().map_err(|e| InstrumentFailure { id: entry.id.clone(), error: e.to_string() })
        })
        .collect())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

/// Run one batch. `Err` means nothing useful could be done (bad options,
/// unreadable or empty manifest, unwritable output directory).
pub fn run_manifest(opts: &RunOptions) -> Result<RunReport> {
    if !(opts.theta.is_finite() && opts.theta >= 0.0) {
        return Err(Error::Config(format!("--theta {} must be finite and >= 0", opts.theta)));
    }
    if let (Some(s), Some(e)) = (opts.start, opts.end) {
        if s > e {
            return Err(Error::Config(format!("start {s} is after end {e}")));
        }
    }
    let (results, panel_meta) = match opts.mode {
        Mode::RealData => (real_data(opts)?, None),
        Mode::NullModel => {
            let (r, meta) = null_model(opts)?;
            (r, Some(meta))
        }
        Mode::StrategySim => (strategy_sim(opts)?, None),
    };

    let mut processed = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => processed.push(p),
            Err(f) => failures.push(f),
        }
    }

    let out = &opts.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let o = opts.outputs;

    if o.grid {
        // A curve that cannot be drawn on this scale fails that instrument only.
        loop {
            let curves: Vec<CumulativeCurves> = processed.iter().map(|p| p.curves.clone()).collect();
            match render_grid(&curves, &PlotSpec::auto(curves.len(), opts.scale)) {
                Ok(svg) => {
                    write_file(&out.join("grid.svg"), svg.as_bytes())?;
                    break;
                }
                Err(Error::Render { instrument, message }) => {
                    let k = processed.iter().position(|p| p.summary.id == instrument).expect("rendered instrument");
                    processed.remove(k);
                    failures.push(InstrumentFailure {
                        id: instrument.clone(),
                        error: Error::Render { instrument, message }.to_string(),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }

    if o.curves {
        for p in &processed {
            let id = &p.summary.id;
            write_file(&out.join("curves").join(format!("{id}.csv")), &csv_bytes(|b| p.curves.write_csv(b)))?;
            if let Some(sim) = &p.sim {
                write_file(&out.join("bars").join(format!("{id}.csv")), &csv_bytes(|b| write_csv(&sim.bars, b)))?;
                write_file(&out.join("ledger").join(format!("{id}.csv")), &csv_bytes(|b| sim.write_ledger_csv(b)))?;
            }
        }
        if let Some(meta) = &panel_meta {
            write_file(&out.join("panel_meta.txt"), meta.as_bytes())?;
        }
    }
    if o.labels {
        let labels: Vec<PatternLabel> = processed.iter().filter_map(|p| p.summary.label.clone()).collect();
        write_file(&out.join("labels.csv"), &csv_bytes(|b| write_labels_csv(&labels, b)))?;
    }

    let summary = RunSummary {
        mode: opts.mode,
        instruments: processed.iter().map(|p| p.summary.clone()).collect(),
        failures,
    };
    if o.summary {
        let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        json.push('\n');
        write_file(&out.join("summary.json"), json.as_bytes())?;
    }
    if o.report {
        let mut text = String::new();
        for p in &processed {
            text.push_str(&p.summary.headline.text());
            if let Some(l) = &p.summary.label {
                text.push_str(&format!("  label {} (t overnight {:.2}, t intraday {:.2})\n", l.label, l.score_overnight, l.score_intraday));
            }
        }
        for f in &summary.failures {
            text.push_str(&format!("FAILED {}: {}\n", f.id, f.error));
        }
        write_file(&out.join("report.txt"), text.as_bytes())?;
    }

    Ok(RunReport {
        exit_code: if summary.failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL },
        curves: processed.into_iter().map(|p| p.curves).collect(),
        summary,
    })
}
