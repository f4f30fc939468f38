//! `overnight`: split daily returns into overnight and intraday legs, simulate
//! null-model and strategy markets, classify, and draw small-multiples grids.

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use overnight_core::batch::{exit_code_for_error, run_manifest, Mode, Outputs, RunOptions};
use overnight_core::render::YScale;

#[derive(Parser)]
#[command(name = "overnight", version, about = "Overnight vs intraday return decomposition toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cumulative overnight/intraday curves for real price files.
    Decompose(Common),
    /// Survivorship-filtered random-walk panel.
    Nullmodel(Common),
    /// Markets with an open-expanding, close-contracting participant.
    Simulate(Common),
    /// Long/short/none labels.
    Classify(WithMode),
    /// Small-multiples SVG grid.
    Render(WithMode),
    /// Headline numbers as JSON and text.
    Report(WithMode),
}

#[derive(Args)]
struct Common {
    /// Instrument manifest; for `nullmodel`, an optional parameter file.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// First date kept (YYYY-MM-DD).
    #[arg(long)]
    start: Option<NaiveDate>,
    /// Last date kept (YYYY-MM-DD).
    #[arg(long)]
    end: Option<NaiveDate>,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    scale: Scale,
    /// Classification threshold on |t|.
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
}

#[derive(Args)]
struct WithMode {
    #[arg(long, value_enum, default_value_t = ModeArg::RealData)]
    mode: ModeArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    RealData,
    NullModel,
    StrategySim,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::RealData => Mode::RealData,
            ModeArg::NullModel => Mode::NullModel,
            ModeArg::StrategySim => Mode::StrategySim,
        }
    }
}

fn options(mode: Mode, c: Common, outputs: Outputs) -> RunOptions {
    RunOptions {
        manifest: c.manifest,
        mode,
        out: c.out,
        seed: c.seed,
        start: c.start,
        end: c.end,
        scale: match c.scale {
            Scale::Linear => YScale::Linear,
            Scale::Log => YScale::Log,
        },
        theta: c.theta,
        outputs,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let only = |f: fn(&mut Outputs)| {
        let mut o = Outputs::NONE;
        f(&mut o);
        o
    };
    let opts = match cli.command {
        Command::Decompose(c) => options(
            Mode::RealData,
            c,
            Outputs { grid: false, labels: false, ..Outputs::ALL },
        ),
        Command::Nullmodel(c) => options(Mode::NullModel, c, Outputs::ALL),
        Command::Simulate(c) => options(Mode::StrategySim, c, Outputs::ALL),
        Command::Classify(w) => options(w.mode.into(), w.common, only(|o| {
            o.labels = true;
            o.summary = true;
        })),
        Command::Render(w) => options(w.mode.into(), w.common, only(|o| o.grid = true)),
        Command::Report(w) => options(w.mode.into(), w.common, only(|o| {
            o.summary = true;
            o.report = true;
        })),
    };

    match run_manifest(&opts) {
        Ok(report) => {
            let s = &report.summary;
            eprintln!(
                "{}: {} instrument(s) written to {}, {} failed",
                s.mode,
                s.instruments.len(),
                opts.out.display(),
                s.failures.len()
            );
            for f in &s.failures {
                eprintln!("  {}: {}", f.id, f.error);
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for_error(&e) as u8)
        }
    }
}
