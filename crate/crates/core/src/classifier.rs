//! Long/short/none labelling of an instrument's overnight/intraday signature.
//!
//! A leg's score is the t-statistic of its mean daily return. An instrument
//! is `Long` when overnight returns are significantly positive and intraday
//! returns significantly negative (score beyond `±theta`), `Short` for the
//! mirror image, and `None` otherwise, including when both legs point the
//! same way.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::decomposition::{final_cumulative, DailyReturnPair, Leg};
use crate::error::{Error, Result};
use crate::stats::t_statistic;

pub const DEFAULT_THETA: f64 = 2.0;
/// Roughly one trading year.
pub const MIN_PAIRS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Long,
    Short,
    #[serde(rename = "none")]
    Neutral,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Long => "long",
            Pattern::Short => "short",
            Pattern::Neutral => "none",
        })
    }
}

impl Pattern {
    pub fn mirrored(self) -> Self {
        match self {
            Pattern::Long => Pattern::Short,
            Pattern::Short => Pattern::Long,
            Pattern::Neutral => Pattern::Neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternLabel {
    pub instrument_id: String,
    pub label: Pattern,
    /// `±inf` when the leg has zero variance but a nonzero mean.
    pub score_overnight: f64,
    pub score_intraday: f64,
    pub cum_overnight_final: f64,
    pub cum_intraday_final: f64,
}

/// Label from the two scores alone.
pub fn label_from_scores(score_overnight: f64, score_intraday: f64, theta: f64) -> Pattern {
    if score_overnight >= theta && score_intraday <= -theta {
        Pattern::Long
    } else if score_overnight <= -theta && score_intraday >= theta {
        Pattern::Short
    } else {
        Pattern::Neutral
    }
}

pub fn classify(instrument_id: &str, pairs: &[DailyReturnPair], theta: f64) -> Result<PatternLabel> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Config(format!("classification threshold {theta} must be finite and >= 0")));
    }
    if pairs.len() < MIN_PAIRS {
        return Err(Error::insufficient(
            instrument_id,
            format!("{} return pairs, need at least {MIN_PAIRS} to classify", pairs.len()),
        ));
    }
    let score = |leg: Leg, name: &str| {
        let xs: Vec<f64> = pairs.iter().map(|p| p.leg(leg)).collect();
        t_statistic(&xs).ok_or_else(|| Error::Degenerate {
            instrument: instrument_id.to_string(),
            message: format!("{name} returns are identically zero"),
        })
    };
    let score_overnight = score(Leg::Overnight, "overnight")?;
    let score_intraday = score(Leg::Intraday, "intraday")?;
    Ok(PatternLabel {
        instrument_id: instrument_id.to_string(),
        label: label_from_scores(score_overnight, score_intraday, theta),
        score_overnight,
        score_intraday,
        cum_overnight_final: final_cumulative(pairs, Leg::Overnight),
        cum_intraday_final: final_cumulative(pairs, Leg::Intraday),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternFractions {
    pub long: f64,
    pub short: f64,
    pub none: f64,
}

pub fn panel_fractions(labels: &[PatternLabel]) -> Result<PatternFractions> {
    if labels.is_empty() {
        return Err(Error::insufficient("panel", "no labels"));
    }
    let n = labels.len() as f64;
    let count = |p: Pattern| labels.iter().filter(|l| l.label == p).count() as f64;
    let long = count(Pattern::Long) / n;
    let short = count(Pattern::Short) / n;
    Ok(PatternFractions {
        long,
        short,
        none: 1.0 - long - short,
    })
}

/// `instrument,label,t_overnight,t_intraday,cum_overnight,cum_intraday`
pub fn write_labels_csv<W: Write>(labels: &[PatternLabel], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instrument", "label", "t_overnight", "t_intraday", "cum_overnight", "cum_intraday"])?;
    for l in labels {
        w.write_record(&[
            l.instrument_id.clone(),
            l.label.to_string(),
            l.score_overnight.to_string(),
            l.score_intraday.to_string(),
            l.cum_overnight_final.to_string(),
            l.cum_intraday_final.to_string(),
        ])?;
    }
    w.flush()
}
