//! Overnight/intraday split of daily returns and their compounded curves.
//!
//! For consecutive bars `t-1, t` of an adjusted series:
//!
//! ```text
//! overnight_t = open_t / close_{t-1} - 1
//! intraday_t  = close_t / open_t - 1
//! ```
//!
//! so `(1 + overnight_t)(1 + intraday_t) = close_t / close_{t-1}`. Weekend and
//! holiday gaps fall entirely into the overnight leg.

use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::{AdjustedBar, AdjustedSeries};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DailyReturnPair {
    pub date: NaiveDate,
    pub overnight: f64,
    pub intraday: f64,
}

impl DailyReturnPair {
    /// Close-to-close return implied by the two legs.
    pub fn total(&self) -> f64 {
        (1.0 + self.overnight) * (1.0 + self.intraday) - 1.0
    }

    pub fn leg(&self, leg: Leg) -> f64 {
        match leg {
            Leg::Overnight => self.overnight,
            Leg::Intraday => self.intraday,
            Leg::Total => self.total(),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            date: self.date,
            overnight: -self.overnight,
            intraday: -self.intraday,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    Overnight,
    Intraday,
    Total,
}

/// Split a series into per-day return pairs; output has one fewer entry than
/// the series.
pub fn daily_pairs(series: &AdjustedSeries) -> Result<Vec<DailyReturnPair>> {
    let bars = series.bars();
    if bars.len() < 2 {
        return Err(Error::insufficient(
            series.instrument_id(),
            format!("{} bar(s), need at least 2", bars.len()),
        ));
    }
    bars.windows(2)
        .map(|w| pair_from_bars(series.instrument_id(), &w[0], &w[1]))
        .collect()
}

fn pair_from_bars(id: &str, prev: &AdjustedBar, cur: &AdjustedBar) -> Result<DailyReturnPair> {
    let overnight_ratio = cur.open / prev.close;
    let intraday_ratio = cur.close / cur.open;
    if !(overnight_ratio.is_finite() && overnight_ratio > 0.0 && intraday_ratio.is_finite() && intraday_ratio > 0.0) {
        return Err(Error::Data {
            instrument: id.to_string(),
            date: cur.date,
            message: format!("non-positive price ratio (overnight {overnight_ratio}, intraday {intraday_ratio})"),
        });
    }
    Ok(DailyReturnPair {
        date: cur.date,
        overnight: overnight_ratio - 1.0,
        intraday: intraday_ratio - 1.0,
    })
}

/// Compound one leg: `c_t = (1 + c_{t-1})(1 + r_t) - 1` with `c_0 = 0`.
/// The leading zero is not included in the output.
pub fn compound(pairs: &[DailyReturnPair], leg: Leg) -> Vec<f64> {
    let mut growth = 1.0;
    pairs
        .iter()
        .map(|p| {
            growth *= match leg {
                Leg::Overnight => 1.0 + p.overnight,
                Leg::Intraday => 1.0 + p.intraday,
                Leg::Total => (1.0 + p.overnight) * (1.0 + p.intraday),
            };
            growth - 1.0
        })
        .collect()
}

/// Final compounded return of one leg; 0 for no pairs.
pub fn final_cumulative(pairs: &[DailyReturnPair], leg: Leg) -> f64 {
    compound(pairs, leg).last().copied().unwrap_or(0.0)
}

/// The three cumulative curves of one instrument, each starting at 0 on the
/// anchor date (the day before the first return).
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCurves {
    pub instrument_id: String,
    pub dates: Vec<NaiveDate>,
    pub overnight: Vec<f64>,
    pub intraday: Vec<f64>,
    pub total: Vec<f64>,
}

impl CumulativeCurves {
    pub fn from_pairs(instrument_id: impl Into<String>, anchor: NaiveDate, pairs: &[DailyReturnPair]) -> Self {
        let with_origin = |leg| {
            let mut v = Vec::with_capacity(pairs.len() + 1);
            v.push(0.0);
            v.extend(compound(pairs, leg));
            v
        };
        let mut dates = Vec::with_capacity(pairs.len() + 1);
        dates.push(anchor);
        dates.extend(pairs.iter().map(|p| p.date));
        Self {
            instrument_id: instrument_id.into(),
            dates,
            overnight: with_origin(Leg::Overnight),
            intraday: with_origin(Leg::Intraday),
            total: with_origin(Leg::Total),
        }
    }

    /// Curves for an adjusted series, anchored on its first bar.
    pub fn from_series(series: &AdjustedSeries) -> Result<(Self, Vec<DailyReturnPair>)> {
        let pairs = daily_pairs(series)?;
        let anchor = series.bars()[0].date;
        Ok((Self::from_pairs(series.instrument_id(), anchor, &pairs), pairs))
    }

    /// Number of compounded returns (points minus the origin).
    pub fn len(&self) -> usize {
        self.dates.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn final_overnight(&self) -> f64 {
        self.overnight.last().copied().unwrap_or(0.0)
    }

    pub fn final_intraday(&self) -> f64 {
        self.intraday.last().copied().unwrap_or(0.0)
    }

    pub fn final_total(&self) -> f64 {
        self.total.last().copied().unwrap_or(0.0)
    }

    /// `date,cum_overnight,cum_intraday,cum_total`, shortest round-trip
    /// formatting of every value.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "cum_overnight", "cum_intraday", "cum_total"])?;
        for i in 0..self.dates.len() {
            w.write_record(&[
                self.dates[i].format("%Y-%m-%d").to_string(),
                self.overnight[i].to_string(),
                self.intraday[i].to_string(),
                self.total[i].to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Keep bars with `start <= date <= end`.
pub fn slice_range(series: &AdjustedSeries, start: NaiveDate, end: NaiveDate) -> Result<AdjustedSeries> {
    if start > end {
        return Err(Error::Config(format!("range start {start} is after end {end}")));
    }
    let bars: Vec<_> = series
        .bars()
        .iter()
        .filter(|b| b.date >= start && b.date <= end)
        .copied()
        .collect();
    if bars.len() < 2 {
        return Err(Error::insufficient(
            series.instrument_id(),
            format!("{} bar(s) between {start} and {end}, need at least 2", bars.len()),
        ));
    }
    AdjustedSeries::new(series.instrument_id(), bars)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegStats {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub final_cumulative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub overnight: LegStats,
    pub intraday: LegStats,
    pub total: LegStats,
    /// `var_intraday / var_overnight`.
    pub variance_ratio: f64,
    /// `var_overnight / (var_overnight + var_intraday)`.
    pub overnight_variance_share: f64,
}

impl SummaryStats {
    pub const DEFAULT_MIN_PAIRS: usize = 30;
}

/// Per-leg moments (sample variance) and final compounded returns.
pub fn summary_stats(pairs: &[DailyReturnPair], min_pairs: usize) -> Result<SummaryStats> {
    if pairs.len() < min_pairs {
        return Err(Error::InsufficientData {
            instrument: String::new(),
            message: format!("{} return pairs, need at least {min_pairs}", pairs.len()),
        });
    }
    let leg_stats = |leg: Leg| {
        let xs: Vec<f64> = pairs.iter().map(|p| p.leg(leg)).collect();
        let (mean, variance) = stats::mean_variance(&xs);
        LegStats {
            mean,
            variance,
            std_dev: variance.sqrt(),
            final_cumulative: final_cumulative(pairs, leg),
        }
    };
    let overnight = leg_stats(Leg::Overnight);
    let intraday = leg_stats(Leg::Intraday);
    let total = leg_stats(Leg::Total);
    Ok(SummaryStats {
        count: pairs.len(),
        overnight,
        intraday,
        total,
        variance_ratio: intraday.variance / overnight.variance,
        overnight_variance_share: overnight.variance / (overnight.variance + intraday.variance),
    })
}
