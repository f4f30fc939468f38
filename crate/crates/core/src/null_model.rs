//! Gaussian random-walk baseline for overnight/intraday curves.
//!
//! Each synthetic trading day draws an overnight return from
//! `N(mu_o, sigma_o)` and an intraday return from `N(mu_i, sigma_i)`, where a
//! fraction `f` of the daily drift and variance is assigned to the overnight
//! leg:
//!
//! ```text
//! mu_o = f * mu / n        sigma_o^2 = f * sigma^2 / n
//! mu_i = (1 - f) * mu / n  sigma_i^2 = (1 - f) * sigma^2 / n
//! ```
//!
//! A panel keeps drawing paths until `panel_count` of them end with a total
//! return of at least `survivorship_threshold`, mimicking a universe that only
//! contains survivors.
//!
//! # Random streams
//!
//! Path `i` uses `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`, so
//! every path is a pure function of `(seed, i)` and paths can be generated in
//! any order or in parallel. Within a path each day draws the overnight
//! return, then the intraday return, with standard-normal samples from
//! `rand_distr::StandardNormal`. Changing any of this changes every fixture.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::calendar;
use crate::config::{parse_entries, read_text};
use crate::decomposition::{final_cumulative, DailyReturnPair, Leg};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullModelParams {
    pub mu_annual: f64,
    pub sigma_annual: f64,
    pub trading_days_per_year: u32,
    pub overnight_variance_fraction: f64,
    pub years: u32,
    /// Minimum total return for a path to be kept (3.0 = +300%).
    pub survivorship_threshold: f64,
    pub panel_count: usize,
    pub seed: u64,
}

impl Default for NullModelParams {
    fn default() -> Self {
        Self {
            mu_annual: 0.07,
            sigma_annual: 0.20,
            trading_days_per_year: 261,
            overnight_variance_fraction: 1.0 / 3.0,
            years: 32,
            survivorship_threshold: 3.0,
            panel_count: 50,
            seed: 0,
        }
    }
}

impl NullModelParams {
    pub fn validate(&self) -> Result<()> {
        let f = self.overnight_variance_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("overnight_variance_fraction {f} must lie in (0, 1)")));
        }
        if !self.mu_annual.is_finite() {
            return Err(Error::Config("mu_annual must be finite".into()));
        }
        if !(self.sigma_annual.is_finite() && self.sigma_annual >= 0.0) {
            return Err(Error::Config(format!("sigma_annual {} must be >= 0", self.sigma_annual)));
        }
        if self.trading_days_per_year == 0 || self.years == 0 {
            return Err(Error::Config("trading_days_per_year and years must be positive".into()));
        }
        if self.panel_count == 0 {
            return Err(Error::Config("panel_count must be at least 1".into()));
        }
        if self.survivorship_threshold.is_nan() {
            return Err(Error::Config("survivorship_threshold is NaN".into()));
        }
        Ok(())
    }

    /// Number of synthetic trading days per path.
    pub fn path_len(&self) -> usize {
        self.trading_days_per_year as usize * self.years as usize
    }

    /// Apply `key = value` overrides; unknown keys are rejected.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        for e in parse_entries(text)? {
            match e.key.as_str() {
                "mu_annual" => self.mu_annual = e.parse_value()?,
                "sigma_annual" => self.sigma_annual = e.parse_value()?,
                "trading_days_per_year" => self.trading_days_per_year = e.parse_value()?,
                "overnight_variance_fraction" => self.overnight_variance_fraction = parse_fraction(&e)?,
                "years" => self.years = e.parse_value()?,
                "survivorship_threshold" => self.survivorship_threshold = e.parse_value()?,
                "panel_count" => self.panel_count = e.parse_value()?,
                "seed" => self.seed = e.parse_value()?,
                _ => return Err(e.unknown()),
            }
        }
        self.validate()
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let mut p = Self::default();
        p.apply_overrides(&read_text(path)?)?;
        Ok(p)
    }
}

/// Accepts plain decimals or a `a/b` ratio such as `1/3`.
fn parse_fraction(e: &crate::config::Entry) -> Result<f64> {
    let v = e.require_value()?;
    if let Some((a, b)) = v.split_once('/') {
        let (a, b): (f64, f64) = (
            a.trim().parse().map_err(|_| Error::Config(format!("line {}: bad ratio `{v}`", e.line)))?,
            b.trim().parse().map_err(|_| Error::Config(format!("line {}: bad ratio `{v}`", e.line)))?,
        );
        Ok(a / b)
    } else {
        e.parse_value()
    }
}

/// Per-period drift and volatility of each leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodParams {
    pub mu_overnight: f64,
    pub mu_intraday: f64,
    pub sigma_overnight: f64,
    pub sigma_intraday: f64,
}

pub fn derive_period_params(p: &NullModelParams) -> PeriodParams {
    let n = p.trading_days_per_year as f64;
    let f = p.overnight_variance_fraction;
    PeriodParams {
        mu_overnight: f * p.mu_annual / n,
        mu_intraday: (1.0 - f) * p.mu_annual / n,
        sigma_overnight: p.sigma_annual * (f / n).sqrt(),
        sigma_intraday: p.sigma_annual * ((1.0 - f) / n).sqrt(),
    }
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub path_seed: u64,
    pub pairs: Vec<DailyReturnPair>,
    pub total_return: f64,
    pub accepted: bool,
    /// Draws at or below -1 that were discarded and drawn again.
    pub redraws: u64,
}

/// Validated parameters plus the precomputed synthetic calendar.
#[derive(Debug, Clone)]
pub struct NullModel {
    params: NullModelParams,
    period: PeriodParams,
    anchor: NaiveDate,
    dates: Vec<NaiveDate>,
}

impl NullModel {
    pub fn new(params: NullModelParams) -> Result<Self> {
        params.validate()?;
        let start = calendar::synthetic_start();
        Ok(Self {
            params,
            period: derive_period_params(&params),
            anchor: calendar::previous_weekday(start),
            dates: calendar::weekdays_from(start, params.path_len()),
        })
    }

    pub fn params(&self) -> &NullModelParams {
        &self.params
    }

    pub fn period(&self) -> &PeriodParams {
        &self.period
    }

    /// Date at which every curve starts (the weekday before the first draw).
    pub fn anchor(&self) -> NaiveDate {
        self.anchor
    }

    pub fn rng_for_path(&self, path_seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        rng.set_stream(path_seed);
        rng
    }

    pub fn draw_path(&self, path_seed: u64) -> PathSample {
        let mut rng = self.rng_for_path(path_seed);
        let mut redraws = 0u64;
        let mut draw = |mean: f64, sd: f64, rng: &mut ChaCha8Rng| loop {
            let z: f64 = StandardNormal.sample(rng);
            let r = mean + sd * z;
            if r > -1.0 {
                return r;
            }
            redraws += 1;
        };
        let pp = self.period;
        let pairs: Vec<DailyReturnPair> = self
            .dates
            .iter()
            .map(|&date| {
                let overnight = draw(pp.mu_overnight, pp.sigma_overnight, &mut rng);
                let intraday = draw(pp.mu_intraday, pp.sigma_intraday, &mut rng);
                DailyReturnPair { date, overnight, intraday }
            })
            .collect();
        let total_return = final_cumulative(&pairs, Leg::Total);
        PathSample {
            path_seed,
            accepted: total_return >= self.params.survivorship_threshold,
            pairs,
            total_return,
            redraws,
        }
    }

    /// Draw paths `0, 1, 2, ...` and keep the first `panel_count` survivors.
    pub fn generate_panel(&self) -> Result<Panel> {
        const BATCH: u64 = 64;
        const RATE_CHECK_DRAWS: u64 = 1_000_000;
        const MIN_RATE: f64 = 1e-4;

        let want = self.params.panel_count;
        let mut accepted = Vec::with_capacity(want);
        let mut draws = 0u64;
        let mut redraws = 0u64;
        let mut next = 0u64;
        while accepted.len() < want {
            let batch: Vec<PathSample> = (next..next + BATCH)
                .into_par_iter()
                .map(|i| self.draw_path(i))
                .collect();
            next += BATCH;
            // Filtering happens in seed order, so the result does not depend
            // on the batch size or thread count.
            for path in batch {
                draws += 1;
                redraws += path.redraws;
                if path.accepted {
                    accepted.push(path);
                    if accepted.len() == want {
                        break;
                    }
                }
                if draws == RATE_CHECK_DRAWS && (accepted.len() as f64) / (draws as f64) < MIN_RATE {
                    return Err(Error::Config(format!(
                        "survivorship threshold {} unreachable: {} of {draws} paths accepted",
                        self.params.survivorship_threshold,
                        accepted.len()
                    )));
                }
            }
        }
        Ok(Panel {
            params: self.params,
            paths: accepted,
            draws,
            redraws,
        })
    }
}

/// Draw one path; see [`NullModel::draw_path`].
pub fn draw_path(params: &NullModelParams, path_seed: u64) -> Result<PathSample> {
    Ok(NullModel::new(*params)?.draw_path(path_seed))
}

pub fn generate_panel(params: &NullModelParams) -> Result<Panel> {
    NullModel::new(*params)?.generate_panel()
}

/// Accepted paths in acceptance order plus the bookkeeping needed to
/// report the acceptance rate.
#[derive(Debug, Clone)]
pub struct Panel {
    pub params: NullModelParams,
    pub paths: Vec<PathSample>,
    /// Paths drawn up to and including the last accepted one.
    pub draws: u64,
    pub redraws: u64,
}

impl Panel {
    pub fn acceptance_rate(&self) -> f64 {
        self.paths.len() as f64 / self.draws as f64
    }

    /// Contents of the `panel_meta` file.
    pub fn meta_text(&self) -> String {
        let p = &self.params;
        format!(
            "seed = {}\npanel_count = {}\npaths_drawn = {}\nacceptance_rate = {}\nredraws = {}\n\
             mu_annual = {}\nsigma_annual = {}\ntrading_days_per_year = {}\n\
             overnight_variance_fraction = {}\nyears = {}\nsurvivorship_threshold = {}\n",
            p.seed,
            self.paths.len(),
            self.draws,
            self.acceptance_rate(),
            self.redraws,
            p.mu_annual,
            p.sigma_annual,
            p.trading_days_per_year,
            p.overnight_variance_fraction,
            p.years,
            p.survivorship_threshold,
        )
    }
}
