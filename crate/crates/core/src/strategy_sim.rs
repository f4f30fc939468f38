//! Daily market simulation with a time-of-day liquidity profile and one large
//! participant who trades the same size every day: it expands its book at
//! the open, when a trade moves the price more, and contracts it at the
//! close, when the same trade moves the price less.
//!
//! # Price model
//!
//! Prices are additive in units of the reference price `p0`. The quoted price
//! is `fundamental + transient`. A trade of `x` shares (signed, buys
//! positive) at a time of day with impact coefficient `kappa` displaces the
//! price by `x * kappa * p0`; the fraction `phi` of that goes into the
//! fundamental (permanent), the rest into the transient component, which
//! decays by `2^(-1 / half_life)` at the start of each day.
//!
//! One simulated day:
//!
//! 1. transient impact decays;
//! 2. the expansion trade `s * q` executes at the open, and the official open
//!    is printed after it (`ExpandAt::PreOpen`) or before it (`ExpandAt::Open`);
//! 3. Gaussian noise `noise_sigma_daily * p0 * z` moves the fundamental;
//! 4. the contraction trade `-s * q` executes at the close, and the close is
//!    printed after it.
//!
//! Trades fill at the post-impact price. The ledger marks only the existing
//! book `W` to market; the round-trip quantity shows up as
//! `round_trip_cost = s * q * (fill_open - fill_close)`, which is the loss on the
//! day's round trip and is negative on a day the noise favours it.
//!
//! Under a T+1 rule a long book cannot sell shares bought the same day: the
//! contraction is deferred to the next open, where it nets against that
//! day's expansion, so after the first day no shares change hands.

use std::io::Write;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::calendar;
use crate::config::{parse_entries, read_text};
use crate::error::{Error, Result};
use crate::market_data::Bar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpactParams {
    /// Fractional price move per share traded at the open.
    pub kappa_open: f64,
    /// Fractional price move per share traded at the close.
    pub kappa_close: f64,
    /// Share of each impact that never decays.
    pub permanent_fraction: f64,
    /// Half-life of the transient part, in trading days.
    pub transient_half_life: f64,
    /// Daily fundamental noise as a fraction of `fundamental_price`.
    pub noise_sigma_daily: f64,
    pub fundamental_price: f64,
}

impl Default for ImpactParams {
    fn default() -> Self {
        Self {
            kappa_open: 0.001,
            kappa_close: 0.0002,
            permanent_fraction: 0.5,
            transient_half_life: 5.0,
            noise_sigma_daily: 0.01,
            fundamental_price: 100.0,
        }
    }
}

impl ImpactParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} must be finite and >= 0")))
            }
        };
        nonneg("kappa_open", self.kappa_open)?;
        nonneg("kappa_close", self.kappa_close)?;
        nonneg("noise_sigma_daily", self.noise_sigma_daily)?;
        if !(0.0..=1.0).contains(&self.permanent_fraction) {
            return Err(Error::Config(format!(
                "permanent_fraction {} must lie in [0, 1]",
                self.permanent_fraction
            )));
        }
        if self.transient_half_life.is_nan() || self.transient_half_life <= 0.0 {
            return Err(Error::Config(format!(
                "transient_half_life {} must be > 0",
                self.transient_half_life
            )));
        }
        if !(self.fundamental_price.is_finite() && self.fundamental_price > 0.0) {
            return Err(Error::Config(format!(
                "fundamental_price {} must be > 0",
                self.fundamental_price
            )));
        }
        Ok(())
    }

    /// Per-day multiplier applied to outstanding transient impact.
    pub fn daily_decay(&self) -> f64 {
        0.5f64.powf(1.0 / self.transient_half_life)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BookSide {
    LongBook,
    ShortBook,
}

impl BookSide {
    pub fn sign(self) -> f64 {
        match self {
            BookSide::LongBook => 1.0,
            BookSide::ShortBook => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            BookSide::LongBook => BookSide::ShortBook,
            BookSide::ShortBook => BookSide::LongBook,
        }
    }
}

/// Whether the expansion's impact lands in the official open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpandAt {
    PreOpen,
    Open,
}

/// The large participant's book and daily schedule. Contraction always
/// happens at the close.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManipulatorConfig {
    /// Existing position in shares; same sign as `side`, or zero.
    pub book: f64,
    /// Shares traded in each leg of the daily round trip.
    pub trade_q: f64,
    pub side: BookSide,
    pub t_plus_one: bool,
    pub n_days: usize,
    pub expand_at: ExpandAt,
}

impl Default for ManipulatorConfig {
    fn default() -> Self {
        Self {
            book: 50.0,
            trade_q: 10.0,
            side: BookSide::LongBook,
            t_plus_one: false,
            n_days: 2000,
            expand_at: ExpandAt::PreOpen,
        }
    }
}

impl ManipulatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.trade_q.is_finite() && self.trade_q > 0.0) {
            return Err(Error::Config(format!("trade_q {} must be > 0", self.trade_q)));
        }
        if !self.book.is_finite() || self.book * self.side.sign() < 0.0 {
            return Err(Error::Config(format!(
                "book {} has the wrong sign for a {:?}",
                self.book, self.side
            )));
        }
        if self.n_days == 0 {
            return Err(Error::Config("n_days must be at least 1".into()));
        }
        Ok(())
    }

    /// The same strategy run from the other side of the market.
    pub fn mirrored(&self) -> Self {
        Self {
            book: -self.book,
            side: self.side.flipped(),
            ..*self
        }
    }

    /// T+1 only binds a long book: a short book sells first and buys back.
    fn defers_contraction(&self) -> bool {
        self.t_plus_one && self.side == BookSide::LongBook
    }
}

/// Shares bought under T+1 that are waiting to be sold at the next open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Carry {
    pub shares: f64,
    pub basis: f64,
}

/// Everything carried from one day to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// Days completed so far.
    pub day: usize,
    pub fundamental: f64,
    pub transient: f64,
    pub last_close: f64,
    pub carry: Option<Carry>,
    pub cum_net: f64,
}

impl SimState {
    pub fn initial(impact: &ImpactParams) -> Self {
        Self {
            day: 0,
            fundamental: impact.fundamental_price,
            transient: 0.0,
            last_close: impact.fundamental_price,
            carry: None,
            cum_net: 0.0,
        }
    }

    pub fn price(&self) -> f64 {
        self.fundamental + self.transient
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    /// 1-based day index.
    pub day: usize,
    /// `book * (close_t - close_{t-1})`.
    pub mtm_gain: f64,
    pub round_trip_cost: f64,
    pub net: f64,
    pub cum_net: f64,
}

/// Standard-normal noise draw for one day.
fn day_noise(day_seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(day_seed);
    StandardNormal.sample(&mut rng)
}

/// Seed for day `day` of a run seeded with `seed` (splitmix64 finaliser over
/// both inputs).
pub fn day_seed(seed: u64, day: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(day as u64))
}

/// Advance one trading day.
pub fn step_day(
    state: &SimState,
    impact: &ImpactParams,
    m: &ManipulatorConfig,
    date: NaiveDate,
    day_seed: u64,
) -> Result<(SimState, Bar, LedgerEntry)> {
    let day = state.day + 1;
    let s = m.side.sign();
    let q = m.trade_q;
    let p0 = impact.fundamental_price;
    let phi = impact.permanent_fraction;

    let mut fundamental = state.fundamental;
    let mut transient = state.transient * impact.daily_decay();
    let mut apply = |shares: f64, kappa: f64| {
        let displacement = shares * kappa * p0;
        fundamental += phi * displacement;
        transient += (1.0 - phi) * displacement;
        fundamental + transient
    };

    let deferred = m.defers_contraction();
    let mut carry = state.carry;
    let mut traded = 0.0;
    let mut cost = 0.0;

    // Under T+1 yesterday's deferred sale nets against today's purchase.
    let expansion = if deferred && carry.is_some() { 0.0 } else { s * q };
    let (open, fill_open) = if expansion == 0.0 {
        let p = apply(0.0, 0.0);
        (p, p)
    } else {
        traded += expansion.abs();
        match m.expand_at {
            ExpandAt::PreOpen => {
                let p = apply(expansion, impact.kappa_open);
                (p, p)
            }
            ExpandAt::Open => {
                let printed = apply(0.0, 0.0);
                (printed, apply(expansion, impact.kappa_open))
            }
        }
    };
    if deferred {
        if let Some(c) = carry {
            cost += c.shares * (c.basis - fill_open);
        }
        carry = Some(Carry { shares: q, basis: fill_open });
    }

    fundamental += impact.noise_sigma_daily * p0 * day_noise(day_seed);

    let close = if deferred {
        fundamental + transient
    } else {
        let contraction = -s * q;
        let displacement = contraction * impact.kappa_close * p0;
        fundamental += phi * displacement;
        transient += (1.0 - phi) * displacement;
        traded += q;
        let fill_close = fundamental + transient;
        cost += s * q * (fill_open - fill_close);
        fill_close
    };

    for (name, price) in [("open", open), ("close", close)] {
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::SimulationBlowUp {
                day,
                message: format!("{name} price {price}"),
            });
        }
    }

    let mtm_gain = m.book * (close - state.last_close);
    let net = mtm_gain - cost;
    let cum_net = state.cum_net + net;
    let bar = Bar {
        date,
        open,
        high: open.max(close),
        low: open.min(close),
        close,
        adj_close: close,
        volume: traded.round() as u64,
    };
    let next = SimState {
        day,
        fundamental,
        transient,
        last_close: close,
        carry,
        cum_net,
    };
    let entry = LedgerEntry {
        day,
        mtm_gain,
        round_trip_cost: cost,
        net,
        cum_net,
    };
    Ok((next, bar, entry))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub bars: Vec<Bar>,
    pub ledger: Vec<LedgerEntry>,
    pub cumulative_net: f64,
}

impl SimResult {
    /// `day,mtm_gain,round_trip_cost,net,cum_net`
    pub fn write_ledger_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["day", "mtm_gain", "round_trip_cost", "net", "cum_net"])?;
        for e in &self.ledger {
            w.write_record(&[
                e.day.to_string(),
                e.mtm_gain.to_string(),
                e.round_trip_cost.to_string(),
                e.net.to_string(),
                e.cum_net.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Run `m.n_days` days starting from [`SimState::initial`]. Bars are dated
/// on consecutive weekdays from 1990-01-01.
pub fn run_sim(impact: &ImpactParams, m: &ManipulatorConfig, seed: u64) -> Result<SimResult> {
    impact.validate()?;
    m.validate()?;
    let dates = calendar::weekdays_from(calendar::synthetic_start(), m.n_days);
    let mut state = SimState::initial(impact);
    let mut bars = Vec::with_capacity(m.n_days);
    let mut ledger = Vec::with_capacity(m.n_days);
    for (i, &date) in dates.iter().enumerate() {
        let (next, bar, entry) = step_day(&state, impact, m, date, day_seed(seed, i))?;
        state = next;
        bars.push(bar);
        ledger.push(entry);
    }
    Ok(SimResult {
        bars,
        ledger,
        cumulative_net: state.cum_net,
    })
}

/// Long-run expected daily net for a book of `book` shares, ignoring noise.
///
/// Once the transient component has settled, each day's closing price moves
/// by the permanent part of the open/close impact difference,
/// `s * phi * q * (kappa_open - kappa_close) * p0`, and the round trip costs
/// the contraction's impact, `q * q * kappa_close * p0`. Under a binding T+1
/// rule there is no daily round trip, hence neither term.
pub fn expected_daily_net(impact: &ImpactParams, m: &ManipulatorConfig, book: f64) -> f64 {
    if m.defers_contraction() {
        return 0.0;
    }
    let (gain_per_share, cost) = daily_terms(impact, m);
    book * gain_per_share - cost
}

fn daily_terms(impact: &ImpactParams, m: &ManipulatorConfig) -> (f64, f64) {
    let q = m.trade_q;
    let p0 = impact.fundamental_price;
    let gain_per_share =
        m.side.sign() * impact.permanent_fraction * q * (impact.kappa_open - impact.kappa_close) * p0;
    let cost = q * q * impact.kappa_close * p0;
    (gain_per_share, cost)
}

/// Smallest book (signed like `m.side`) whose expected daily net is
/// non-negative. `expected_daily_net` is affine in the book, so the root is
/// solved exactly from its slope and intercept.
pub fn profitability_threshold(impact: &ImpactParams, m: &ManipulatorConfig) -> Result<f64> {
    impact.validate()?;
    if m.defers_contraction() {
        return Err(Error::NoThreshold(
            "T+1 leaves a long book without a daily round trip".into(),
        ));
    }
    let intercept = expected_daily_net(impact, m, 0.0);
    let slope = expected_daily_net(impact, m, 1.0) - intercept;
    // The book grows in the direction of its side; it must earn in that direction.
    if slope.is_nan() || slope * m.side.sign() <= 0.0 {
        return Err(Error::NoThreshold(format!(
            "no net price displacement per day (kappa_open {}, kappa_close {}, permanent_fraction {})",
            impact.kappa_open, impact.kappa_close, impact.permanent_fraction
        )));
    }
    Ok(-intercept / slope)
}

/// A simulation scenario file: every impact and participant field plus an
/// optional seed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scenario {
    pub impact: ImpactParams,
    pub manipulator: ManipulatorConfig,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Scenario::default();
        for e in parse_entries(text)? {
            let (impact, mc) = (&mut s.impact, &mut s.manipulator);
            match e.key.as_str() {
                "kappa_open" => impact.kappa_open = e.parse_value()?,
                "kappa_close" => impact.kappa_close = e.parse_value()?,
                "permanent_fraction" => impact.permanent_fraction = e.parse_value()?,
                "transient_half_life" => impact.transient_half_life = e.parse_value()?,
                "noise_sigma_daily" => impact.noise_sigma_daily = e.parse_value()?,
                "fundamental_price" => impact.fundamental_price = e.parse_value()?,
                "book" => mc.book = e.parse_value()?,
                "trade_q" => mc.trade_q = e.parse_value()?,
                "side" => {
                    mc.side = match e.require_value()? {
                        "long-book" => BookSide::LongBook,
                        "short-book" => BookSide::ShortBook,
                        other => return Err(Error::Config(format!("line {}: unknown side `{other}`", e.line))),
                    }
                }
                "t_plus_one" => mc.t_plus_one = e.parse_bool()?,
                "n_days" => mc.n_days = e.parse_value()?,
                "expand_at" => {
                    mc.expand_at = match e.require_value()? {
                        "pre-open" => ExpandAt::PreOpen,
                        "open" => ExpandAt::Open,
                        other => return Err(Error::Config(format!("line {}: unknown expand_at `{other}`", e.line))),
                    }
                }
                "contract_at" => {
                    if e.require_value()? != "close" {
                        return Err(Error::Config(format!("line {}: contract_at only supports `close`", e.line)));
                    }
                }
                "seed" => s.seed = Some(e.parse_value()?),
                _ => return Err(e.unknown()),
            }
        }
        s.impact.validate()?;
        s.manipulator.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{classify, Pattern};
    use crate::decomposition::{daily_pairs, final_cumulative, Leg};
    use crate::market_data::{adjust, validate_and_sort};

    fn quiet(kappa_open: f64, kappa_close: f64) -> ImpactParams {
        ImpactParams {
            kappa_open,
            kappa_close,
            noise_sigma_daily: 0.0,
            ..ImpactParams::default()
        }
    }

    fn book(book: f64, n_days: usize) -> ManipulatorConfig {
        ManipulatorConfig {
            book,
            trade_q: 1.0,
            n_days,
            ..ManipulatorConfig::default()
        }
    }

    fn pairs_of(r: &SimResult) -> Vec<crate::decomposition::DailyReturnPair> {
        let clean = validate_and_sort("SIM", &r.bars).unwrap();
        assert!(clean.warnings.is_empty());
        daily_pairs(&adjust("SIM", &clean.bars).unwrap()).unwrap()
    }

    #[test]
    fn three_day_hand_example() {
        // kappa_open 10bp, kappa_close 2bp per share, q = 1, p0 = 100, phi = 0.5, W = 100.
        let r = run_sim(&quiet(0.001, 0.0002), &book(100.0, 3), 0).unwrap();
        let d = 0.5f64.powf(0.2);
        // Day 1: open impact +0.1 (0.05 permanent, 0.05 transient), close impact -0.02.
        let (open1, close1) = (100.1, 100.08);
        // Day 2: transient 0.04 decays, then the same trades.
        let t2 = 0.04 * d;
        let (open2, close2) = (100.09 + t2 + 0.05, 100.08 + t2 + 0.04);
        let t3 = (t2 + 0.04) * d;
        let (open3, close3) = (100.13 + t3 + 0.05, 100.12 + t3 + 0.04);
        let want = [(open1, close1, 100.0), (open2, close2, close1), (open3, close3, close2)];
        for (k, &(open, close, prev)) in want.iter().enumerate() {
            let e = r.ledger[k];
            assert!((r.bars[k].open - open).abs() < 1e-9, "day {} open", k + 1);
            assert!((r.bars[k].close - close).abs() < 1e-9, "day {} close", k + 1);
            assert!((e.mtm_gain - 100.0 * (close - prev)).abs() < 1e-9);
            assert!((e.round_trip_cost - (open - close)).abs() < 1e-9);
            assert!((e.round_trip_cost - 0.02).abs() < 1e-9);
        }
        assert!((r.ledger[0].net - 7.98).abs() < 1e-9);
    }

    #[test]
    fn symmetric_liquidity_without_book_only_loses() {
        let r = run_sim(&quiet(0.0005, 0.0005), &book(0.0, 50), 1).unwrap();
        for e in &r.ledger {
            assert!(e.net <= 0.0 && (e.net + e.round_trip_cost).abs() < 1e-12);
        }
        // impacts cancel within each day: closes stay at p0
        assert!(r.bars.iter().all(|b| (b.close - 100.0).abs() < 1e-9));
    }

    #[test]
    fn empty_book_loses_every_day() {
        let r = run_sim(&quiet(0.003, 0.0001), &book(0.0, 100), 1).unwrap();
        assert!(r.ledger.iter().all(|e| e.net < 0.0));
    }

    #[test]
    fn zero_days_rejected() {
        assert!(matches!(run_sim(&quiet(0.001, 0.0002), &book(1.0, 0), 0), Err(Error::Config(_))));
    }

    #[test]
    fn wrong_book_sign_rejected() {
        let m = ManipulatorConfig { book: -5.0, ..book(1.0, 10) };
        assert!(m.validate().is_err());
        assert!(m.mirrored().mirrored().validate().is_err());
        assert!(ManipulatorConfig { book: 5.0, ..m }.mirrored().validate().is_ok());
    }

    #[test]
    fn blow_up_is_reported_with_day() {
        let impact = ImpactParams { noise_sigma_daily: 0.0, kappa_open: 0.0, kappa_close: 0.5, permanent_fraction: 1.0, ..ImpactParams::default() };
        let m = ManipulatorConfig { trade_q: 1.0, book: 0.0, n_days: 10, ..ManipulatorConfig::default() };
        // each day the close is pushed down by half the reference price
        match run_sim(&impact, &m, 0) {
            Err(Error::SimulationBlowUp { day, .. }) => assert_eq!(day, 2),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn ledger_sums_to_cumulative_net() {
        let r = run_sim(&ImpactParams::default(), &ManipulatorConfig { n_days: 500, ..Default::default() }, 3).unwrap();
        let sum: f64 = r.ledger.iter().map(|e| e.net).sum();
        assert!((sum - r.cumulative_net).abs() <= 1e-9 * r.cumulative_net.abs().max(1.0));
        assert_eq!(r.ledger.last().unwrap().cum_net, r.cumulative_net);
    }

    #[test]
    fn mirror_flips_prices_and_keeps_nets() {
        let impact = quiet(0.001, 0.0002);
        let m = ManipulatorConfig { book: 30.0, trade_q: 4.0, n_days: 300, ..Default::default() };
        let a = run_sim(&impact, &m, 9).unwrap();
        let b = run_sim(&impact, &m.mirrored(), 9).unwrap();
        for (x, y) in a.bars.iter().zip(&b.bars) {
            assert!(((x.close - 100.0) + (y.close - 100.0)).abs() < 1e-9);
            assert!(((x.open - 100.0) + (y.open - 100.0)).abs() < 1e-9);
        }
        for (x, y) in a.ledger.iter().zip(&b.ledger) {
            assert!((x.net - y.net).abs() <= 1e-9 * x.net.abs().max(1.0));
        }
    }

    #[test]
    fn long_book_produces_rising_overnight_falling_intraday() {
        let m = ManipulatorConfig { book: 50.0, trade_q: 10.0, n_days: 2000, ..Default::default() };
        let r = run_sim(&quiet(0.001, 0.0002), &m, 0).unwrap();
        let pairs = pairs_of(&r);
        assert!(pairs.iter().all(|p| p.overnight > 0.0 && p.intraday < 0.0));
        let o = crate::decomposition::compound(&pairs, Leg::Overnight);
        let i = crate::decomposition::compound(&pairs, Leg::Intraday);
        assert!(o.windows(2).all(|w| w[1] > w[0]));
        assert!(i.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn t_plus_one_kills_the_overnight_rise() {
        let m = ManipulatorConfig { book: 50.0, trade_q: 10.0, n_days: 2000, t_plus_one: true, ..Default::default() };
        let r = run_sim(&ImpactParams::default(), &m, 0).unwrap();
        let pairs = pairs_of(&r);
        assert!(final_cumulative(&pairs, Leg::Overnight) <= 0.0);
        // after the first day nothing trades
        assert!(r.bars[1..].iter().all(|b| b.volume == 0));
    }

    #[test]
    fn expand_after_open_moves_the_impact_intraday() {
        let m = ManipulatorConfig { expand_at: ExpandAt::Open, n_days: 400, ..Default::default() };
        let r = run_sim(&quiet(0.001, 0.0002), &m, 0).unwrap();
        let pairs = pairs_of(&r);
        assert!(pairs.iter().all(|p| p.overnight < 0.0 && p.intraday > 0.0));
    }

    #[test]
    fn threshold_closed_form() {
        // W* = q kappa_c / (phi (kappa_o - kappa_c)) = 1 * 0.0002 / (0.5 * 0.0008)
        let w = profitability_threshold(&quiet(0.001, 0.0002), &book(1.0, 1)).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        let short = book(1.0, 1).mirrored();
        let ws = profitability_threshold(&quiet(0.001, 0.0002), &short).unwrap();
        assert!((ws + 0.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_needs_asymmetry() {
        for impact in [quiet(0.0004, 0.0004), quiet(0.0, 0.0), quiet(0.0001, 0.0004)] {
            assert!(matches!(profitability_threshold(&impact, &book(1.0, 1)), Err(Error::NoThreshold(_))));
        }
        let no_permanent = ImpactParams { permanent_fraction: 0.0, ..quiet(0.001, 0.0002) };
        assert!(profitability_threshold(&no_permanent, &book(1.0, 1)).is_err());
        let t1 = ManipulatorConfig { t_plus_one: true, ..book(1.0, 1) };
        assert!(profitability_threshold(&quiet(0.001, 0.0002), &t1).is_err());
    }

    #[test]
    fn threshold_agrees_with_simulated_sweep() {
        // Brute force: long noise-free runs, sign change of the average daily net
        // across a grid of book sizes.
        let impact = quiet(0.001, 0.0002);
        let n_days = 20_000;
        for q in [1.0, 2.0] {
            let m = ManipulatorConfig { trade_q: q, n_days, book: 0.0, ..Default::default() };
            let w_star = profitability_threshold(&impact, &m).unwrap();
            let net_at = |w: f64| run_sim(&impact, &ManipulatorConfig { book: w, ..m }, 0).unwrap().cumulative_net;
            let grid: Vec<f64> = (1..=80).map(|k| k as f64 * 0.0137).collect();
            let first_positive = grid.iter().copied().find(|&w| net_at(w) > 0.0).unwrap();
            assert!(first_positive >= w_star * (1.0 - 1e-3) && first_positive <= w_star + 0.0137,
                "q {q}: sweep {first_positive}, closed form {w_star}");
        }
        let w1 = profitability_threshold(&impact, &ManipulatorConfig { trade_q: 1.0, ..Default::default() }).unwrap();
        let w2 = profitability_threshold(&impact, &ManipulatorConfig { trade_q: 2.0, ..Default::default() }).unwrap();
        assert!((w2 / w1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sim_bars_classify_long_and_mirror_short() {
        // Small enough that the short book's downward drift keeps prices positive.
        let impact = ImpactParams { noise_sigma_daily: 0.002, ..ImpactParams::default() };
        let m = ManipulatorConfig { trade_q: 2.0, n_days: 1000, ..ManipulatorConfig::default() };
        let long = classify("SIM", &pairs_of(&run_sim(&impact, &m, 4).unwrap()), 2.0).unwrap();
        let short = classify("SIM", &pairs_of(&run_sim(&impact, &m.mirrored(), 4).unwrap()), 2.0).unwrap();
        assert_eq!(long.label, Pattern::Long);
        assert_eq!(short.label, Pattern::Short);
    }

    #[test]
    fn scenario_parsing() {
        let s = Scenario::parse(
            "kappa_open = 0.002\nside = short-book\nbook = -20\nt_plus_one = true\nexpand_at = open\ncontract_at = close\nseed = 5\n",
        )
        .unwrap();
        assert_eq!(s.impact.kappa_open, 0.002);
        assert_eq!(s.manipulator.side, BookSide::ShortBook);
        assert!(s.manipulator.t_plus_one);
        assert_eq!(s.manipulator.expand_at, ExpandAt::Open);
        assert_eq!(s.seed, Some(5));
        assert!(Scenario::parse("side = short-book\n").is_err(), "default book is positive");
        assert!(Scenario::parse("contract_at = open\n").is_err());
        assert!(Scenario::parse("mystery = 1\n").is_err());
    }

    #[test]
    fn ledger_csv_schema() {
        let r = run_sim(&quiet(0.001, 0.0002), &book(100.0, 1), 0).unwrap();
        let mut buf = Vec::new();
        r.write_ledger_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("day,mtm_gain,round_trip_cost,net,cum_net\n1,"));
    }
}
