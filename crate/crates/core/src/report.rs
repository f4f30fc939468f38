//! Headline numbers and their textual formatting.
//!
//! Cumulative returns are fractions of unity: `c = 12171` means one unit
//! invested grew to 12,172 units. Large magnitudes print as thousands-separated
//! integers, small ones with up to four significant digits.

use serde::Serialize;

use crate::decomposition::CumulativeCurves;
use crate::error::{Error, Result};

fn sign(x: f64) -> &'static str {
    if x < 0.0 {
        "-"
    } else {
        "+"
    }
}

fn with_thousands(magnitude: f64) -> String {
    let digits = format!("{magnitude:.0}");
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Decimal places that give `sig` significant digits for `magnitude > 0`.
fn decimals_for(magnitude: f64, sig: i32) -> usize {
    (sig - 1 - magnitude.log10().floor() as i32).max(0) as usize
}

/// Fixed-point with four significant digits, trailing zeros dropped down to
/// `keep` decimals.
fn significant(magnitude: f64, keep: usize) -> String {
    let decimals = decimals_for(magnitude, 4);
    let mut s = format!("{magnitude:.decimals$}");
    if let Some(dot) = s.find('.') {
        let floor = dot + 1 + keep.min(decimals);
        while s.len() > floor && s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Fraction of unity: `12171 -> "+12,171"`, `-0.43 -> "-0.43"`, `0.5 -> "+0.50"`.
pub fn format_fraction(c: f64) -> String {
    if c == 0.0 {
        return "+0".into();
    }
    let m = c.abs();
    let body = if m >= 10.0 {
        with_thousands(m)
    } else {
        significant(m, decimals_for(m, 2))
    };
    format!("{}{body}", sign(c))
}

/// Percent of the fraction: `12171 -> "+1,217,100%"`, `-0.9989 -> "-99.89%"`.
pub fn format_percent(c: f64) -> String {
    let p = c * 100.0;
    if p == 0.0 {
        return "+0%".into();
    }
    let m = p.abs();
    let body = if m >= 999.5 { with_thousands(m) } else { significant(m, 0) };
    format!("{}{body}%", sign(p))
}

/// Inverse of [`format_percent`]; also accepts a typographic minus.
pub fn parse_percent(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("not a percent string: `{s}`"));
    let body = s.trim().strip_suffix('%').ok_or_else(bad)?;
    let (neg, digits) = if let Some(rest) = body.strip_prefix('-').or_else(|| body.strip_prefix('\u{2212}')) {
        (true, rest)
    } else {
        (false, body.strip_prefix('+').unwrap_or(body))
    };
    let cleaned: String = digits.chars().filter(|&c| c != ',').collect();
    let v: f64 = cleaned.parse().map_err(|_| bad())?;
    Ok(if neg { -v } else { v } / 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegHeadline {
    /// Final cumulative return `c`.
    pub cumulative: f64,
    /// What one unit invested at the start is worth at the end, `1 + c`.
    pub unit_value: f64,
    /// Profit on that unit, `(1 + c) - 1`.
    pub profit: f64,
    pub fraction: String,
    pub percent: String,
}

impl LegHeadline {
    pub fn new(c: f64) -> Self {
        let unit_value = 1.0 + c;
        let profit = unit_value - 1.0;
        Self {
            cumulative: c,
            unit_value,
            profit,
            fraction: format_fraction(c),
            percent: format_percent(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadlineNumbers {
    pub instrument_id: String,
    pub start: chrono::NaiveDate,
    pub end: chrono::NaiveDate,
    pub overnight: LegHeadline,
    pub intraday: LegHeadline,
    pub total: LegHeadline,
}

impl HeadlineNumbers {
    /// Plain-text lines, one per leg.
    pub fn text(&self) -> String {
        let mut out = format!("{} {} to {}\n", self.instrument_id, self.start, self.end);
        for (name, leg) in [("overnight", &self.overnight), ("intraday", &self.intraday), ("total", &self.total)] {
            out.push_str(&format!(
                "  {name:<9} {:>14} ({}); 1 unit -> {:.4}\n",
                leg.percent, leg.fraction, leg.unit_value
            ));
        }
        out
    }
}

pub fn headline_numbers(curves: &CumulativeCurves) -> HeadlineNumbers {
    HeadlineNumbers {
        instrument_id: curves.instrument_id.clone(),
        start: curves.dates[0],
        end: *curves.dates.last().expect("curves start with an anchor row"),
        overnight: LegHeadline::new(curves.final_overnight()),
        intraday: LegHeadline::new(curves.final_intraday()),
        total: LegHeadline::new(curves.final_total()),
    }
}
