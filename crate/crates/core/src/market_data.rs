//! Daily OHLC bar ingestion.
//!
//! CSV files use the header `Date,Open,High,Low,Close,Adj Close,Volume`.
//! Bars go through three steps before they are used:
//!
//! 1. [`parse_csv`] maps rows to [`Bar`]s, collecting per-row errors (for
//!    example the `null` rows some providers emit for holidays) instead of
//!    aborting.
//! 2. [`validate_and_sort`] orders bars by date, collapses duplicate dates
//!    (last row wins) and drops bars that break the price invariants.
//! 3. [`adjust`] rescales each open by the same-day `adj_close / close`
//!    factor, so that overnight and intraday legs compound to the adjusted
//!    close-to-close return.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

pub const HEADER: [&str; 7] = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"];

/// One instrument-day of OHLC data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

impl Bar {
    /// Why this bar breaks the bar invariants, if it does.
    ///
    /// A non-positive high or low is read as "not reported" and skips the
    /// envelope check.
    pub fn invariant_violation(&self) -> Option<String> {
        for (name, v) in [("open", self.open), ("close", self.close), ("adj_close", self.adj_close)] {
            if !(v.is_finite() && v > 0.0) {
                return Some(format!("{name} = {v} is not a positive price"));
            }
        }
        if self.low > 0.0 && self.low > self.open.min(self.close) {
            return Some(format!("low {} above min(open, close)", self.low));
        }
        if self.high > 0.0 && self.high < self.open.max(self.close) {
            return Some(format!("high {} below max(open, close)", self.high));
        }
        None
    }
}

/// A data row that could not be turned into a [`Bar`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub bars: Vec<Bar>,
    pub row_errors: Vec<RowError>,
}

/// Parse a daily-bar CSV stream.
///
/// Header problems fail the whole file; anything wrong inside a data row is
/// recorded in [`ParsedCsv::row_errors`] and parsing continues.
pub fn parse_csv<R: Read>(raw: R, instrument_id: &str) -> Result<ParsedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(raw);

    let format_err = |e: csv::Error| Error::Format {
        instrument: instrument_id.to_string(),
        message: e.to_string(),
    };

    let headers = reader.headers().map_err(format_err)?.clone();
    let mut columns = [0usize; 7];
    for (slot, name) in columns.iter_mut().zip(HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::MissingColumn {
                instrument: instrument_id.to_string(),
                column: name.to_string(),
            })?;
    }

    let mut bars = Vec::new();
    let mut row_errors = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                match parse_row(&record, &columns) {
                    Ok(bar) => bars.push(bar),
                    Err(message) => row_errors.push(RowError { line, message }),
                }
            }
            Err(e) => {
                // Invalid UTF-8 and similar are row-local; anything else ends the file.
                let line = e.position().map_or(0, |p| p.line());
                if matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) {
                    row_errors.push(RowError {
                        line,
                        message: e.to_string(),
                    });
                } else {
                    return Err(format_err(e));
                }
            }
        }
    }
    Ok(ParsedCsv { bars, row_errors })
}

fn parse_row(record: &csv::StringRecord, columns: &[usize; 7]) -> std::result::Result<Bar, String> {
    let cell = |i: usize| -> std::result::Result<&str, String> {
        record
            .get(columns[i])
            .ok_or_else(|| format!("missing `{}` cell", HEADER[i]))
    };
    let price = |i: usize| -> std::result::Result<f64, String> {
        let s = cell(i)?;
        if s == "null" {
            return Err(format!("null value in `{}`", HEADER[i]));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("unparsable number `{s}` in `{}`", HEADER[i])),
        }
    };

    let date_str = cell(0)?;
    let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d")
        .map_err(|_| format!("unparsable date `{date_str}`"))?;
    let (open, high, low, close, adj_close) = (price(1)?, price(2)?, price(3)?, price(4)?, price(5)?);
    let volume_str = cell(6)?;
    let volume = match volume_str.parse::<u64>() {
        Ok(v) => v,
        Err(_) => match volume_str.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 => v as u64,
            _ => return Err(format!("unparsable volume `{volume_str}`")),
        },
    };
    Ok(Bar {
        date,
        open,
        high,
        low,
        close,
        adj_close,
        volume,
    })
}

/// Write bars in the input CSV schema. Prices use the shortest representation
/// that parses back to the same `f64`.
pub fn write_csv<W: Write>(bars: &[Bar], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for b in bars {
        w.write_record(&[
            b.date.format("%Y-%m-%d").to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.adj_close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BarWarning {
    /// An earlier row with the same date was discarded.
    DuplicateDate { date: NaiveDate },
    /// The bar broke a price invariant and was removed.
    InvalidBar { date: NaiveDate, reason: String },
}

impl fmt::Display for BarWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarWarning::DuplicateDate { date } => write!(f, "{date}: duplicate date, kept last row"),
            BarWarning::InvalidBar { date, reason } => write!(f, "{date}: removed, {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanBars {
    pub bars: Vec<Bar>,
    pub warnings: Vec<BarWarning>,
}

/// Sort by date, drop invariant-breaking bars, keep the last row of each
/// duplicated date.
pub fn validate_and_sort(instrument_id: &str, bars: &[Bar]) -> Result<CleanBars> {
    let mut warnings = Vec::new();
    let mut kept: Vec<(usize, Bar)> = Vec::with_capacity(bars.len());
    for (i, bar) in bars.iter().enumerate() {
        match bar.invariant_violation() {
            Some(reason) => warnings.push(BarWarning::InvalidBar {
                date: bar.date,
                reason,
            }),
            None => kept.push((i, *bar)),
        }
    }
    // Stable sort keeps file order within a date, so the last of a run is the
    // last occurrence in the input.
    kept.sort_by_key(|(i, b)| (b.date, *i));

    let mut out: Vec<Bar> = Vec::with_capacity(kept.len());
    for (_, bar) in kept {
        match out.last_mut() {
            Some(prev) if prev.date == bar.date => {
                warnings.push(BarWarning::DuplicateDate { date: bar.date });
                *prev = bar;
            }
            _ => out.push(bar),
        }
    }
    if out.len() < 2 {
        return Err(Error::insufficient(
            instrument_id,
            format!("{} valid bar(s), need at least 2", out.len()),
        ));
    }
    Ok(CleanBars { bars: out, warnings })
}

/// An adjusted open/close pair for one date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustedBar {
    pub date: NaiveDate,
    pub open: f64,
    pub close: f64,
}

/// Dividend/split-adjusted open and close prices for one instrument.
///
/// Dates are strictly increasing and every price is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedSeries {
    instrument_id: String,
    bars: Vec<AdjustedBar>,
}

impl AdjustedSeries {
    pub fn new(instrument_id: impl Into<String>, bars: Vec<AdjustedBar>) -> Result<Self> {
        let instrument_id = instrument_id.into();
        for b in &bars {
            if !(b.open.is_finite() && b.open > 0.0 && b.close.is_finite() && b.close > 0.0) {
                return Err(Error::Data {
                    instrument: instrument_id,
                    date: b.date,
                    message: format!("non-positive adjusted price (open {}, close {})", b.open, b.close),
                });
            }
        }
        if let Some(w) = bars.windows(2).find(|w| w[0].date >= w[1].date) {
            return Err(Error::Data {
                instrument: instrument_id,
                date: w[1].date,
                message: "dates not strictly increasing".into(),
            });
        }
        Ok(Self { instrument_id, bars })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn bars(&self) -> &[AdjustedBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }
}

/// Scale each open by its bar's `adj_close / close`; the adjusted close is
/// `adj_close` itself.
pub fn adjust(instrument_id: &str, bars: &[Bar]) -> Result<AdjustedSeries> {
    let adjusted = bars
        .iter()
        .map(|b| {
            let factor = b.adj_close / b.close;
            AdjustedBar {
                date: b.date,
                open: b.open * factor,
                close: b.adj_close,
            }
        })
        .collect();
    AdjustedSeries::new(instrument_id, adjusted)
}

/// Everything produced by loading one instrument file.
#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: AdjustedSeries,
    pub row_errors: Vec<RowError>,
    pub warnings: Vec<BarWarning>,
}

/// Parse, validate and adjust a bar file in one go.
pub fn load_file(path: &Path, instrument_id: &str) -> Result<LoadedSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse_csv(std::io::BufReader::new(file), instrument_id)?;
    let clean = validate_and_sort(instrument_id, &parsed.bars)?;
    let series = adjust(instrument_id, &clean.bars)?;
    Ok(LoadedSeries {
        series,
        row_errors: parsed.row_errors,
        warnings: clean.warnings,
    })
}
