//! Synthetic weekday calendar used to date generated series.

use chrono::{Datelike, Days, NaiveDate, Weekday};

/// First synthetic trading day.
pub fn synthetic_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(1990, 1, 1).expect("valid date")
}

fn is_weekday(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// The weekday strictly before `date`.
pub fn previous_weekday(date: NaiveDate) -> NaiveDate {
    let mut d = date - Days::new(1);
    while !is_weekday(d) {
        d = d - Days::new(1);
    }
    d
}

/// `count` consecutive weekdays starting at `start` (or the next weekday if
/// `start` falls on a weekend).
pub fn weekdays_from(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if is_weekday(d) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}
