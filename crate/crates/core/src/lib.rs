//! Overnight/intraday return decomposition toolkit.
//!
//! The pipeline runs daily OHLC bars through ingestion and adjustment
//! ([`market_data`]), splits each day's return into its close-to-open and
//! open-to-close legs ([`decomposition`]), and labels the resulting signature
//! ([`classifier`]). Two generators feed the same pipeline: a Gaussian
//! random-walk baseline ([`null_model`]) and a simulated market in which one
//! large participant expands its book at the open and contracts it at the
//! close ([`strategy_sim`]). [`report`], [`render`] and [`batch`] turn results
//! into CSV, SVG and JSON outputs.

pub mod batch;
pub mod calendar;
pub mod classifier;
pub mod config;
pub mod decomposition;
pub mod error;
pub mod market_data;
pub mod null_model;
pub mod render;
pub mod report;
pub mod stats;
pub mod strategy_sim;

pub use error::{Error, Result};
