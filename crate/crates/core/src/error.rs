use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The CSV header is missing a required column.
    #[error("{instrument}: malformed header, missing column `{column}`")]
    MissingColumn { instrument: String, column: String },

    #[error("{instrument}: malformed CSV: {message}")]
    Format { instrument: String, message: String },

    #[error("{instrument}: insufficient data: {message}")]
    InsufficientData { instrument: String, message: String },

    /// A price ratio that should be positive was not.
    #[error("{instrument}: bad price data on {date}: {message}")]
    Data {
        instrument: String,
        date: NaiveDate,
        message: String,
    },

    #[error("{instrument}: degenerate data: {message}")]
    Degenerate { instrument: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no profitability threshold: {0}")]
    NoThreshold(String),

    #[error("simulation blew up on day {day}: {message}")]
    SimulationBlowUp { day: usize, message: String },

    #[error("cannot render `{instrument}`: {message}")]
    Render { instrument: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn insufficient(instrument: &str, message: impl Into<String>) -> Self {
        Error::InsufficientData {
            instrument: instrument.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
