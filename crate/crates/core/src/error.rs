use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A single malformed record; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("unknown weather station `{0}`")]
    UnknownStation(String),

    #[error("duplicate record for date {0}")]
    DuplicateDate(NaiveDate),

    #[error("no overlapping dates")]
    NoOverlap,

    #[error("date {date} outside holiday table range {from}..={to}")]
    OutOfCalendarRange {
        date: NaiveDate,
        from: NaiveDate,
        to: NaiveDate,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank-deficient design: `{column}` is a linear combination of {depends_on:?}")]
    RankDeficient {
        column: String,
        depends_on: Vec<String>,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    /// True for failures of the numerical routines themselves, as opposed to
    /// malformed or missing data.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::RankDeficient { .. } | Error::Degenerate(_))
    }
}
