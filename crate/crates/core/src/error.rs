use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{table} CSV: missing header")]
    MissingHeader { table: &'static str },

    #[error("{table} CSV: unexpected header `{found}`, expected `{expected}`")]
    BadHeader {
        table: &'static str,
        expected: String,
        found: String,
    },

    #[error("{table} CSV line {line}, field `{field}`: {message}")]
    Field {
        table: &'static str,
        line: u64,
        field: &'static str,
        message: String,
    },

    #[error("{table} CSV line {line}: {message}")]
    Row {
        table: &'static str,
        line: u64,
        message: String,
    },

    #[error("machines CSV line {line}: duplicate machine `{name}` for coin `{coin}`")]
    DuplicateMachine { line: u64, name: String, coin: String },

    #[error("coins CSV line {line}: duplicate coin `{coin}`")]
    DuplicateCoin { line: u64, coin: String },

    #[error("machines CSV line {line}: machine `{name}` references unknown coin `{coin}`")]
    UnresolvedCoin { line: u64, name: String, coin: String },

    #[error("unknown coin `{coin}` (available: {available})")]
    UnknownCoin { coin: String, available: String },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("instance too large for oracle: {0}")]
    OracleTooLarge(String),

    #[error("instance exceeds exact-search limits: {0}")]
    InstanceTooLarge(String),

    #[error("capital {capital} is outside the evaluator range (max {max})")]
    CapitalOutOfRange { capital: f64, max: f64 },

    #[error("evaluation failed at capital {capital}: {source}")]
    Evaluation {
        capital: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("empty curve")]
    EmptyCurve,

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN, infinities and values failing `ok`.
pub(crate) fn check(
    name: &'static str,
    value: f64,
    ok: impl Fn(f64) -> bool,
    requirement: &str,
) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("{value} is not finite")));
    }
    if !ok(value) {
        return Err(Error::invalid(name, format!("{value}: {requirement}")));
    }
    Ok(value)
}
