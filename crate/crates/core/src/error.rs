use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mixing angle undefined: pump and Stokes Rabi frequencies are both zero")]
    UndefinedAngle,

    #[error("step size {dt} ns exceeds the stability guard {limit} ns at t = {t} ns")]
    StepTooLarge { dt: f64, limit: f64, t: f64 },

    #[error("density-matrix invariant violated at t = {t} ns: {what}")]
    InvariantBreach { t: f64, what: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
