use thiserror::Error;

/// Failures surfaced by the numerical and statistical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("accuracy target not met in {func} (best estimate {estimate:e}, error estimate {error:e})")]
    Accuracy {
        func: &'static str,
        estimate: f64,
        error: f64,
    },

    #[error("no sign change over [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("divergent moment {moment}: {detail}")]
    MomentDivergence { moment: String, detail: String },

    #[error("truncation not reached by lag {max_lag} (partial sum {partial})")]
    NonConvergence { max_lag: usize, partial: f64 },

    #[error("heavy-tailed estimate for {0}: batch means disagree beyond tolerance")]
    HeavyTail(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
