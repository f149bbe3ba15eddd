use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Predictive mean does not exist for `a <= 1/k`.
    #[error("predictive mean is infinite for a = {a}, k = {k}")]
    InfiniteMean { a: f64, k: f64 },

    #[error("invalid environment: {0}")]
    Validation(String),

    #[error("invariant violated at t = {t}, a = {a}: {detail}")]
    Invariant { t: usize, a: f64, detail: String },

    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("no table entry for t = {t}, a = {a}")]
    Lookup { t: usize, a: f64 },

    #[error("simulation failed at t = {t} (a = {a}, b = {b}): {source}")]
    Simulation {
        t: usize,
        a: f64,
        b: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
