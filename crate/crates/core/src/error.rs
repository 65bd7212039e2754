use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} is outside its domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("zeta has a pole at s = 1")]
    Pole,

    #[error("requested tolerance {tol:e} not reached at s = {sigma} + {t}i (best bound {best:e})")]
    PrecisionUnreachable { sigma: f64, t: f64, tol: f64, best: f64 },

    #[error("table limit {limit} exceeds the memory budget of {budget} entries")]
    Resource { limit: usize, budget: usize },

    #[error("divisor table covers n <= {limit}, but n = {needed} was requested")]
    TableTooSmall { limit: usize, needed: usize },

    #[error("divisor table has order {have}, expected {want}")]
    TableOrder { have: f64, want: f64 },

    #[error("series did not reach relative tolerance {rel_tol:e} within {budget} (best {best:e})")]
    ConvergenceBudget { rel_tol: f64, budget: usize, best: f64 },

    #[error("cannot factor {n} with primes up to {bound}")]
    FactorizationBudget { n: u64, bound: u64 },

    #[error("grid solve for nu = {nu}, tau = {tau} did not converge (residual {residual:e})")]
    NoConvergence { nu: i64, tau: f64, residual: f64 },

    #[error("intervals {index} and {next} overlap by {overlap:e}")]
    Overlap { index: usize, next: usize, overlap: f64 },

    #[error("ratio mode needs m > n, got m = {m}, n = {n}")]
    ArgumentOrder { m: u64, n: u64 },

    #[error("quadrature did not converge: order doubling changed the integral by {rel_change:e} (relative)")]
    Quadrature { rel_change: f64 },

    #[error("parameter regime: {0}")]
    Regime(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { what, detail: detail.into() }
}
