use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table size {requested} exceeds the supported capacity {limit}")]
    Capacity { requested: u64, limit: u64 },

    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    InvalidDimension(u8),

    #[error("radius squared {needed} lies outside the table (max_n = {max_n})")]
    OutOfTable { needed: u64, max_n: u64 },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("odd index j = {0}: the constant vanishes identically and is never materialized")]
    OddIndex(u32),

    #[error("floating-point budget {budget:e} exceeds the requested tolerance {tol:e}")]
    ToleranceNotMet { budget: f64, tol: f64 },

    #[error("precision target {0:e} is below what double precision can certify")]
    UnreachableTarget(f64),

    #[error("moment system is singular after {attempts} placements")]
    SingularMoments { attempts: usize },

    #[error("singular-support proximity: tau = {tau} is within {distance:.3e} of 2*pi*sqrt({n})")]
    SingularSupport { tau: f64, n: u64, distance: f64 },

    #[error("smeared series tail is not decreasing at N = {n_terms}; partial sums at N/4, N/2, N: {partial_sums:?}")]
    NonConvergentTail { n_terms: u64, partial_sums: [f64; 3] },

    #[error("could not parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("figure cross-check failed at lambda = {lambda}: |{exact:e} - {series:e}| > {bound:e}")]
    FigureCrossCheck {
        lambda: u64,
        exact: f64,
        series: f64,
        bound: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
