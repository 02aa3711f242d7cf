use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid degree {0}: must be at least 1")]
    InvalidDegree(usize),
    #[error("Kostlan variances overflow f64 at degree {0}")]
    VarianceOverflow(usize),
    #[error("non-finite input")]
    NonFinite,
    #[error("conditioning point has vanishing kernel G(z, z̄)")]
    DegenerateConditioning,
    #[error("negative square-root argument {value:e} at t = {t}")]
    NumericalInconsistency { t: f64, value: f64 },
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
    #[error("zero polynomial has no well-defined roots")]
    ZeroPolynomial,
    #[error("point outside the admissible domain of the model")]
    Inadmissible,
    #[error("e^-K = {0:e} is not positive")]
    NonPositiveVolume(f64),
    #[error("not a critical point: |D s| = {residual:e} exceeds {bound:e}")]
    NotCritical { residual: f64, bound: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("region is not inside the fundamental domain |Re τ| <= 1/2, |τ| >= 1")]
    OutsideFundamentalDomain,
    #[error("invalid region: {0}")]
    InvalidRegion(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
}
