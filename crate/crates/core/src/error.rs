use thiserror::Error;

use crate::solver::SolveReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty sample set for {0}")]
    EmptySamples(&'static str),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("quadrature stalled: exterior shells stopped contracting after {shells} shells (ratio {ratio})")]
    QuadratureStall { shells: usize, ratio: f64 },

    #[error("resolution rule violated: grid spacing h = {h} exceeds eps = {eps}")]
    Resolution { h: f64, eps: f64 },

    #[error("scale separation violated: eps = {eps} must be at most delta/8 = {limit}")]
    ScaleSeparation { eps: f64, limit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("coincident points: the effective kernel is undefined at x = y")]
    CoincidentPoints,

    #[error("convolution fast path needs a constant coefficient on a uniform stencil: {0}")]
    InapplicableStructure(String),

    #[error("resolvent mass m must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("solver did not converge within {} iterations (relative residual {:.3e})", .0.iterations, .0.rel_residual)]
    NotConverged(Box<SolveReport>),

    #[error("delta = {delta} out of range ({lo}, {hi})")]
    DeltaOutOfRange { delta: f64, lo: f64, hi: f64 },

    #[error("cutoff radius n = {n} must stay below the box half-width R = {half_width}")]
    CutoffOutsideBox { n: f64, half_width: f64 },

    #[error("source support radius {support} exceeds R/4 = {limit}")]
    SourceSupport { support: f64, limit: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
