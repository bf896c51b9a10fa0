use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrand is not finite at node {node} (index {index})")]
    SingularIntegrand { node: Complex64, index: usize },

    #[error("weight `{label}` is singular at {point}")]
    SingularPoint { label: String, point: Complex64 },

    #[error("weight `{0}` has zero mass and cannot be normalized")]
    DegenerateWeight(String),

    #[error("c_00 = {0} is neither 0 nor 1, distribution is not weakly multiplicative")]
    NotWeaklyMultiplicative(String),

    #[error("c_00 = 0 but coefficient ({m},{n}) is nonzero; a weakly multiplicative table with c_00 = 0 must vanish")]
    InconsistentTable { m: usize, n: usize },

    #[error(
        "coefficients do not factor: c_({m},{n}) differs from c_({m},0) c_(0,{n}) by {residual:e}"
    )]
    NotRankOne { m: usize, n: usize, residual: f64 },

    #[error("moment table is not rank one (sigma_2 / sigma_1 = {ratio:e}); weight is not a de Branges-Rovnyak weight")]
    NotDbrWeight { ratio: f64 },

    #[error("moment table is not normalized: M[0][0] = {0}")]
    NotNormalized(Complex64),

    #[error("Gram matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    DegenerateNodeSet { min_eigenvalue: f64 },

    #[error("boundary data is not finite at circle node {node} (index {index})")]
    SingularBoundaryData { node: Complex64, index: usize },

    #[error("cannot parse `{token}`: {message}")]
    Parse { token: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
