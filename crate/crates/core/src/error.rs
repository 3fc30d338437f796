use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite sample at i/n = {index}/{degree}: {value}")]
    NonFiniteSample {
        index: usize,
        degree: usize,
        value: f64,
    },

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("derivative order {order} exceeds polynomial degree {degree}")]
    Degree { order: usize, degree: usize },

    #[error("cancellation overflow at degree {degree} in double precision; use Extended")]
    CancellationOverflow { degree: usize },

    #[error("singular term x^{exponent} at the endpoint")]
    Singularity { exponent: f64 },

    #[error(
        "quadrature rule with {nodes} nodes is not exact for degree {degree} (need {required})"
    )]
    TooFewNodes {
        nodes: usize,
        degree: usize,
        required: usize,
    },

    #[error("series did not converge within {terms} terms")]
    Accuracy { terms: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular collocation system")]
    SingularSystem,

    #[error("Newton stagnation after {iterations} iterations (residual {:e})", residuals.last().copied().unwrap_or(f64::NAN))]
    NewtonStagnation {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("undefined EOC: zero error input")]
    UndefinedEoc,
}

pub type Result<T> = std::result::Result<T, Error>;
