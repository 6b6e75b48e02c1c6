use alloc::boxed::Box;
use alloc::string::String;

/// Errors produced by the numerical laboratory.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("quadrature did not converge: value {value}, error estimate {error_estimate}")]
    NonConvergence { value: f64, error_estimate: f64 },
    #[error("invalid tail descriptor: {0}")]
    InvalidTail(String),
    #[error("series is not a decreasing alternating series: {0}")]
    InvalidSeries(String),
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("argument must be positive, got {0}")]
    NonPositiveX(f64),
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("kernel is not C¹: {0}")]
    NotC1(String),
    #[error("malformed kernel: {0}")]
    Schema(String),
    #[error("weighted norm is not finite: {0}")]
    NonFinite(String),
    #[error("Mellin transform pole hit at s + {power} = 0")]
    PoleHit { power: usize },
    #[error("ζ has a pole at s = 1")]
    PoleAtOne,
    #[error("point outside the admissible region: {0}")]
    OutOfStrip(String),
    #[error("kernel is not a good kernel: {0}")]
    NotGoodKernel(String),
    #[error("degenerate Gram system: {0}")]
    DegenerateSystem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Gram entry {entry}: {cause}")]
    GramEntry { entry: String, cause: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;
