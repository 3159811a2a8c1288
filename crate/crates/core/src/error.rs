use thiserror::Error;

/// Errors raised by the kinematics, Jacobian, estimator and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} lies outside [{min}, {max}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The two boundary curves bend to (almost) the same angle, so the
    /// interpolation variable cannot be recovered from a bending angle.
    #[error("degenerate homotopy: boundary bending angles differ by {separation:e} rad")]
    DegenerateHomotopy { separation: f64 },

    #[error(
        "{which} covariance is not positive semi-definite (min eigenvalue {min_eigenvalue:e})"
    )]
    NotPositiveSemiDefinite {
        which: &'static str,
        min_eigenvalue: f64,
    },

    #[error("{filter} filter: innovation covariance is not invertible")]
    SingularInnovation { filter: &'static str },

    #[error("filter diverged at tick {tick}: non-finite estimate")]
    Divergence { tick: u64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("zero denominator in process input: measured bending extremes coincide")]
    ZeroInputDenominator,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("schema error at row {row}: {message}")]
    Schema { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
