//! Error type shared by all engine modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HmxError>;

/// Engine errors.  `Config` and the domain guards map to CLI exit code 2;
/// check failures are not errors, they are report records.
#[derive(Debug, Error)]
pub enum HmxError {
    /// Invalid configuration or input description.
    #[error("config error: {0}")]
    Config(String),

    /// Jet caps exceeded or differentiation request outside the stored caps.
    #[error("jet cap error: {0}")]
    JetCap(String),

    /// Division by a jet whose constant term is (numerically) zero.
    #[error("jet singularity: {0}")]
    JetSingular(String),

    /// A matrix inversion hit the condition-number guard or a Cholesky
    /// factorization failed.
    #[error("degenerate tensor: {0}")]
    Degenerate(String),

    /// The metric change is evaluated too close to its pole `τ = 1` or at
    /// `β = 0` where `τ` is undefined.
    #[error("change domain error: {0}")]
    ChangeDomain(String),

    /// A hypersurface chart violates the rank or positivity requirements.
    #[error("chart error: {0}")]
    Chart(String),

    /// Report serialization / I/O failure.
    #[error("report error: {0}")]
    Report(String),
}

impl HmxError {
    pub fn config(msg: impl Into<String>) -> Self {
        HmxError::Config(msg.into())
    }
}
