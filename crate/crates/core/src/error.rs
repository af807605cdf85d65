use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the documented domain of the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A resolution or stability precondition does not hold. The message
    /// names what would be required instead.
    #[error("precondition refused: {0}")]
    Precondition(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// A strategy left the region its construction guarantees.
    #[error("policy invariant violated at t = {t}: {detail}")]
    PolicyInvariant { t: f64, detail: String },

    /// The solution gradient left the momentum box the scheme was built for.
    #[error("momentum box exceeded: |p_{axis}| = {value} > {limit}")]
    MomentumOverflow { axis: usize, value: f64, limit: f64 },

    #[error("convexity audit failed: worst midpoint violation {0}")]
    NotConvex(f64),

    /// A numerical audit found violations.
    #[error("audit failed: {0}")]
    AuditFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for refusals that the CLI reports with exit code 2.
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Precondition(_) | Error::InvalidArgument(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
