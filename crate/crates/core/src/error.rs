use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum GabError {
    #[error("unknown window kind `{0}`")]
    UnknownWindowKind(String),
    #[error("window kind `{kind}` requires parameter `{param}`")]
    MissingParameter { kind: String, param: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window length must be at least 2, got {0}")]
    WindowTooShort(usize),
    #[error("signal length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coefficient dimensions mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("{0} must divide the signal length {1}")]
    Divisibility(String, usize),
    #[error("frame operator is singular (lower bound {lower:.3e} below tolerance {tol:.3e})")]
    SingularFrame { lower: f64, tol: f64 },
    #[error("support interval is infeasible: constraint residual {residual:.3e} exceeds {tol:.3e}")]
    InfeasibleSupport { residual: f64, tol: f64 },
    #[error("invalid support interval: {0}")]
    InvalidSupport(String),
    #[error("gauge window must have unit l2 norm, got {0}")]
    GaugeNotNormalized(f64),
    #[error("solver diverged at iteration {iter}: objective is not finite")]
    Divergence { iter: usize },
    #[error("solver did not converge within {max_iter} iterations (relative change {rel_change:.3e})")]
    NonConvergence { max_iter: usize, rel_change: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GabError>;
