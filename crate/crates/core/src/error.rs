use thiserror::Error;

/// Errors produced by the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("fields live on different grids (n={left} vs n={right})")]
    GridMismatch { left: usize, right: usize },

    #[error("mean {mean:.3e} exceeds zero-average tolerance {tol:.3e}")]
    NonzeroMean { mean: f64, tol: f64 },

    #[error("truncation order must be 1, 3 or 5, got {0}")]
    BadTruncationOrder(u32),

    #[error("fixed-point iteration did not converge in {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("quadrature would need {nodes} nodes (cap {cap}); use a coarser grid or a smaller horizon")]
    QuadratureTooLong { nodes: usize, cap: usize },

    #[error("wrong profile kind: expected {expected}")]
    WrongProfileKind { expected: &'static str },

    #[error("time mismatch: {0}")]
    TimeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config syntax error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("need at least {needed} distinct values, got {got}")]
    DegenerateFit { needed: usize, got: usize },

    #[error("missing post-collision peaks in track")]
    MissingPeaks,

    #[error("solver failure at eps={eps}: {source}")]
    AtEps {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
