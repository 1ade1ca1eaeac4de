use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Fock cutoffs below 2 cannot hold even a qubit's worth of structure.
    #[error("Fock dimension must be at least 2, got {0}")]
    BadDimension(usize),

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    /// Channel parameter sits at a degenerate point (eta in {0,1} or kappa = 1)
    /// where the requested formula is not defined.
    #[error("degenerate channel parameter: {0}")]
    DegenerateParameter(String),

    /// The matrix fails a density-matrix invariant beyond tolerance.
    #[error("not a density matrix: {0}")]
    NotAState(String),

    /// Accumulated truncation loss grew past the configured cap.
    #[error("trace deficit {deficit:.3e} exceeds cap {cap:.3e}")]
    TruncationExceeded { deficit: f64, cap: f64 },

    /// LAPACK signalled a failure (info != 0).
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("root search failed: {0}")]
    RootSearch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
