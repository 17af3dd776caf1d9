use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A pair of colliding fit-grid indices `((n_c, n_r), (n_c', n_r'))`.
pub type IndexPair = ((usize, usize), (usize, usize));

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("detuning delta = 0 makes the dispersive coupling singular")]
    SingularDetuning,

    #[error("matrix is not Hermitian (‖H − H†‖ = {deviation:.3e}, ‖H‖ = {norm:.3e})")]
    NotHermitian { deviation: f64, norm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operation requires the symmetric drive k = k' and delta = delta'")]
    NotSymmetric,

    #[error("effective Rabi frequency vanishes for |{n_c},{n_r}>; pulse time is infinite")]
    ZeroRabiFrequency { n_c: usize, n_r: usize },

    #[error("truncation tail population {population:.3e} exceeds {limit:.1e}")]
    Truncation { population: f64, limit: f64 },

    #[error("degenerate design: {} colliding frequency pair(s), first {:?}", pairs.len(), pairs.first())]
    DegenerateFrequencies { pairs: Vec<IndexPair> },

    #[error("degenerate design matrix (condition number {condition:.3e})")]
    DegenerateDesign { condition: f64 },

    #[error("{samples} samples cannot determine {unknowns} unknowns")]
    Underdetermined { samples: usize, unknowns: usize },

    #[error("step halving changed the state by {change:.3e} (tolerance {tolerance:.1e})")]
    NonConvergence { change: f64, tolerance: f64 },

    #[error("signal record, line {line}: {message}")]
    RecordFormat { line: usize, message: String },
}
