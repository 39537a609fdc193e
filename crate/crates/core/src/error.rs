use thiserror::Error;

/// Errors raised by the perturbation engine and its verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("degenerate spectrum: min gap {min_gap:e} below threshold {threshold:e}")]
    DegenerateSpectrum { min_gap: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("hierarchy inconsistent at order {order}: diagonal defect {defect:e}")]
    ConsistencyFailure { order: usize, defect: f64 },

    #[error("generator series solved to order {available}, need {required}")]
    InsufficientOrder { required: usize, available: usize },

    #[error("no matrix assigned to symbol P{0}")]
    MissingSymbol(usize),

    #[error("expected polynomial degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("eigenvalue pairing ambiguous at q = {q:e} (state {state}, margin {margin:.3})")]
    PairingAmbiguous { q: f64, state: usize, margin: f64 },

    #[error("residuals below {floor:e} over the window; slope not measurable")]
    ResidualUnderflow { floor: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
