use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by state construction, measurement, and the protocols.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("amplitude vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is not normalized: Σ|amplitude|² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("unknown subsystem label {0:?}")]
    UnknownLabel(String),

    #[error("duplicate subsystem label {0:?}")]
    DuplicateLabel(String),

    #[error("operator is not Hermitian: max |M − M†| = {residual}")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue = {min_eigenvalue}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("matrix has trace {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("expected a bipartite state, got {subsystems} subsystems")]
    NotBipartite { subsystems: usize },

    #[error("invalid projective measurement: {0}")]
    InvalidProjectiveMeasurement(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("all outcome probabilities fall below {floor}; measurement is corrupt")]
    CorruptMeasurement { floor: f64 },

    #[error("states overlap too strongly for conclusive discrimination: |⟨u|v⟩| = {overlap}")]
    IndistinguishableStates { overlap: f64 },

    #[error("Schmidt ordering violated: alpha = {alpha} must be ≥ beta = {beta} ≥ 0")]
    SchmidtOrderViolated { alpha: f64, beta: f64 },

    #[error("channel is a product state (beta = 0); a conclusive outcome can never occur")]
    ProductChannel,

    #[error(
        "the singlet-only one-bit variant certifies exact delivery only on a maximally \
         entangled channel; got alpha² = {alpha_sq}"
    )]
    NotMaximallyEntangled { alpha_sq: f64 },

    #[error("unknown outcome label {0:?}")]
    UnknownOutcome(String),
}
