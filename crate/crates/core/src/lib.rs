//! Few-qubit quantum measurement simulation built around three ideas:
//!
//! * teleportation re-read as a four-outcome generalized measurement (POVM)
//!   on Alice's half of an entangled pair,
//! * remote preparation of ρ-ensembles: Alice's choice of measurement decides
//!   which pure-state decomposition of Bob's density matrix is realized,
//! * conclusive teleportation over an arbitrary pure entangled channel, which
//!   trades a known failure probability for fidelity exactly one on success.
//!
//! Everything lives in Hilbert spaces of dimension at most 8 (three qubits),
//! so all linear algebra is done exactly, with dense complex matrices and a
//! small Jacobi eigensolver. Measurement sampling is explicit and seedable;
//! every sampling protocol also exposes a deterministic branch enumeration
//! with exact probabilities, which the test suites use as ground truth.

pub mod discrimination;
pub mod ensembles;
mod error;
pub mod measure;
pub mod protocols;
pub mod qcore;
pub mod random;
pub mod rng;

pub use error::{Error, Result};
pub use qcore::{
    equal_up_to_global_phase, fidelity, partial_trace, DensityMatrix, Operator, SchmidtForm,
    StateVector,
};

/// Numerical tolerances shared across the crate.
///
/// All computations here are small and exact up to rounding, so the
/// tolerances are tight: they only have to absorb accumulated f64 error.
pub mod tol {
    /// Allowed deviation of `Σ|amplitude|²` from 1 for stored states.
    pub const NORM: f64 = 1e-12;
    /// Allowed entrywise deviation of `M − M†` for Hermitian matrices.
    pub const HERM: f64 = 1e-12;
    /// Eigenvalues of PSD matrices may undershoot zero by this much.
    pub const PSD: f64 = 1e-10;
    /// Allowed entrywise deviation when a POVM is summed against identity.
    pub const COMPLETENESS: f64 = 1e-10;
    /// Allowed infidelity when a decomposition is reconstructed.
    pub const RECONSTRUCTION: f64 = 1e-10;
    /// Off-diagonal Frobenius norm at which the Jacobi sweep stops.
    pub const JACOBI: f64 = 1e-14;
    /// Outcome probabilities below this are treated as zero (null outcomes).
    pub const PROB_FLOOR: f64 = 1e-12;
}
