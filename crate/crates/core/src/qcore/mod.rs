//! Exact complex linear algebra and quantum-state primitives for local
//! dimension 2 and joint dimensions up to 8.
//!
//! Index convention used throughout the crate: tensor factor order is the
//! label order, and the leftmost factor is the most significant index. For a
//! two-qubit state with labels `["1", "2"]` the amplitude at flat index
//! `i = 2·i₁ + i₂` belongs to the basis ket `|i₁⟩|i₂⟩`.

mod linalg;
mod operator;
mod schmidt;
mod state;

pub use linalg::{from_eigenpairs, hermitian_eig, psd_sqrt};
pub use operator::{partial_trace, DensityMatrix, Operator};
pub use schmidt::{schmidt_decompose, SchmidtForm};
pub use state::{equal_up_to_global_phase, fidelity, StateVector};
