use num_complex::Complex64;

use super::linalg::hermitian_eig;
use super::operator::Operator;
use super::state::StateVector;
use crate::tol;
use crate::{Error, Result};

/// Schmidt form of a bipartite pure state: `Σᵢ cᵢ |aᵢ⟩|bᵢ⟩` with real
/// nonnegative coefficients sorted descending and orthonormal local bases.
///
/// Phases are absorbed into the Bob basis vectors so that the coefficients
/// are directly comparable with channel parameters (α, β).
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub alice_basis: Vec<StateVector>,
    pub bob_basis: Vec<StateVector>,
}

impl SchmidtForm {
    /// `Σᵢ cᵢ |aᵢ⟩⊗|bᵢ⟩`, with the original subsystem labels.
    pub fn reconstruct(&self) -> Result<StateVector> {
        let da = self.alice_basis[0].dim();
        let db = self.bob_basis[0].dim();
        let mut amplitudes = vec![Complex64::ZERO; da * db];
        for ((ci, a), b) in self
            .coefficients
            .iter()
            .zip(&self.alice_basis)
            .zip(&self.bob_basis)
        {
            for j in 0..da {
                for k in 0..db {
                    amplitudes[j * db + k] += ci * a.amplitude(j) * b.amplitude(k);
                }
            }
        }
        let dims = vec![da, db];
        let labels = vec![
            self.alice_basis[0].labels()[0].clone(),
            self.bob_basis[0].labels()[0].clone(),
        ];
        StateVector::new(amplitudes, dims, labels)
    }
}

/// Schmidt-decomposes a two-qubit pure state.
///
/// Route: eigendecompose the 2×2 Gram matrix `MM†` of the coefficient
/// matrix `M[j][k] = ⟨jk|ψ⟩`; its eigenvalues are the squared coefficients
/// and its eigenvectors the Alice basis. Bob vectors follow by contraction,
/// `bᵢ ∝ (uᵢ† M)ᵀ`, which automatically absorbs all phases.
pub fn schmidt_decompose(psi: &StateVector) -> Result<SchmidtForm> {
    if psi.subsystem_count() != 2 {
        return Err(Error::NotBipartite {
            subsystems: psi.subsystem_count(),
        });
    }
    let da = psi.dims()[0];
    let db = psi.dims()[1];
    let alice_label = psi.labels()[0].clone();
    let bob_label = psi.labels()[1].clone();

    // Gram matrix on Alice's side: (MM†)[j][l] = Σ_k M[j][k] conj(M[l][k]).
    let m = |j: usize, k: usize| psi.amplitude(j * db + k);
    let gram = Operator::from_fn(da, |j, l| (0..db).map(|k| m(j, k) * m(l, k).conj()).sum());
    let (sq, alice_vecs) = hermitian_eig(&gram)?;

    let mut coefficients = Vec::with_capacity(da);
    let mut alice_basis = Vec::with_capacity(da);
    let mut bob_basis = Vec::with_capacity(da);

    for (i, lambda) in sq.iter().enumerate() {
        let c = lambda.max(0.0).sqrt();
        coefficients.push(c);
        let u = &alice_vecs[i];
        alice_basis.push(
            StateVector::normalized(u.clone(), vec![da], vec![alice_label.clone()])
                .expect("eigenvectors are unit vectors"),
        );
        // bᵢ[k] = Σ_j conj(uᵢ[j]) M[j][k] / cᵢ
        let contracted: Vec<Complex64> = (0..db)
            .map(|k| (0..da).map(|j| u[j].conj() * m(j, k)).sum())
            .collect();
        let bob = StateVector::normalized(contracted, vec![db], vec![bob_label.clone()]);
        bob_basis.push(bob);
    }

    // Zero-coefficient slots carry no Bob vector from the contraction; fill
    // them with the orthogonal complement so the basis stays orthonormal.
    let filled: Vec<StateVector> = bob_basis
        .iter()
        .enumerate()
        .map(|(i, b)| match b {
            Some(state) => state.clone(),
            None => {
                let other = bob_basis
                    .iter()
                    .flatten()
                    .next()
                    .expect("a normalized state has at least one nonzero coefficient");
                orthogonal_qubit(other, &bob_label)
                    .unwrap_or_else(|| panic!("no complement for slot {i}"))
            }
        })
        .collect();

    Ok(SchmidtForm {
        coefficients,
        alice_basis,
        bob_basis: filled,
    })
}

/// The state orthogonal to a single-qubit state: `(u₀, u₁) ↦ (−ū₁, ū₀)`.
fn orthogonal_qubit(state: &StateVector, label: &str) -> Option<StateVector> {
    if state.dim() != 2 {
        return None;
    }
    StateVector::normalized(
        vec![-state.amplitude(1).conj(), state.amplitude(0).conj()],
        vec![2],
        vec![label.to_string()],
    )
}

impl SchmidtForm {
    /// Checks the Schmidt-form invariants against the state it came from:
    /// unit coefficient norm, descending order, orthonormal bases, and
    /// reconstruction up to a global phase within [`tol::RECONSTRUCTION`].
    pub fn verify_against(&self, original: &StateVector) -> bool {
        let sum_sq: f64 = self.coefficients.iter().map(|c| c * c).sum();
        if (sum_sq - 1.0).abs() > tol::NORM * 10.0 {
            return false;
        }
        if self.coefficients.windows(2).any(|w| w[0] < w[1]) {
            return false;
        }
        for basis in [&self.alice_basis, &self.bob_basis] {
            for i in 0..basis.len() {
                for j in 0..basis.len() {
                    let dot = basis[i].inner(&basis[j]).unwrap().norm();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    if (dot - expect).abs() > 1e-10 {
                        return false;
                    }
                }
            }
        }
        let rebuilt = match self.reconstruct() {
            Ok(s) => s,
            Err(_) => return false,
        };
        super::state::fidelity(&rebuilt, original)
            .map(|f| f >= 1.0 - tol::RECONSTRUCTION)
            .unwrap_or(false)
    }
}
