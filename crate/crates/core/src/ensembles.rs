//! Generating ρ-ensembles at a distance.
//!
//! When Alice and Bob share a pure entangled state, any measurement Alice
//! performs on her half leaves Bob holding one state out of a specific
//! pure-state decomposition of his reduced density matrix ρ — and her choice
//! of measurement selects *which* decomposition. All decompositions mix to
//! the same ρ, so Bob can tell nothing until Alice's classical message
//! arrives; with the message, he knows exactly which member he holds.
//!
//! This module computes those conditional states and probabilities, and
//! carries the two cryptographic warm-ups: remotely preparing the two-state
//! (B92-style) ensemble, and switching a singlet between the z and x
//! ensembles (the BB84/EPR picture).

use num_complex::Complex64;

use crate::measure::{outcome_distribution, Povm};
use crate::qcore::{partial_trace, DensityMatrix, Operator, StateVector};
use crate::tol;
use crate::{Error, Result};

/// Bob's conditional state for one of Alice's outcomes.
///
/// Rank-1 POVM elements on a pure shared state condition Bob onto a pure
/// state; higher-rank elements leave him a mixed one. Outcomes whose
/// probability is numerically zero keep their slot with a `Null` marker so
/// transcript indexing stays stable.
#[derive(Debug, Clone)]
pub enum ConditionalState {
    Pure(StateVector),
    Mixed(DensityMatrix),
    Null,
}

impl ConditionalState {
    pub fn as_pure(&self) -> Option<&StateVector> {
        match self {
            ConditionalState::Pure(s) => Some(s),
            _ => None,
        }
    }

    /// Density-matrix view of the member (`None` for null slots).
    pub fn density(&self) -> Option<DensityMatrix> {
        match self {
            ConditionalState::Pure(s) => Some(DensityMatrix::from_pure(s)),
            ConditionalState::Mixed(d) => Some(d.clone()),
            ConditionalState::Null => None,
        }
    }
}

/// One ensemble member: an outcome label, its probability, and Bob's state.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub label: String,
    pub probability: f64,
    pub state: ConditionalState,
}

/// A ρ-ensemble: weighted states that mix to a declared target ρ.
#[derive(Debug, Clone)]
pub struct RhoEnsemble {
    pub members: Vec<EnsembleMember>,
    /// The density matrix the mixture must reproduce (Bob's reduced state).
    pub target: DensityMatrix,
}

impl RhoEnsemble {
    /// Largest entrywise deviation of `Σ pⱼ ρⱼ` from the declared target.
    pub fn mixture_residual(&self) -> Result<f64> {
        let mixed = ensemble_density(self)?;
        mixed.op().max_abs_diff(self.target.op())
    }

    /// Checks probabilities, member normalization and the mixture identity.
    pub fn is_valid(&self) -> bool {
        let total: f64 = self.members.iter().map(|m| m.probability).sum();
        if (total - 1.0).abs() > tol::COMPLETENESS {
            return false;
        }
        if self
            .members
            .iter()
            .any(|m| m.probability < -tol::PROB_FLOOR)
        {
            return false;
        }
        self.mixture_residual()
            .map(|r| r <= tol::RECONSTRUCTION)
            .unwrap_or(false)
    }
}

/// `Σⱼ pⱼ |ψⱼ⟩⟨ψⱼ|` (projectors replaced by the member matrices for mixed
/// members), validated as a density matrix.
pub fn ensemble_density(ensemble: &RhoEnsemble) -> Result<DensityMatrix> {
    let dim = ensemble.target.dim();
    let mut sum = Operator::zeros(dim);
    for member in &ensemble.members {
        if let Some(rho) = member.state.density() {
            sum = sum.add(&rho.op().scale(Complex64::new(member.probability, 0.0)))?;
        }
    }
    DensityMatrix::new(sum)
}

/// Applies Alice's POVM to her half of a bipartite pure state and returns
/// the ensemble it forces in Bob's hands.
///
/// For outcome `i`: `pᵢ = ⟨Ψ|(Aᵢ⊗I)|Ψ⟩`, and Bob's conditional state is the
/// normalized partial contraction of `(Aᵢ⊗I)|Ψ⟩⟨Ψ|` over Alice. The
/// declared target is Bob's reduced state, so `ensemble.is_valid()` is
/// exactly the consistency statement of remote ensemble generation.
pub fn generate_at_distance(shared: &StateVector, alice_povm: &Povm) -> Result<RhoEnsemble> {
    if shared.subsystem_count() != 2 {
        return Err(Error::NotBipartite {
            subsystems: shared.subsystem_count(),
        });
    }
    let d_alice = shared.dims()[0];
    let d_bob = shared.dims()[1];
    if alice_povm.dim() != d_alice {
        return Err(Error::DimensionMismatch {
            expected: d_alice,
            actual: alice_povm.dim(),
        });
    }
    let alice_label = shared.labels()[0].clone();
    let bob_label = shared.labels()[1].clone();

    let probabilities = outcome_distribution(shared, alice_povm, &[&alice_label])?;
    let mut members = Vec::with_capacity(alice_povm.len());
    for ((element, label), &probability) in alice_povm
        .elements()
        .iter()
        .zip(alice_povm.labels())
        .zip(&probabilities)
    {
        let state = if probability < tol::PROB_FLOOR {
            ConditionalState::Null
        } else {
            conditional_state(shared, element, d_alice, d_bob, &bob_label)?
        };
        members.push(EnsembleMember {
            label: label.clone(),
            probability: probability.max(0.0),
            state,
        });
    }

    let rho = DensityMatrix::from_pure(shared);
    let target = partial_trace(&rho, shared.dims(), shared.labels(), &[&bob_label])?;
    Ok(RhoEnsemble { members, target })
}

/// Bob's normalized conditional state given Alice's effect `A`:
/// `Tr_Alice[(A⊗I)|Ψ⟩⟨Ψ|] / p`. Reported pure whenever it numerically is.
fn conditional_state(
    shared: &StateVector,
    effect: &Operator,
    d_alice: usize,
    d_bob: usize,
    bob_label: &str,
) -> Result<ConditionalState> {
    // M[j][l] = Σ_{i,k} A[i][k] Ψ[k,j] conj(Ψ[i,l])
    let amp = |i: usize, j: usize| shared.amplitude(i * d_bob + j);
    let mut cond = Operator::zeros(d_bob);
    for j in 0..d_bob {
        for l in 0..d_bob {
            let mut sum = Complex64::ZERO;
            for i in 0..d_alice {
                for k in 0..d_alice {
                    sum += effect.get(i, k) * amp(k, j) * amp(i, l).conj();
                }
            }
            cond.set(j, l, sum);
        }
    }
    let rho = DensityMatrix::from_unnormalized(cond)?;
    if rho.purity() >= 1.0 - tol::PSD {
        let pure = rho.dominant_eigenvector();
        let pure = pure.relabel(vec![bob_label.to_string()])?.canonical_phase();
        Ok(ConditionalState::Pure(pure))
    } else {
        Ok(ConditionalState::Mixed(rho))
    }
}

/// The remote two-state preparation: builds `α|↑ₓ↑ₓ⟩ + β|↓ₓ↓ₓ⟩` (expressed
/// in the z basis via `|↑ₓ⟩ = (|↑⟩+|↓⟩)/√2`, `|↓ₓ⟩ = (|↑⟩−|↓⟩)/√2`), lets
/// Alice measure her half along z, and returns Bob's ensemble
///
/// ```text
/// ((α+β)/√2, (α−β)/√2)   and   ((α−β)/√2, (α+β)/√2),
/// ```
///
/// each with probability ½ — two non-orthogonal signal states prepared
/// without ever sending them.
pub fn b92_demo(alpha: f64, beta: f64) -> Result<RhoEnsemble> {
    if (alpha * alpha + beta * beta - 1.0).abs() > tol::NORM {
        return Err(Error::NotNormalized {
            norm_sq: alpha * alpha + beta * beta,
        });
    }
    // α|↑ₓ↑ₓ⟩ + β|↓ₓ↓ₓ⟩ in the z basis: ½[(α+β), (α−β), (α−β), (α+β)]
    let p = 0.5 * (alpha + beta);
    let m = 0.5 * (alpha - beta);
    let shared = StateVector::from_amplitudes(
        vec![
            Complex64::new(p, 0.0),
            Complex64::new(m, 0.0),
            Complex64::new(m, 0.0),
            Complex64::new(p, 0.0),
        ],
        vec![2, 2],
    )?;
    generate_at_distance(&shared, &z_basis_povm())
}

/// The z measurement as a two-outcome POVM (projectors onto |↑⟩ and |↓⟩).
pub fn z_basis_povm() -> Povm {
    Povm::new(
        vec![
            Operator::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]),
            Operator::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]),
        ],
        vec!["up", "down"],
    )
    .expect("two 2x2 elements")
}

/// The x measurement as a two-outcome POVM (projectors onto |↑ₓ⟩ and |↓ₓ⟩).
pub fn x_basis_povm() -> Povm {
    Povm::new(
        vec![
            Operator::projector(&StateVector::x_up()),
            Operator::projector(&StateVector::x_down()),
        ],
        vec!["up_x", "down_x"],
    )
    .expect("two 2x2 elements")
}

/// Basis choice for [`epr_basis_choice_demo`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementBasis {
    Z,
    X,
}

/// Alice measures her half of a singlet along z or along x, forcing either
/// the {|↓⟩, |↑⟩} or the {|↓ₓ⟩, |↑ₓ⟩} ensemble in Bob's hands. The two
/// ensembles mix to the same ½·I and are indistinguishable without Alice's
/// message — the EPR/BB84 mechanism.
pub fn epr_basis_choice_demo(basis: MeasurementBasis) -> Result<RhoEnsemble> {
    let povm = match basis {
        MeasurementBasis::Z => z_basis_povm(),
        MeasurementBasis::X => x_basis_povm(),
    };
    generate_at_distance(&StateVector::singlet(), &povm)
}

/// Probabilities of the ensemble members, in outcome order.
pub fn member_probabilities(ensemble: &RhoEnsemble) -> Vec<f64> {
    ensemble.members.iter().map(|m| m.probability).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::telepovm_elements;
    use crate::qcore::{equal_up_to_global_phase, fidelity};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pure_members(e: &RhoEnsemble) -> Vec<StateVector> {
        e.members
            .iter()
            .map(|m| m.state.as_pure().expect("pure member").clone())
            .collect()
    }

    #[test]
    fn single_member_density_is_projector() {
        let psi = StateVector::qubit(c(0.6), c(0.8)).unwrap();
        let ensemble = RhoEnsemble {
            members: vec![EnsembleMember {
                label: "only".into(),
                probability: 1.0,
                state: ConditionalState::Pure(psi.clone()),
            }],
            target: DensityMatrix::from_pure(&psi),
        };
        assert!(ensemble.is_valid());
        let rho = ensemble_density(&ensemble).unwrap();
        assert!(
            rho.op()
                .max_abs_diff(DensityMatrix::from_pure(&psi).op())
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn equal_mixture_of_basis_states_is_maximally_mixed() {
        let up = StateVector::qubit(c(1.0), c(0.0)).unwrap();
        let down = StateVector::qubit(c(0.0), c(1.0)).unwrap();
        let target = DensityMatrix::new(Operator::from_real(&[&[0.5, 0.0], &[0.0, 0.5]])).unwrap();
        let ensemble = RhoEnsemble {
            members: vec![
                EnsembleMember {
                    label: "up".into(),
                    probability: 0.5,
                    state: ConditionalState::Pure(up),
                },
                EnsembleMember {
                    label: "down".into(),
                    probability: 0.5,
                    state: ConditionalState::Pure(down),
                },
            ],
            target,
        };
        assert!(ensemble.is_valid());
    }

    #[test]
    fn singlet_with_telepovm_gives_four_equiprobable_rotated_states() {
        let theta: f64 = 0.9;
        let (s, co) = (theta.sin(), theta.cos());
        let expected = [
            StateVector::qubit(c(s), c(-co)).unwrap(),
            StateVector::qubit(c(s), c(co)).unwrap(),
            StateVector::qubit(c(co), c(-s)).unwrap(),
            StateVector::qubit(c(co), c(s)).unwrap(),
        ];
        let ensemble =
            generate_at_distance(&StateVector::singlet(), &telepovm_elements(theta)).unwrap();
        assert!(ensemble.is_valid());
        for (member, want) in ensemble.members.iter().zip(&expected) {
            assert!((member.probability - 0.25).abs() < 1e-12);
            let got = member.state.as_pure().unwrap();
            assert!(
                equal_up_to_global_phase(got, want, 1e-10).unwrap(),
                "expected {want:?}, got {got:?}"
            );
        }
    }

    #[test]
    fn singlet_z_measurement_anticorrelates() {
        let ensemble = generate_at_distance(&StateVector::singlet(), &z_basis_povm()).unwrap();
        let members = pure_members(&ensemble);
        let down = StateVector::qubit(c(0.0), c(1.0)).unwrap();
        let up = StateVector::qubit(c(1.0), c(0.0)).unwrap();
        assert!((ensemble.members[0].probability - 0.5).abs() < 1e-12);
        assert!((ensemble.members[1].probability - 0.5).abs() < 1e-12);
        assert!(fidelity(&members[0], &down).unwrap() > 1.0 - 1e-12);
        assert!(fidelity(&members[1], &up).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn b92_members_match_remote_preparation_targets() {
        let (alpha, beta) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let ensemble = b92_demo(alpha, beta).unwrap();
        assert!(ensemble.is_valid());
        let members = pure_members(&ensemble);
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let first = StateVector::qubit(c((alpha + beta) * inv), c((alpha - beta) * inv)).unwrap();
        let second = StateVector::qubit(c((alpha - beta) * inv), c((alpha + beta) * inv)).unwrap();
        assert!(equal_up_to_global_phase(&members[0], &first, 1e-10).unwrap());
        assert!(equal_up_to_global_phase(&members[1], &second, 1e-10).unwrap());
        // overlap of the two signal states is α² − β²
        let overlap = members[0].inner(&members[1]).unwrap().norm();
        assert!((overlap - 0.6).abs() < 1e-12);
    }

    #[test]
    fn b92_degenerate_cases() {
        // β = 0: both members collapse to (1,1)/√2.
        let ensemble = b92_demo(1.0, 0.0).unwrap();
        let members = pure_members(&ensemble);
        let plus = StateVector::x_up();
        assert!(equal_up_to_global_phase(&members[0], &plus, 1e-10).unwrap());
        assert!(equal_up_to_global_phase(&members[1], &plus, 1e-10).unwrap());
        // α = β: the members are the basis states.
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let ensemble = b92_demo(inv, inv).unwrap();
        let members = pure_members(&ensemble);
        let up = StateVector::qubit(c(1.0), c(0.0)).unwrap();
        let down = StateVector::qubit(c(0.0), c(1.0)).unwrap();
        assert!(equal_up_to_global_phase(&members[0], &up, 1e-10).unwrap());
        assert!(equal_up_to_global_phase(&members[1], &down, 1e-10).unwrap());
    }

    #[test]
    fn b92_rejects_unnormalized_parameters() {
        assert!(matches!(
            b92_demo(1.0, 0.5),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn zero_probability_outcomes_keep_their_slot() {
        // Product input |↑↑⟩: Alice's z measurement can never yield "down",
        // but the outcome keeps its index with a null marker.
        let shared = StateVector::basis_state(vec![2, 2], 0).unwrap();
        let ensemble = generate_at_distance(&shared, &z_basis_povm()).unwrap();
        assert_eq!(ensemble.members.len(), 2);
        assert_eq!(ensemble.members[1].label, "down");
        assert_eq!(ensemble.members[1].probability, 0.0);
        assert!(matches!(ensemble.members[1].state, ConditionalState::Null));
        assert!(ensemble.is_valid());
    }

    #[test]
    fn basis_choice_forces_different_ensembles_with_identical_density() {
        let z = epr_basis_choice_demo(MeasurementBasis::Z).unwrap();
        let x = epr_basis_choice_demo(MeasurementBasis::X).unwrap();
        assert!(z.is_valid());
        assert!(x.is_valid());
        let half = Operator::from_real(&[&[0.5, 0.0], &[0.0, 0.5]]);
        assert!(
            ensemble_density(&z)
                .unwrap()
                .op()
                .max_abs_diff(&half)
                .unwrap()
                < 1e-12
        );
        assert!(
            ensemble_density(&x)
                .unwrap()
                .op()
                .max_abs_diff(&half)
                .unwrap()
                < 1e-12
        );
        let rho_z = ensemble_density(&z).unwrap();
        let rho_x = ensemble_density(&x).unwrap();
        assert!(rho_z.op().max_abs_diff(rho_x.op()).unwrap() < 1e-12);
        // but the members themselves differ: z gives |↓⟩ first, x gives |↓ₓ⟩
        let z_first = z.members[0].state.as_pure().unwrap().clone();
        let x_first = x.members[0].state.as_pure().unwrap().clone();
        let down = StateVector::qubit(c(0.0), c(1.0)).unwrap();
        assert!(equal_up_to_global_phase(&z_first, &down, 1e-10).unwrap());
        assert!(equal_up_to_global_phase(&x_first, &StateVector::x_down(), 1e-10).unwrap());
    }
}
