//! Unambiguous discrimination between two known non-orthogonal qubit states.
//!
//! A conclusive answer is allowed to be rare but never wrong: the POVM
//! elements for "u" and "v" are built on the orthogonal complements of the
//! *other* state, so a misidentification has Born probability exactly zero.
//! The price is a third, inconclusive outcome. With equal priors the
//! conclusive probability of the optimal construction is `1 − s`, where
//! `s = |⟨u|v⟩|` — this is the engine that powers conclusive teleportation.

use num_complex::Complex64;
use rand::Rng;

use crate::measure::{sample_index, validate_povm, Povm};
use crate::qcore::{Operator, StateVector};
use crate::tol;
use crate::{Error, Result};

/// Overlaps above this are refused: the POVM would still be valid but the
/// conclusive rate terms degrade to noise.
const MAX_USABLE_OVERLAP: f64 = 1.0 - 1e-6;

/// Result of one discrimination attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsdOutcome {
    U,
    V,
    Inconclusive,
}

impl UsdOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            UsdOutcome::U => "u",
            UsdOutcome::V => "v",
            UsdOutcome::Inconclusive => "inconclusive",
        }
    }
}

/// A prepared discriminator for one pair of qubit states.
#[derive(Debug, Clone)]
pub struct UsdSetup {
    /// First hypothesis state.
    pub u: StateVector,
    /// Second hypothesis state, phased so that `⟨u|v⟩` is real nonnegative.
    pub v: StateVector,
    /// `s = ⟨u|v⟩` after phase alignment.
    pub overlap: f64,
    /// Elements `E_u`, `E_v`, `E_?` labeled `"u"`, `"v"`, `"inconclusive"`.
    pub povm: Povm,
}

/// Builds the unambiguous-discrimination POVM for two distinct qubit states:
///
/// ```text
/// E_u = |v⊥⟩⟨v⊥| / (1+s),   E_v = |u⊥⟩⟨u⊥| / (1+s),   E_? = I − E_u − E_v
/// ```
///
/// `⟨u|E_v|u⟩ = ⟨v|E_u|v⟩ = 0` by construction, and each input yields a
/// conclusive outcome with probability `1 − s`.
pub fn usd_povm(u: &StateVector, v: &StateVector) -> Result<UsdSetup> {
    if u.dim() != 2 || v.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: u.dim().max(v.dim()),
        });
    }
    let raw = u.inner(v)?;
    let overlap = raw.norm();
    if overlap > MAX_USABLE_OVERLAP {
        return Err(Error::IndistinguishableStates { overlap });
    }
    // rotate v by a unit phase so the overlap becomes real nonnegative
    let v = if overlap > 0.0 {
        let phase = raw.conj() / overlap;
        let amps = v.amplitudes().iter().map(|a| a * phase).collect();
        StateVector::new(amps, v.dims().to_vec(), v.labels().to_vec())?
    } else {
        v.clone()
    };

    let weight = 1.0 / (1.0 + overlap);
    let e_u = Operator::projector(&orthogonal(&v)?).scale(Complex64::new(weight, 0.0));
    let e_v = Operator::projector(&orthogonal(u)?).scale(Complex64::new(weight, 0.0));
    let e_inc = Operator::identity(2).sub(&e_u)?.sub(&e_v)?;
    let povm = Povm::new(vec![e_u, e_v, e_inc], vec!["u", "v", "inconclusive"])?;

    Ok(UsdSetup {
        u: u.clone(),
        v,
        overlap,
        povm,
    })
}

/// `(u₀, u₁) ↦ (−ū₁, ū₀)`, the unique orthogonal qubit ray.
fn orthogonal(state: &StateVector) -> Result<StateVector> {
    StateVector::new(
        vec![-state.amplitude(1).conj(), state.amplitude(0).conj()],
        state.dims().to_vec(),
        state.labels().to_vec(),
    )
}

/// The conclusive-teleportation success probability `1 − (α² − β²)` for a
/// Schmidt-ordered channel; equals `1 − s` for the branch states
/// `(α, ±β)` that the channel feeds the discriminator.
pub fn conclusive_probability(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= beta && beta >= 0.0) {
        return Err(Error::SchmidtOrderViolated { alpha, beta });
    }
    let norm_sq = alpha * alpha + beta * beta;
    if (norm_sq - 1.0).abs() > tol::NORM {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(1.0 - (alpha * alpha - beta * beta))
}

/// Samples one discrimination of `state` (assumed to be `u` or `v` up to a
/// global phase; this is a contract, not a check).
pub fn discriminate<R: Rng + ?Sized>(
    state: &StateVector,
    setup: &UsdSetup,
    rng: &mut R,
) -> Result<UsdOutcome> {
    let probs = born_probabilities(state, setup)?;
    let index = sample_index(&probs, rng)?;
    Ok(match index {
        0 => UsdOutcome::U,
        1 => UsdOutcome::V,
        _ => UsdOutcome::Inconclusive,
    })
}

/// Born probabilities `⟨ψ|E|ψ⟩` for the three outcomes, in POVM order.
pub fn born_probabilities(state: &StateVector, setup: &UsdSetup) -> Result<Vec<f64>> {
    setup
        .povm
        .elements()
        .iter()
        .map(|e| {
            let applied = e.apply(state.amplitudes())?;
            Ok(state
                .amplitudes()
                .iter()
                .zip(&applied)
                .map(|(a, b)| (a.conj() * b).re)
                .sum())
        })
        .collect()
}

/// Misidentification checks for a setup: `⟨u|E_v|u⟩` and `⟨v|E_u|v⟩`.
pub fn misidentification_rates(setup: &UsdSetup) -> Result<(f64, f64)> {
    let u_as_v = born_probabilities(&setup.u, setup)?[1];
    let v_as_u = born_probabilities(&setup.v, setup)?[0];
    Ok((u_as_v, v_as_u))
}

impl UsdSetup {
    /// True when the three elements form a valid POVM and conclusive
    /// answers can never be wrong.
    pub fn is_sound(&self) -> bool {
        if !validate_povm(&self.povm).passes() {
            return false;
        }
        match misidentification_rates(self) {
            Ok((a, b)) => a.abs() <= tol::PROB_FLOOR && b.abs() <= tol::PROB_FLOOR,
            Err(_) => false,
        }
    }
}
