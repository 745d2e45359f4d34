//! Projective and generalized measurements.
//!
//! A POVM is an ordered list of Hermitian PSD operators that sum to the
//! identity; outcome `i` occurs with probability `⟨ψ|Aᵢ|ψ⟩`. Any POVM can be
//! realized as a projective measurement on the system plus an ancilla, and
//! [`induced_povm`] recovers the effective POVM from such a joint
//! measurement by contracting each joint projector against the ancilla
//! state:
//!
//! ```text
//! (Aᵢ)ₘₙ = Σᵣₛ (Pᵢ)ₘᵣ,ₙₛ (ρ_aux)ₛᵣ
//! ```
//!
//! with system-major joint indices `(m, r)`. The four-outcome family
//! [`telepovm_elements`] is the measurement that, applied to one half of an
//! entangled pair, steers the other half onto one of four states connected
//! by fixed Pauli rotations — the measurement-theory reading of
//! teleportation.

use num_complex::Complex64;
use rand::Rng;

use crate::qcore::{hermitian_eig, DensityMatrix};
use crate::qcore::{psd_sqrt, Operator, StateVector};
use crate::tol;
use crate::{Error, Result};

/// An ordered list of POVM elements with outcome labels.
///
/// Construction checks only structure (shapes, labels); physical validity is
/// a separate, reportable concern — see [`validate_povm`].
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<Operator>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new<L: Into<String>>(elements: Vec<Operator>, labels: Vec<L>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != elements.len() {
            return Err(Error::LengthMismatch {
                expected: elements.len(),
                actual: labels.len(),
            });
        }
        let dim = elements[0].dim();
        if elements.iter().any(|e| e.dim() != dim) {
            return Err(Error::InvalidPovm("elements differ in dimension".into()));
        }
        Ok(Self { elements, labels })
    }

    /// Numbered labels `"1"`, `"2"`, … in element order.
    pub fn with_numbered_labels(elements: Vec<Operator>) -> Result<Self> {
        let labels: Vec<String> = (1..=elements.len()).map(|i| i.to_string()).collect();
        Self::new(elements, labels)
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Operator {
        &self.elements[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// Per-element and completeness diagnostics for a candidate POVM.
#[derive(Debug, Clone)]
pub struct PovmValidation {
    /// `max |Aᵢ − Aᵢ†|` per element.
    pub hermiticity_residuals: Vec<f64>,
    /// Minimum eigenvalue per element.
    pub min_eigenvalues: Vec<f64>,
    /// `max |Σ Aᵢ − I|` entrywise.
    pub completeness_residual: f64,
}

impl PovmValidation {
    pub fn passes(&self) -> bool {
        self.hermiticity_residuals.iter().all(|&r| r <= tol::HERM)
            && self.min_eigenvalues.iter().all(|&m| m >= -tol::PSD)
            && self.completeness_residual <= tol::COMPLETENESS
    }
}

/// Checks that every element is Hermitian and PSD and that the elements sum
/// to the unit matrix. Failures are reported, not raised.
pub fn validate_povm(povm: &Povm) -> PovmValidation {
    let dim = povm.dim();
    let mut hermiticity_residuals = Vec::with_capacity(povm.len());
    let mut min_eigenvalues = Vec::with_capacity(povm.len());
    let mut sum = Operator::zeros(dim);
    for element in povm.elements() {
        let residual = element.hermiticity_residual();
        hermiticity_residuals.push(residual);
        if residual <= tol::HERM {
            let (vals, _) = hermitian_eig(element).expect("hermiticity just checked");
            min_eigenvalues.push(vals.into_iter().fold(f64::INFINITY, f64::min));
        } else {
            min_eigenvalues.push(f64::NEG_INFINITY);
        }
        sum = sum.add(element).expect("checked equal dims");
    }
    let completeness_residual = sum
        .max_abs_diff(&Operator::identity(dim))
        .expect("same dim");
    PovmValidation {
        hermiticity_residuals,
        min_eigenvalues,
        completeness_residual,
    }
}

/// The four-outcome qubit POVM behind teleportation, with `c ≡ cos θ` and
/// `s ≡ sin θ`:
///
/// ```text
/// A₁ = ½ ( c²  cs )   A₂ = ½ (  c² −cs )
///        ( cs  s² )          ( −cs  s² )
/// A₃ = ½ ( s²  cs )   A₄ = ½ (  s² −cs )
///        ( cs  c² )          ( −cs  c² )
/// ```
///
/// Applied to one member of a singlet pair it prepares, at a distance, one
/// of the four states `(s,−c)`, `(s,c)`, `(c,−s)`, `(c,s)` — each of which a
/// fixed Pauli rotation maps back to `(c,s)` no matter what θ is.
pub fn telepovm_elements(theta: f64) -> Povm {
    let c = theta.cos();
    let s = theta.sin();
    let half = 0.5;
    let element = |d00: f64, off: f64, d11: f64| {
        Operator::from_real(&[&[half * d00, half * off], &[half * off, half * d11]])
    };
    let elements = vec![
        element(c * c, c * s, s * s),
        element(c * c, -c * s, s * s),
        element(s * s, c * s, c * c),
        element(s * s, -c * s, c * c),
    ];
    Povm::new(elements, vec!["A1", "A2", "A3", "A4"]).expect("four 2x2 elements")
}

/// A complete set of orthogonal projectors (a von Neumann measurement).
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    projectors: Vec<Operator>,
    labels: Vec<String>,
}

impl ProjectiveMeasurement {
    /// Validates idempotence, Hermiticity, mutual orthogonality and
    /// completeness, all within `1e-10`.
    pub fn new<L: Into<String>>(projectors: Vec<Operator>, labels: Vec<L>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidProjectiveMeasurement("no projectors".into()));
        }
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != projectors.len() {
            return Err(Error::LengthMismatch {
                expected: projectors.len(),
                actual: labels.len(),
            });
        }
        let dim = projectors[0].dim();
        let mut sum = Operator::zeros(dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::InvalidProjectiveMeasurement(
                    "projectors differ in dimension".into(),
                ));
            }
            if !p.is_hermitian(tol::HERM) {
                return Err(Error::InvalidProjectiveMeasurement(format!(
                    "projector {i} is not Hermitian"
                )));
            }
            let idempotency = p.matmul(p)?.max_abs_diff(p)?;
            if idempotency > 1e-10 {
                return Err(Error::InvalidProjectiveMeasurement(format!(
                    "projector {i} is not idempotent (residual {idempotency:.3e})"
                )));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                let cross = p.matmul(q)?.max_abs_diff(&Operator::zeros(dim))?;
                if cross > 1e-10 {
                    return Err(Error::InvalidProjectiveMeasurement(format!(
                        "projectors {i} and {j} are not orthogonal (residual {cross:.3e})"
                    )));
                }
            }
            sum = sum.add(p)?;
        }
        let completeness = sum.max_abs_diff(&Operator::identity(dim))?;
        if completeness > 1e-10 {
            return Err(Error::InvalidProjectiveMeasurement(format!(
                "projectors do not sum to identity (residual {completeness:.3e})"
            )));
        }
        Ok(Self { projectors, labels })
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }
}

/// Bell-state kets in the fixed order Φ₊, Φ₋, Ψ₊, Ψ₋.
///
/// Every correction table downstream is derived against this ordering.
pub fn bell_states() -> [StateVector; 4] {
    [
        StateVector::phi_plus(),
        StateVector::phi_minus(),
        StateVector::psi_plus(),
        StateVector::psi_minus(),
    ]
}

/// Outcome labels matching [`bell_states`].
pub const BELL_LABELS: [&str; 4] = ["Phi+", "Phi-", "Psi+", "Psi-"];

/// The two-qubit Bell measurement: rank-1 projectors onto Φ₊, Φ₋, Ψ₊, Ψ₋.
pub fn bell_basis() -> ProjectiveMeasurement {
    let projectors = bell_states().iter().map(Operator::projector).collect();
    ProjectiveMeasurement::new(projectors, BELL_LABELS.to_vec())
        .expect("Bell projectors form a complete orthogonal set")
}

/// Computes the POVM on the system that a joint projective measurement on
/// system ⊗ ancilla realizes, given the ancilla state.
///
/// Joint indices are system-major: joint row `= m·d_aux + r` for system
/// index `m` and ancilla index `r`.
pub fn induced_povm(joint: &ProjectiveMeasurement, rho_aux: &DensityMatrix) -> Result<Povm> {
    let d_joint = joint.dim();
    let d_aux = rho_aux.dim();
    if !d_joint.is_multiple_of(d_aux) {
        return Err(Error::DimensionMismatch {
            expected: d_aux,
            actual: d_joint,
        });
    }
    let d_sys = d_joint / d_aux;
    let elements = joint
        .projectors()
        .iter()
        .map(|p| {
            Operator::from_fn(d_sys, |m, n| {
                let mut sum = Complex64::ZERO;
                for r in 0..d_aux {
                    for s in 0..d_aux {
                        sum += p.get(m * d_aux + r, n * d_aux + s) * rho_aux.get(s, r);
                    }
                }
                sum
            })
        })
        .collect();
    Povm::new(elements, joint.labels().to_vec())
}

/// One measurement outcome: its label, Born probability, and the normalized
/// post-measurement state (absent when the probability is numerically zero).
#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub label: String,
    pub probability: f64,
    pub post_state: Option<StateVector>,
}

/// All outcomes of a projective measurement acting on the full state.
pub fn projective_outcomes(
    state: &StateVector,
    m: &ProjectiveMeasurement,
) -> Result<Vec<OutcomeRecord>> {
    if m.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            actual: m.dim(),
        });
    }
    let mut outcomes = Vec::with_capacity(m.len());
    for (p, label) in m.projectors().iter().zip(m.labels()) {
        let projected = p.apply(state.amplitudes())?;
        let probability: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        let post_state =
            StateVector::normalized(projected, state.dims().to_vec(), state.labels().to_vec());
        outcomes.push(OutcomeRecord {
            label: label.clone(),
            probability,
            post_state,
        });
    }
    Ok(outcomes)
}

/// All outcomes of a projective measurement on the named subsystems.
pub fn projective_outcomes_on(
    state: &StateVector,
    m: &ProjectiveMeasurement,
    targets: &[&str],
) -> Result<Vec<OutcomeRecord>> {
    let embedded: Vec<Operator> = m
        .projectors()
        .iter()
        .map(|p| p.embed(state.dims(), state.labels(), targets))
        .collect::<Result<_>>()?;
    let full = ProjectiveMeasurement::new(embedded, m.labels().to_vec())?;
    projective_outcomes(state, &full)
}

/// All outcomes of a POVM on the named subsystems, with post-measurement
/// states from the minimal-disturbance Kraus factors `Mᵢ = √Aᵢ`.
///
/// The POVM itself never dictates post-measurement states; the square-root
/// choice is adopted so transcripts are deterministic and testable.
pub fn povm_outcomes_on(
    state: &StateVector,
    povm: &Povm,
    targets: &[&str],
) -> Result<Vec<OutcomeRecord>> {
    let mut outcomes = Vec::with_capacity(povm.len());
    for (element, label) in povm.elements().iter().zip(povm.labels()) {
        let effect = element.embed(state.dims(), state.labels(), targets)?;
        let amps = state.amplitudes();
        // ⟨ψ|A⊗I|ψ⟩
        let applied = effect.apply(amps)?;
        let probability: f64 = amps
            .iter()
            .zip(&applied)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        let post_state = if probability > tol::PROB_FLOOR {
            let kraus = psd_sqrt(element)?.embed(state.dims(), state.labels(), targets)?;
            StateVector::normalized(
                kraus.apply(amps)?,
                state.dims().to_vec(),
                state.labels().to_vec(),
            )
        } else {
            None
        };
        outcomes.push(OutcomeRecord {
            label: label.clone(),
            probability,
            post_state,
        });
    }
    Ok(outcomes)
}

/// Born-rule probabilities `pᵢ = ⟨ψ|(Aᵢ⊗I)|ψ⟩` of a POVM acting on the named
/// subsystems.
pub fn outcome_distribution(
    state: &StateVector,
    povm: &Povm,
    targets: &[&str],
) -> Result<Vec<f64>> {
    let amps = state.amplitudes();
    povm.elements()
        .iter()
        .map(|element| {
            let effect = element.embed(state.dims(), state.labels(), targets)?;
            let applied = effect.apply(amps)?;
            Ok(amps
                .iter()
                .zip(&applied)
                .map(|(a, b)| (a.conj() * b).re)
                .sum())
        })
        .collect()
}

/// Inverse-CDF sampling over an outcome list in label order, consuming
/// exactly one uniform variate. Negative rounding dust is clamped to zero;
/// if the cumulative sum falls short of the draw, the last outcome wins.
pub fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probabilities.iter().map(|p| p.max(0.0)).sum();
    if total < tol::PROB_FLOOR {
        return Err(Error::CorruptMeasurement {
            floor: tol::PROB_FLOOR,
        });
    }
    let draw: f64 = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        cumulative += p.max(0.0);
        if draw < cumulative {
            return Ok(i);
        }
    }
    Ok(probabilities.len() - 1)
}

/// Samples a projective measurement on the full state.
pub fn measure_projective<R: Rng + ?Sized>(
    state: &StateVector,
    m: &ProjectiveMeasurement,
    rng: &mut R,
) -> Result<OutcomeRecord> {
    let outcomes = projective_outcomes(state, m)?;
    let probs: Vec<f64> = outcomes.iter().map(|o| o.probability).collect();
    let index = sample_index(&probs, rng)?;
    Ok(outcomes.into_iter().nth(index).expect("index in range"))
}

/// Samples a projective measurement on the named subsystems.
pub fn measure_projective_on<R: Rng + ?Sized>(
    state: &StateVector,
    m: &ProjectiveMeasurement,
    targets: &[&str],
    rng: &mut R,
) -> Result<OutcomeRecord> {
    let outcomes = projective_outcomes_on(state, m, targets)?;
    let probs: Vec<f64> = outcomes.iter().map(|o| o.probability).collect();
    let index = sample_index(&probs, rng)?;
    Ok(outcomes.into_iter().nth(index).expect("index in range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn telepovm_is_valid_for_any_angle() {
        for k in 0..16 {
            let theta = k as f64 * std::f64::consts::TAU / 16.0;
            let report = validate_povm(&telepovm_elements(theta));
            assert!(report.passes(), "theta = {theta}: {report:?}");
        }
    }

    #[test]
    fn telepovm_at_zero_is_diagonal() {
        let povm = telepovm_elements(0.0);
        let a1 = Operator::from_real(&[&[0.5, 0.0], &[0.0, 0.0]]);
        let a3 = Operator::from_real(&[&[0.0, 0.0], &[0.0, 0.5]]);
        assert!(povm.element(0).max_abs_diff(&a1).unwrap() < 1e-15);
        assert!(povm.element(1).max_abs_diff(&a1).unwrap() < 1e-15);
        assert!(povm.element(2).max_abs_diff(&a3).unwrap() < 1e-15);
        assert!(povm.element(3).max_abs_diff(&a3).unwrap() < 1e-15);
    }

    #[test]
    fn telepovm_at_quarter_pi() {
        let povm = telepovm_elements(std::f64::consts::FRAC_PI_4);
        let quarter = Operator::from_real(&[&[0.25, 0.25], &[0.25, 0.25]]);
        assert!(povm.element(0).max_abs_diff(&quarter).unwrap() < 1e-15);
    }

    #[test]
    fn second_element_is_z_conjugate_of_first() {
        let z = Operator::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]);
        for k in 0..10 {
            let theta = 0.17 + k as f64 * 0.61;
            let povm = telepovm_elements(theta);
            let zaz = z.matmul(povm.element(0)).unwrap().matmul(&z).unwrap();
            assert!(zaz.max_abs_diff(povm.element(1)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn single_identity_element_is_a_valid_povm() {
        let povm = Povm::with_numbered_labels(vec![Operator::identity(2)]).unwrap();
        assert!(validate_povm(&povm).passes());
    }

    #[test]
    fn half_identity_fails_completeness() {
        let povm =
            Povm::with_numbered_labels(vec![Operator::identity(2).scale(c(0.5, 0.0))]).unwrap();
        let report = validate_povm(&povm);
        assert!(!report.passes());
        assert!(report.completeness_residual > 0.4);
    }

    #[test]
    fn bell_basis_is_complete_and_rank_one() {
        let bell = bell_basis();
        assert_eq!(bell.len(), 4);
        for p in bell.projectors() {
            assert!((p.trace().re - 1.0).abs() < 1e-12); // rank 1
        }
        let states = bell_states();
        assert!(states[0].inner(&states[1]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn singlet_hits_psi_minus_with_certainty() {
        let outcomes = projective_outcomes(&StateVector::singlet(), &bell_basis()).unwrap();
        assert!((outcomes[3].probability - 1.0).abs() < 1e-12);
        for o in &outcomes[..3] {
            assert!(o.probability < 1e-12);
        }
    }

    #[test]
    fn induced_povm_element_entry_matches_half_c_squared() {
        // Contracting the Φ₊ projector against ancilla (c,s) must give
        // (A₁)₀₀ = ½c²; this pins the system-major joint index order.
        for k in 0..25 {
            let theta = k as f64 * std::f64::consts::TAU / 25.0;
            let aux = DensityMatrix::from_pure(&StateVector::qubit_xz(theta));
            let induced = induced_povm(&bell_basis(), &aux).unwrap();
            let expected = 0.5 * theta.cos().powi(2);
            assert!(
                (induced.element(0).get(0, 0).re - expected).abs() < 1e-12,
                "theta = {theta}"
            );
        }
    }

    #[test]
    fn bell_measurement_with_ancilla_reproduces_telepovm() {
        for k in 0..25 {
            let theta = 0.05 + k as f64 * 0.26;
            let aux = DensityMatrix::from_pure(&StateVector::qubit_xz(theta));
            let induced = induced_povm(&bell_basis(), &aux).unwrap();
            let direct = telepovm_elements(theta);
            for (a, b) in induced.elements().iter().zip(direct.elements()) {
                assert!(a.max_abs_diff(b).unwrap() < 1e-12, "theta = {theta}");
            }
            assert!(validate_povm(&induced).passes());
        }
    }

    #[test]
    fn trivial_joint_measurement_induces_trivial_povm() {
        let joint = ProjectiveMeasurement::new(vec![Operator::identity(4)], vec!["all"]).unwrap();
        let aux = DensityMatrix::from_pure(&StateVector::qubit_xz(0.3));
        let induced = induced_povm(&joint, &aux).unwrap();
        assert_eq!(induced.len(), 1);
        assert!(
            induced
                .element(0)
                .max_abs_diff(&Operator::identity(2))
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn z_measurement_on_up_is_deterministic() {
        let z = ProjectiveMeasurement::new(
            vec![
                Operator::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]),
                Operator::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]),
            ],
            vec!["up", "down"],
        )
        .unwrap();
        let up = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let record = measure_projective(&up, &z, &mut rng).unwrap();
        assert_eq!(record.label, "up");
        assert!((record.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn born_rule_statistics_for_z_measurement() {
        let z = ProjectiveMeasurement::new(
            vec![
                Operator::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]),
                Operator::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]),
            ],
            vec!["up", "down"],
        )
        .unwrap();
        let psi = StateVector::qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let n = 20_000;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut ups = 0usize;
        for _ in 0..n {
            if measure_projective(&psi, &z, &mut rng).unwrap().label == "up" {
                ups += 1;
            }
        }
        let p_hat = ups as f64 / n as f64;
        let sigma = (0.36 * 0.64 / n as f64).sqrt();
        assert!((p_hat - 0.36).abs() < 4.0 * sigma, "p_hat = {p_hat}");
    }

    #[test]
    fn telepovm_on_singlet_half_is_uniform() {
        // Alice's reduced state is I/2, so pᵢ = tr(Aᵢ)/2 = ¼.
        let povm = telepovm_elements(1.1);
        let probs = outcome_distribution(&StateVector::singlet(), &povm, &["1"]).unwrap();
        for p in probs {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_povm_distribution_is_one() {
        let povm = Povm::with_numbered_labels(vec![Operator::identity(2)]).unwrap();
        let probs = outcome_distribution(&StateVector::x_up(), &povm, &["1"]).unwrap();
        assert_eq!(probs.len(), 1);
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corrupt_measurement_is_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        assert!(matches!(
            sample_index(&[0.0, 0.0], &mut rng),
            Err(Error::CorruptMeasurement { .. })
        ));
    }

    #[test]
    fn projective_measurement_rejects_incomplete_sets() {
        let p_up = Operator::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(ProjectiveMeasurement::new(vec![p_up], vec!["up"]).is_err());
    }
}
