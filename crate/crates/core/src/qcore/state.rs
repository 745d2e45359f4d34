use num_complex::Complex64;

use crate::tol;
use crate::{Error, Result};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A normalized pure state over a labeled tensor factorization.
///
/// Amplitudes are stored flat, with the leftmost subsystem as the most
/// significant index block. Labels name the subsystems so that operators and
/// partial traces can address them independently of position.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl StateVector {
    /// Builds a state from flat amplitudes, checking shape, finiteness and
    /// normalization (within [`tol::NORM`]).
    pub fn new<L: Into<String>>(
        amplitudes: Vec<Complex64>,
        dims: Vec<usize>,
        labels: Vec<L>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let total: usize = dims.iter().product();
        if amplitudes.len() != total {
            return Err(Error::LengthMismatch {
                expected: total,
                actual: amplitudes.len(),
            });
        }
        if labels.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: labels.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            amplitudes,
            dims,
            labels,
        })
    }

    /// Builds a multi-qubit state with default labels `"1"`, `"2"`, ….
    pub fn from_amplitudes(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let labels: Vec<String> = (1..=dims.len()).map(|i| i.to_string()).collect();
        Self::new(amplitudes, dims, labels)
    }

    /// Single-qubit state `a|↑⟩ + b|↓⟩` with label `"1"`.
    pub fn qubit(a: Complex64, b: Complex64) -> Result<Self> {
        Self::from_amplitudes(vec![a, b], vec![2])
    }

    /// Real single-qubit state `(cos θ, sin θ)` in the xz plane.
    pub fn qubit_xz(theta: f64) -> Self {
        Self::qubit(
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(theta.sin(), 0.0),
        )
        .expect("unit vector by construction")
    }

    /// Computational basis state `|index⟩` of the given factorization.
    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::DimensionMismatch {
                expected: total,
                actual: index,
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; total];
        amplitudes[index] = Complex64::ONE;
        Self::from_amplitudes(amplitudes, dims)
    }

    fn bell(i00: f64, i11: f64, i01: f64, i10: f64) -> Self {
        let a = |x: f64| Complex64::new(x * SQRT_HALF, 0.0);
        Self::from_amplitudes(vec![a(i00), a(i01), a(i10), a(i11)], vec![2, 2])
            .expect("unit vector by construction")
    }

    /// `Φ₊ = (|↑↑⟩ + |↓↓⟩)/√2`
    pub fn phi_plus() -> Self {
        Self::bell(1.0, 1.0, 0.0, 0.0)
    }

    /// `Φ₋ = (|↑↑⟩ − |↓↓⟩)/√2`
    pub fn phi_minus() -> Self {
        Self::bell(1.0, -1.0, 0.0, 0.0)
    }

    /// `Ψ₊ = (|↑↓⟩ + |↓↑⟩)/√2`
    pub fn psi_plus() -> Self {
        Self::bell(0.0, 0.0, 1.0, 1.0)
    }

    /// `Ψ₋ = (|↑↓⟩ − |↓↑⟩)/√2`, the EPR singlet.
    pub fn psi_minus() -> Self {
        Self::bell(0.0, 0.0, 1.0, -1.0)
    }

    /// Alias for [`StateVector::psi_minus`].
    pub fn singlet() -> Self {
        Self::psi_minus()
    }

    /// `|↑ₓ⟩ = (|↑⟩ + |↓⟩)/√2`
    pub fn x_up() -> Self {
        Self::qubit(
            Complex64::new(SQRT_HALF, 0.0),
            Complex64::new(SQRT_HALF, 0.0),
        )
        .expect("unit vector by construction")
    }

    /// `|↓ₓ⟩ = (|↑⟩ − |↓⟩)/√2`
    pub fn x_down() -> Self {
        Self::qubit(
            Complex64::new(SQRT_HALF, 0.0),
            Complex64::new(-SQRT_HALF, 0.0),
        )
        .expect("unit vector by construction")
    }

    /// Replaces the subsystem labels, keeping amplitudes and dims.
    pub fn relabel<L: Into<String>>(self, labels: Vec<L>) -> Result<Self> {
        Self::new(self.amplitudes, self.dims, labels)
    }

    /// Normalizes a raw amplitude vector; returns `None` when its norm is
    /// numerically zero.
    pub(crate) fn normalized(
        amplitudes: Vec<Complex64>,
        dims: Vec<usize>,
        labels: Vec<String>,
    ) -> Option<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= tol::PROB_FLOOR {
            return None;
        }
        let scale = 1.0 / norm_sq.sqrt();
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Some(Self {
            amplitudes,
            dims,
            labels,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// Total Hilbert-space dimension (product of subsystem dims).
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn subsystem_count(&self) -> usize {
        self.dims.len()
    }

    /// Position of a labeled subsystem in the factor order.
    pub fn position_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Kronecker product; the left factor becomes the most significant index
    /// block and labels are concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::new(amplitudes, dims, labels)
    }

    /// Multiplies by a global phase that makes the first significant
    /// amplitude real positive, giving a deterministic representative of the
    /// physical ray.
    pub fn canonical_phase(mut self) -> Self {
        let lead = self.amplitudes.iter().find(|a| a.norm_sqr() > 1e-18);
        if let Some(&lead) = lead {
            let phase = lead.conj() / lead.norm();
            for a in &mut self.amplitudes {
                *a *= phase;
            }
        }
        self
    }
}

/// `|⟨pure|other⟩|²`, the transmission fidelity between two pure states.
///
/// Symmetric and invariant under a global phase of either argument.
pub fn fidelity(pure: &StateVector, other: &StateVector) -> Result<f64> {
    Ok(pure.inner(other)?.norm_sqr())
}

/// True iff the two states describe the same physical ray:
/// `fidelity(a, b) ≥ 1 − tol`.
pub fn equal_up_to_global_phase(a: &StateVector, b: &StateVector, tol: f64) -> Result<bool> {
    Ok(fidelity(a, b)? >= 1.0 - tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_of_basis_states_is_basis_product() {
        let up = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let up2 = up.clone().relabel(vec!["2"]).unwrap();
        let prod = up.tensor(&up2).unwrap();
        assert_eq!(
            prod.amplitudes(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        assert_eq!(prod.dims(), &[2, 2]);
        assert_eq!(prod.labels(), &["1".to_string(), "2".to_string()]);
    }

    #[test]
    fn tensor_expands_three_particle_state() {
        // (1,0) ⊗ (|↑↑⟩+|↓↓⟩)/√2 keeps the left factor most significant.
        let input = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let channel = StateVector::phi_plus().relabel(vec!["2", "3"]).unwrap();
        let psi = input.tensor(&channel).unwrap();
        let s = SQRT_HALF;
        let expected = [s, 0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0];
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_duplicate_labels() {
        let up = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(matches!(up.tensor(&up), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn new_rejects_unnormalized_and_nonfinite() {
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![2]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(f64::NAN, 0.0), c(0.0, 0.0)], vec![2]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn fidelity_of_state_with_itself_is_one() {
        let psi = StateVector::qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fidelity_of_orthogonal_states_is_zero() {
        let up = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let down = StateVector::qubit(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(fidelity(&up, &down).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let up = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        for phi in [0.3, 1.2, 4.0] {
            let rotated = StateVector::qubit(Complex64::from_polar(1.0, phi), c(0.0, 0.0)).unwrap();
            assert!((fidelity(&up, &rotated).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn global_phase_equality() {
        let psi = StateVector::qubit(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let minus = StateVector::qubit(c(-0.6, 0.0), c(-0.8, 0.0)).unwrap();
        assert!(equal_up_to_global_phase(&psi, &minus, 1e-12).unwrap());
        let up = StateVector::qubit(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let down = StateVector::qubit(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(!equal_up_to_global_phase(&up, &down, 1e-12).unwrap());
    }

    #[test]
    fn canonical_phase_makes_leading_amplitude_positive() {
        let psi = StateVector::qubit(c(0.0, 0.0), c(0.0, -1.0))
            .unwrap()
            .canonical_phase();
        assert!((psi.amplitude(1) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singlet_amplitudes() {
        let s = StateVector::singlet();
        assert!((s.amplitude(1) - c(SQRT_HALF, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(2) - c(-SQRT_HALF, 0.0)).norm() < 1e-15);
    }
}
