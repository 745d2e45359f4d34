use num_complex::Complex64;

use super::linalg::hermitian_eig;
use super::state::StateVector;
use crate::tol;
use crate::{Error, Result};

/// A dense square complex matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: Vec<Complex64>,
    dim: usize,
}

impl Operator {
    pub fn new(entries: Vec<Complex64>, dim: usize) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|e| !e.re.is_finite() || !e.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries, dim })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { entries, dim }
    }

    /// Convenience constructor from real row-major entries.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| {
            if r == c {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![Complex64::ZERO; dim * dim],
            dim,
        }
    }

    /// `|ket⟩⟨bra|`
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if ket.dim() != bra.dim() {
            return Err(Error::DimensionMismatch {
                expected: ket.dim(),
                actual: bra.dim(),
            });
        }
        Ok(Self::from_fn(ket.dim(), |r, c| {
            ket.amplitude(r) * bra.amplitude(c).conj()
        }))
    }

    /// `|psi⟩⟨psi|`
    pub fn projector(psi: &StateVector) -> Self {
        Self::outer(psi, psi).expect("same state on both sides")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            entries,
            dim: self.dim,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            entries,
            dim: self.dim,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e * factor).collect(),
            dim: self.dim,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut entries = vec![Complex64::ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == Complex64::ZERO {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Ok(Self { entries, dim: n })
    }

    /// `M†`
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Applies the operator to a flat amplitude vector.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect())
    }

    /// Kronecker product with `self` as the most significant index block.
    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.dim * other.dim;
        Operator::from_fn(n, |r, c| {
            let (r1, r2) = (r / other.dim, r % other.dim);
            let (c1, c2) = (c / other.dim, c % other.dim);
            self.get(r1, c1) * other.get(r2, c2)
        })
    }

    /// Largest entrywise deviation from another operator.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |M − M†|` entrywise.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermiticity_residual() <= tolerance
    }

    /// Frobenius norm of the off-diagonal part.
    pub(crate) fn off_diagonal_norm(&self) -> f64 {
        let mut sum = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    sum += self.get(r, c).norm_sqr();
                }
            }
        }
        sum.sqrt()
    }

    /// Embeds an operator acting on the `targets` subsystems of a larger
    /// labeled space, tensored with identity on the remaining subsystems.
    ///
    /// The operator's own index order follows the order of `targets`.
    pub fn embed(&self, dims: &[usize], labels: &[String], targets: &[&str]) -> Result<Self> {
        let mut positions = Vec::with_capacity(targets.len());
        for t in targets {
            let p = labels
                .iter()
                .position(|l| l == t)
                .ok_or_else(|| Error::UnknownLabel((*t).to_string()))?;
            if positions.contains(&p) {
                return Err(Error::DuplicateLabel((*t).to_string()));
            }
            positions.push(p);
        }
        let sub_dim: usize = positions.iter().map(|&p| dims[p]).product();
        if sub_dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: sub_dim,
            });
        }
        let total: usize = dims.iter().product();
        let n_sub = dims.len();
        let digits = |mut flat: usize| -> Vec<usize> {
            let mut out = vec![0; n_sub];
            for k in (0..n_sub).rev() {
                out[k] = flat % dims[k];
                flat /= dims[k];
            }
            out
        };
        let sub_index = |digit_vec: &[usize]| -> usize {
            positions
                .iter()
                .fold(0, |acc, &p| acc * dims[p] + digit_vec[p])
        };
        Ok(Operator::from_fn(total, |r, c| {
            let rd = digits(r);
            let cd = digits(c);
            // identity on every non-target subsystem
            for p in 0..n_sub {
                if !positions.contains(&p) && rd[p] != cd[p] {
                    return Complex64::ZERO;
                }
            }
            self.get(sub_index(&rd), sub_index(&cd))
        }))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }
}

/// A Hermitian, positive-semidefinite, trace-one operator.
///
/// Validation happens at construction; afterwards the matrix is immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let residual = op.hermiticity_residual();
        if residual > tol::HERM {
            return Err(Error::NotHermitian { residual });
        }
        let (eigenvalues, _) = hermitian_eig(&op)?;
        if let Some(&min) = eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -tol::PSD {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min,
                });
            }
        }
        let trace = op.trace();
        if (trace.re - 1.0).abs() > tol::NORM || trace.im.abs() > tol::NORM {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        Ok(Self { op })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self {
            op: Operator::projector(psi),
        }
    }

    /// Rescales a PSD matrix by its own trace. Used for conditional states,
    /// where dividing by the computed trace keeps the result exactly
    /// normalized regardless of how small the branch probability was.
    pub(crate) fn from_unnormalized(op: Operator) -> Result<Self> {
        let trace = op.trace().re;
        if trace <= tol::PROB_FLOOR {
            return Err(Error::TraceNotOne { trace });
        }
        Self::new(op.scale(Complex64::new(1.0 / trace, 0.0)))
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.op.get(r, c)
    }

    /// `tr(ρ²)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.op.matmul(&self.op).expect("same dim").trace().re
    }

    /// Extracts the dominant eigenvector. Only meaningful when the state is
    /// (numerically) pure; callers check `purity()` first.
    pub fn dominant_eigenvector(&self) -> StateVector {
        let (_, vectors) = hermitian_eig(&self.op).expect("validated Hermitian");
        let dims = vec![self.dim()];
        let labels = vec!["1".to_string()];
        StateVector::normalized(vectors[0].clone(), dims, labels)
            .expect("dominant eigenvector of a unit-trace matrix")
    }
}

/// Traces out every subsystem not named in `keep`, returning the reduced
/// density matrix over the kept subsystems in their original order.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: &[usize],
    labels: &[String],
    keep: &[&str],
) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if rho.dim() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            actual: rho.dim(),
        });
    }
    if dims.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: dims.len(),
            actual: labels.len(),
        });
    }
    let mut keep_positions = Vec::new();
    for k in keep {
        let p = labels
            .iter()
            .position(|l| l == k)
            .ok_or_else(|| Error::UnknownLabel((*k).to_string()))?;
        if keep_positions.contains(&p) {
            return Err(Error::DuplicateLabel((*k).to_string()));
        }
        keep_positions.push(p);
    }
    keep_positions.sort_unstable();
    let trace_positions: Vec<usize> = (0..dims.len())
        .filter(|p| !keep_positions.contains(p))
        .collect();

    let kept_dim: usize = keep_positions.iter().map(|&p| dims[p]).product();
    let traced_dim: usize = trace_positions.iter().map(|&p| dims[p]).product();

    // flat index from per-position digits, most significant first
    let flat = |kept: usize, traced: usize| -> usize {
        let mut kd = kept;
        let mut kept_digits = vec![0; keep_positions.len()];
        for (slot, &p) in keep_positions.iter().enumerate().rev() {
            kept_digits[slot] = kd % dims[p];
            kd /= dims[p];
        }
        let mut td = traced;
        let mut traced_digits = vec![0; trace_positions.len()];
        for (slot, &p) in trace_positions.iter().enumerate().rev() {
            traced_digits[slot] = td % dims[p];
            td /= dims[p];
        }
        let mut idx = 0;
        for (p, dim) in dims.iter().enumerate() {
            let digit = if let Some(slot) = keep_positions.iter().position(|&q| q == p) {
                kept_digits[slot]
            } else {
                let slot = trace_positions.iter().position(|&q| q == p).unwrap();
                traced_digits[slot]
            };
            idx = idx * dim + digit;
        }
        idx
    };

    let mut reduced = Operator::zeros(kept_dim);
    for kr in 0..kept_dim {
        for kc in 0..kept_dim {
            let mut sum = Complex64::ZERO;
            for t in 0..traced_dim {
                sum += rho.get(flat(kr, t), flat(kc, t));
            }
            reduced.set(kr, kc, sum);
        }
    }
    DensityMatrix::new(reduced)
}
