//! Eigendecomposition for small complex Hermitian matrices.
//!
//! A cyclic Jacobi iteration is all these ≤ 8×8 problems need: each sweep
//! annihilates every off-diagonal entry once with a phased Givens rotation,
//! and the off-diagonal Frobenius norm converges quadratically.

use num_complex::Complex64;

use super::operator::Operator;
use crate::tol;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (descending) and matching orthonormal eigenvectors of a
/// Hermitian matrix.
///
/// Fails with [`Error::NotHermitian`] when the input violates
/// [`tol::HERM`].
pub fn hermitian_eig(op: &Operator) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let residual = op.hermiticity_residual();
    if residual > tol::HERM {
        return Err(Error::NotHermitian { residual });
    }
    let n = op.dim();
    // Symmetrize once so rounding noise in the input cannot bias the sweep.
    let mut h = Operator::from_fn(n, |r, c| (op.get(r, c) + op.get(c, r).conj()) * 0.5);
    let mut v = Operator::identity(n);

    // Convergence scale: rotations stop once the off-diagonal norm is small
    // relative to the matrix itself (absolute floor for zero matrices).
    let scale = h
        .entries()
        .iter()
        .map(|e| e.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);

    for _ in 0..MAX_SWEEPS {
        if h.off_diagonal_norm() <= tol::JACOBI * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = h.get(p, q);
                let r = z.norm();
                if r <= f64::EPSILON * scale {
                    continue;
                }
                // Phase the (p,q) plane so the pivot becomes real, then apply
                // the classical symmetric Jacobi rotation.
                let phase = z.conj() / r;
                let a = h.get(p, p).re;
                let b = h.get(q, q).re;
                let tau = (b - a) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -phase * s;
                let u_qq = phase * c;

                // H ← U† H U, applied as column then row updates.
                for row in 0..n {
                    let hp = h.get(row, p);
                    let hq = h.get(row, q);
                    h.set(row, p, hp * u_pp + hq * u_qp);
                    h.set(row, q, hp * u_pq + hq * u_qq);
                }
                for col in 0..n {
                    let hp = h.get(p, col);
                    let hq = h.get(q, col);
                    h.set(p, col, u_pp.conj() * hp + u_qp.conj() * hq);
                    h.set(q, col, u_pq.conj() * hp + u_qq.conj() * hq);
                }
                h.set(p, q, Complex64::ZERO);
                h.set(q, p, Complex64::ZERO);

                for row in 0..n {
                    let vp = v.get(row, p);
                    let vq = v.get(row, q);
                    v.set(row, p, vp * u_pp + vq * u_qp);
                    v.set(row, q, vp * u_pq + vq * u_qq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| h.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v.get(row, col)).collect())
        .collect();
    Ok((eigenvalues, eigenvectors))
}

/// The PSD square root `√M`, computed through the eigendecomposition.
///
/// Eigenvalues inside `[-tol::PSD, 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt(op: &Operator) -> Result<Operator> {
    let (eigenvalues, eigenvectors) = hermitian_eig(op)?;
    if let Some(&min) = eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -tol::PSD {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
    }
    let n = op.dim();
    let mut root = Operator::zeros(n);
    for (lambda, vec) in eigenvalues.iter().zip(&eigenvectors) {
        let sq = lambda.max(0.0).sqrt();
        if sq == 0.0 {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                let add = vec[r] * vec[c].conj() * sq;
                root.set(r, c, root.get(r, c) + add);
            }
        }
    }
    Ok(root)
}

/// Reassembles `Σ λᵢ |vᵢ⟩⟨vᵢ|`; used by tests and by POVM synthesis.
pub fn from_eigenpairs(eigenvalues: &[f64], eigenvectors: &[Vec<Complex64>]) -> Operator {
    let n = eigenvectors[0].len();
    let mut out = Operator::zeros(n);
    for (lambda, vec) in eigenvalues.iter().zip(eigenvectors) {
        for r in 0..n {
            for c in 0..n {
                let add = vec[r] * vec[c].conj() * lambda;
                out.set(r, c, out.get(r, c) + add);
            }
        }
    }
    out
}
