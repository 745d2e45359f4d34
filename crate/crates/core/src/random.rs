//! Random states, unitaries and measurements for the randomized suites.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::measure::{Povm, ProjectiveMeasurement};
use crate::qcore::{from_eigenpairs, hermitian_eig, Operator, StateVector};
use crate::Result;

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state over the given factorization.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> StateVector {
    let total: usize = dims.iter().product();
    loop {
        let amps: Vec<Complex64> = (0..total).map(|_| gaussian_complex(rng)).collect();
        let labels: Vec<String> = (1..=dims.len()).map(|i| i.to_string()).collect();
        if let Some(state) = StateVector::normalized(amps, dims.clone(), labels) {
            return state;
        }
    }
}

/// Haar-random qubit.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> StateVector {
    random_state(rng, vec![2])
}

/// Haar-random unitary, by Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    loop {
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        let mut independent = true;
        for _ in 0..dim {
            let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
            for prev in &columns {
                let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= overlap * p;
                }
            }
            let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                independent = false;
                break;
            }
            for x in &mut v {
                *x /= norm;
            }
            columns.push(v);
        }
        if independent {
            return Operator::from_fn(dim, |r, c| columns[c][r]);
        }
    }
}

/// Random complete rank-1 projective measurement, from the columns of a
/// Haar-random unitary.
pub fn random_projective_measurement<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
) -> ProjectiveMeasurement {
    let u = random_unitary(rng, dim);
    let projectors: Vec<Operator> = (0..dim)
        .map(|k| Operator::from_fn(dim, |r, c| u.get(r, k) * u.get(c, k).conj()))
        .collect();
    let labels: Vec<String> = (1..=dim).map(|i| i.to_string()).collect();
    ProjectiveMeasurement::new(projectors, labels)
        .expect("unitary columns give a complete orthogonal set")
}

/// Random POVM with the given number of outcomes: raw effects `Gᵢ†Gᵢ` are
/// sandwiched by `S^{-1/2}` (with `S = Σ Gᵢ†Gᵢ`) so they sum to identity.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Result<Povm> {
    let raw: Vec<Operator> = (0..outcomes)
        .map(|_| {
            let g = Operator::from_fn(dim, |_, _| gaussian_complex(rng));
            g.adjoint().matmul(&g).expect("square")
        })
        .collect();
    let mut sum = Operator::zeros(dim);
    for r in &raw {
        sum = sum.add(r)?;
    }
    let (vals, vecs) = hermitian_eig(&sum)?;
    // Gaussian effects make S positive definite with probability one.
    let inv_sqrt: Vec<f64> = vals.iter().map(|l| 1.0 / l.sqrt()).collect();
    let inv_root = from_eigenpairs(&inv_sqrt, &vecs);
    let elements: Vec<Operator> = raw
        .iter()
        .map(|g| inv_root.matmul(g).unwrap().matmul(&inv_root).unwrap())
        .collect();
    Povm::with_numbered_labels(elements)
}
