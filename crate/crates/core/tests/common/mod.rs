//! Dense-matrix oracles shared by the integration tests. Nothing here calls
//! the mask-based routines of the library.
#![allow(dead_code)]

use num_complex::Complex64;
use pauli_tomo::pauli::{Axis, Pauli, PauliLabel};
use pauli_tomo::state::StateVector;

pub type Matrix = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single(p: Pauli) -> Matrix {
    match p {
        Pauli::I => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        Pauli::X => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        Pauli::Y => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        Pauli::Z => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// The label as a dense `2^m × 2^m` matrix, first letter most significant.
pub fn dense_pauli(label: &PauliLabel) -> Matrix {
    label
        .letters()
        .iter()
        .fold(vec![vec![c(1.0, 0.0)]], |acc, &p| kron(&acc, &single(p)))
}

pub fn projector(psi: &StateVector) -> Matrix {
    let a = psi.amplitudes();
    a.iter().map(|x| a.iter().map(|y| x * y.conj()).collect()).collect()
}

pub fn trace_product(a: &Matrix, b: &Matrix) -> Complex64 {
    let n = a.len();
    let mut t = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += a[i][k] * b[k][i];
        }
    }
    t
}

pub fn frobenius_dense(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

pub fn overlap_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Eigenvector of `axis` with eigenvalue `+1` (`bit = 0`) or `-1` (`bit = 1`).
pub fn eigenvector(axis: Axis, bit: usize) -> [Complex64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match (axis, bit) {
        (Axis::Z, 0) => [c(1.0, 0.0), c(0.0, 0.0)],
        (Axis::Z, _) => [c(0.0, 0.0), c(1.0, 0.0)],
        (Axis::X, 0) => [c(h, 0.0), c(h, 0.0)],
        (Axis::X, _) => [c(h, 0.0), c(-h, 0.0)],
        (Axis::Y, 0) => [c(h, 0.0), c(0.0, h)],
        (Axis::Y, _) => [c(h, 0.0), c(0.0, -h)],
    }
}

/// `|⊗_q v_q⟩` for single-qubit vectors, qubit 0 most significant.
pub fn product_vector(factors: &[[Complex64; 2]]) -> Vec<Complex64> {
    factors.iter().fold(vec![c(1.0, 0.0)], |acc, f| {
        acc.iter().flat_map(|a| [a * f[0], a * f[1]]).collect()
    })
}
