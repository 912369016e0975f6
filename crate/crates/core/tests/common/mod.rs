//! Independent reference computations shared by the integration tests.
//! None of these go through the fast paths they are compared against.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qaoalab::models::{Axis, PauliTerm};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(axis: Option<Axis>) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match axis {
        None => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Some(Axis::X) => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Some(Axis::Y) => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        Some(Axis::Z) => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Term-by-term Kronecker construction. Site 0 is the least significant bit,
/// so it is the rightmost tensor factor.
pub fn kron_dense(n: usize, terms: &[PauliTerm]) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for t in terms {
        let mut op = DMatrix::<Complex64>::identity(1, 1);
        for site in (0..n).rev() {
            let axis = t.factors().iter().find(|(s, _)| *s == site).map(|(_, a)| *a);
            op = op.kronecker(&pauli(axis));
        }
        h += op * c(t.coefficient(), 0.0);
    }
    h
}

/// exp(−iθH) through a Hermitian eigendecomposition.
pub fn dense_expm(h: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -theta * l)),
    ));
    v * phases * v.adjoint()
}

pub fn apply_dense(m: &DMatrix<Complex64>, amps: &[Complex64]) -> Vec<Complex64> {
    let v = DVector::from_column_slice(amps);
    (m * v).iter().copied().collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Ground energy of H = −ΣZ_iZ_{i+1} − hΣX_i on a periodic ring of even N,
/// from the free-fermion dispersion in the even-parity (antiperiodic) sector:
/// E0 = −½ Σ_k 2√(1 + h² − 2h cos k), k = π(2m+1)/N.
pub fn tfim_ground_energy(n: usize, h: f64) -> f64 {
    (0..n)
        .map(|m| {
            let k = std::f64::consts::PI * (2 * m + 1) as f64 / n as f64;
            -(1.0 + h * h - 2.0 * h * k.cos()).sqrt()
        })
        .sum()
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn dense_spectrum(h: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// The equal superposition of the three period-3 patterns with one up spin
/// per unit cell (↑↓↓…, ↓↑↓…, ↓↓↑…), for N divisible by 3.
pub fn period_three_state(n: usize) -> Vec<Complex64> {
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    let a = 1.0 / 3f64.sqrt();
    for shift in 0..3 {
        // up spins (bit 0) on sites ≡ shift mod 3, down (bit 1) elsewhere
        let mut b = 0usize;
        for site in 0..n {
            if site % 3 != shift {
                b |= 1 << site;
            }
        }
        amps[b] = c(a, 0.0);
    }
    amps
}
