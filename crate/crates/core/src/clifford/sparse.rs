//! Thin helpers over `nalgebra_sparse` for complex operators.

use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

pub type CsrC = CsrMatrix<Complex64>;

/// Sums duplicate entries; explicit zeros are dropped.
pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, Complex64)]) -> CsrC {
    let mut coo = CooMatrix::new(rows, cols);
    for &(r, c, v) in triplets {
        if v != Complex64::new(0.0, 0.0) {
            coo.push(r, c, v);
        }
    }
    CsrMatrix::from(&coo)
}

pub fn matvec(a: &CsrC, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len(), "dimension mismatch in matvec");
    a.row_iter().map(|row| row.col_indices().iter().zip(row.values()).map(|(&c, v)| v * x[c]).sum()).collect()
}

pub fn adjoint(a: &CsrC) -> CsrC {
    let mut t = a.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

/// `diag(w) · a`, scaling row `r` by `w[r]`.
pub fn scale_rows(a: &CsrC, w: &[f64]) -> CsrC {
    let mut out = a.clone();
    let offsets: Vec<usize> = out.row_offsets().to_vec();
    let values = out.values_mut();
    for r in 0..w.len() {
        for v in &mut values[offsets[r]..offsets[r + 1]] {
            *v *= w[r];
        }
    }
    out
}

pub fn frobenius(a: &CsrC) -> f64 {
    a.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_entry(a: &CsrC) -> f64 {
    a.values().iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

/// `max |A − A†|`.
pub fn hermiticity_residual(a: &CsrC) -> f64 {
    max_abs_entry(&(a - &adjoint(a)))
}

pub fn to_dense(a: &CsrC) -> nalgebra::DMatrix<Complex64> {
    let mut d = nalgebra::DMatrix::zeros(a.nrows(), a.ncols());
    for (r, c, v) in a.triplet_iter() {
        d[(r, c)] += *v;
    }
    d
}
