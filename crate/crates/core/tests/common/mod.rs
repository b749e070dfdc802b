#![allow(dead_code)]

use rgadi_core::matcore::DenseMatrix;

pub fn two_norm(m: &DenseMatrix) -> f64 {
    m.singular_values().max()
}

pub fn min_eigenvalue(m: &DenseMatrix) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().min()
}

/// `FᵀX + XF − Q`.
pub fn lyap_operator(f: &DenseMatrix, x: &DenseMatrix, q: &DenseMatrix) -> DenseMatrix {
    f.transpose() * x + x * f - q
}

/// `AᵀX + XA − XBBᵀX + CᵀC`.
pub fn care_operator(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    a.transpose() * x + x * a - x * b * b.transpose() * x + c.transpose() * c
}
