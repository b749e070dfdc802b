//! Dense storage.
//!
//! Every dense matrix in the crate is a column-major `nalgebra::DMatrix<f64>`.
//! Column-major layout keeps the many-column right-hand sides of the low-rank
//! recurrences contiguous per column, which is what the banded solves stream.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Column-major dense matrix of `f64`.
pub type DenseMatrix = DMatrix<f64>;

pub(crate) fn shape(m: &DenseMatrix) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// Rejects matrices holding NaN or infinite entries.
pub fn ensure_finite(m: &DenseMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("matrix has non-finite entries".into()))
    }
}

pub(crate) fn ensure_square(m: &DenseMatrix) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::dims("square matrix", shape(m)))
    }
}

/// Horizontal concatenation `[a, b, ...]`; every block must share the row count.
pub fn hcat(blocks: &[&DenseMatrix]) -> DenseMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.columns_mut(at, b.ncols()).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// `‖a − aᵀ‖_F / ‖a‖_F`, zero for the zero matrix.
pub fn relative_asymmetry(a: &DenseMatrix) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.transpose()).norm() / norm
}

pub fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    (a + a.transpose()) * 0.5
}

/// Column-stacking vectorization.
pub fn vec_of(x: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_column_slice(x.len(), 1, x.as_slice())
}

/// Inverse of [`vec_of`] for an `rows x cols` target.
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_column_slice(rows, cols, v)
}

/// Eigenvalues of a real square matrix via a real Schur decomposition. The
/// deflation tolerance is relaxed step by step when the QR sweeps stall.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex<f64>>> {
    let n = ensure_square(m)?;
    let budget = 100 * n.max(10);
    for eps in [f64::EPSILON, 1e-15, 1e-14, 1e-13] {
        if let Some(schur) = m.clone().try_schur(eps, budget) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::NoConvergence { what: "Schur decomposition", iterations: budget })
}
