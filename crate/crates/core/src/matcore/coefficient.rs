use crate::error::{Error, Result};
use crate::matcore::dense::{shape, DenseMatrix};
use crate::matcore::sparse::SparseMatrix;

/// A square coefficient matrix as seen by the shifted solvers.
///
/// The closed-loop matrices of the Newton iteration are a sparse matrix plus
/// a thin outer product; keeping that split lets the shifted solves use the
/// Sherman-Morrison-Woodbury identity instead of a dense factorization.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
    /// `base + u·vᵀ` with `u`, `v` of shape `n x m`.
    SparseLowRank { base: SparseMatrix, u: DenseMatrix, v: DenseMatrix },
}

impl From<SparseMatrix> for Coefficient {
    fn from(m: SparseMatrix) -> Self {
        Coefficient::Sparse(m)
    }
}

impl From<DenseMatrix> for Coefficient {
    fn from(m: DenseMatrix) -> Self {
        Coefficient::Dense(m)
    }
}

impl Coefficient {
    pub fn sparse_low_rank(base: SparseMatrix, u: DenseMatrix, v: DenseMatrix) -> Result<Self> {
        let n = base.nrows();
        if !base.is_square() {
            return Err(Error::dims("square base", format!("{}x{}", base.nrows(), base.ncols())));
        }
        if u.nrows() != n || v.nrows() != n || u.ncols() != v.ncols() {
            return Err(Error::dims(format!("{n}xm update factors"), format!("{} and {}", shape(&u), shape(&v))));
        }
        Ok(Coefficient::SparseLowRank { base, u, v })
    }

    /// Validates squareness and returns the dimension.
    pub fn check_square(&self) -> Result<usize> {
        let (r, c) = match self {
            Coefficient::Sparse(s) => (s.nrows(), s.ncols()),
            Coefficient::Dense(d) => (d.nrows(), d.ncols()),
            Coefficient::SparseLowRank { base, .. } => (base.nrows(), base.ncols()),
        };
        if r == c {
            Ok(r)
        } else {
            Err(Error::dims("square coefficient", format!("{r}x{c}")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Coefficient::Sparse(s) => s.nrows(),
            Coefficient::Dense(d) => d.nrows(),
            Coefficient::SparseLowRank { base, .. } => base.nrows(),
        }
    }

    pub fn mul(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Coefficient::Sparse(s) => s.mul_dense(x),
            Coefficient::Dense(d) => {
                if x.nrows() != d.ncols() {
                    return Err(Error::dims(format!("{} rows", d.ncols()), shape(x)));
                }
                Ok(d * x)
            }
            Coefficient::SparseLowRank { base, u, v } => {
                let mut y = base.mul_dense(x)?;
                y.gemm(1.0, u, &(v.transpose() * x), 1.0);
                Ok(y)
            }
        }
    }

    pub fn tr_mul(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Coefficient::Sparse(s) => s.tr_mul_dense(x),
            Coefficient::Dense(d) => {
                if x.nrows() != d.nrows() {
                    return Err(Error::dims(format!("{} rows", d.nrows()), shape(x)));
                }
                Ok(d.tr_mul(x))
            }
            Coefficient::SparseLowRank { base, u, v } => {
                let mut y = base.tr_mul_dense(x)?;
                y.gemm(1.0, v, &(u.transpose() * x), 1.0);
                Ok(y)
            }
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            Coefficient::Sparse(s) => Coefficient::Sparse(s.transpose()),
            Coefficient::Dense(d) => Coefficient::Dense(d.transpose()),
            Coefficient::SparseLowRank { base, u, v } => {
                Coefficient::SparseLowRank { base: base.transpose(), u: v.clone(), v: u.clone() }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Coefficient::Sparse(s) => s.to_dense(),
            Coefficient::Dense(d) => d.clone(),
            Coefficient::SparseLowRank { base, u, v } => base.to_dense() + u * v.transpose(),
        }
    }

    /// Cheap upper bound on the infinity norm, used to scale pivot thresholds.
    pub fn norm_inf_bound(&self) -> f64 {
        match self {
            Coefficient::Sparse(s) => s.norm_inf(),
            Coefficient::Dense(d) => d.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max),
            Coefficient::SparseLowRank { base, u, v } => {
                let vmax = v.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).collect::<Vec<_>>();
                let low = u
                    .row_iter()
                    .map(|r| r.iter().zip(&vmax).map(|(a, b)| a.abs() * b).sum::<f64>())
                    .fold(0.0, f64::max);
                base.norm_inf() + low
            }
        }
    }
}
