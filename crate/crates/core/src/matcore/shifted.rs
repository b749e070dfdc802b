//! Cached factorizations of `M + αI`.
//!
//! Every recurrence in the solvers applies `(αI + M)⁻¹` to a block of columns,
//! so a single factorization per `(M, α)` pair is reused across all of them.
//! Sparse matrices with a narrow band get a banded LU with partial pivoting,
//! everything else a dense LU. Sparse-plus-outer-product coefficients go
//! through Sherman-Morrison-Woodbury on top of the factorized sparse part.

use nalgebra::LU;

use crate::error::{Error, Result};
use crate::matcore::coefficient::Coefficient;
use crate::matcore::dense::{shape, DenseMatrix};
use crate::matcore::sparse::SparseMatrix;

/// Pivots below this multiple of `‖M + αI‖_∞` are treated as singular.
pub const PIVOT_RELATIVE_TOL: f64 = 1e-14;

/// Reusable solver for `(M + αI) Y = R`.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    alpha: f64,
    dim: usize,
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    Banded(BandedLu),
    Dense(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Woodbury {
        base: Box<Backend>,
        /// `S⁻¹U` for the shifted sparse part `S`.
        s_inv_u: DenseMatrix,
        v: DenseMatrix,
        capacitance: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    },
}

/// Factorizes `m + alpha·I`.
pub fn shifted_factorize(m: &Coefficient, alpha: f64) -> Result<ShiftedSolver> {
    ShiftedSolver::new(m, alpha)
}

/// Solves `(M + αI) Y = r` with a previously built solver.
pub fn solve_shifted(s: &ShiftedSolver, r: &DenseMatrix) -> Result<DenseMatrix> {
    s.solve(r)
}

impl ShiftedSolver {
    pub fn new(m: &Coefficient, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift must be positive, got {alpha}")));
        }
        Self::with_shift(m, alpha)
    }

    /// Like [`ShiftedSolver::new`] but accepts any finite shift, including zero
    /// and negative values. Used by inverse iteration.
    pub fn with_shift(m: &Coefficient, alpha: f64) -> Result<Self> {
        let dim = m.check_square()?;
        let threshold = PIVOT_RELATIVE_TOL * (m.norm_inf_bound() + alpha.abs()).max(f64::MIN_POSITIVE);
        let backend = match m {
            Coefficient::Sparse(s) => factor_sparse(s, alpha, threshold)?,
            Coefficient::Dense(d) => factor_dense(d.clone(), alpha, threshold)?,
            Coefficient::SparseLowRank { base, u, v } => {
                let base_backend = match factor_sparse(base, alpha, threshold) {
                    Ok(b) => b,
                    // the sparse part alone may be singular at this shift
                    Err(Error::SingularShift { .. }) => {
                        return Ok(Self { alpha, dim, backend: factor_dense(m.to_dense(), alpha, threshold)? })
                    }
                    Err(e) => return Err(e),
                };
                let s_inv_u = base_backend.solve(u);
                let mut cap = v.transpose() * &s_inv_u;
                for i in 0..cap.nrows() {
                    cap[(i, i)] += 1.0;
                }
                let cap_norm = cap.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let capacitance = cap.lu();
                let min_pivot = min_abs_diag(&capacitance.u());
                if min_pivot <= PIVOT_RELATIVE_TOL * cap_norm.max(1.0) {
                    return Err(Error::SingularShift { pivot: min_pivot, threshold: PIVOT_RELATIVE_TOL * cap_norm });
                }
                Backend::Woodbury { base: Box::new(base_backend), s_inv_u, v: v.clone(), capacitance }
            }
        };
        Ok(Self { alpha, dim, backend })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, r: &DenseMatrix) -> Result<DenseMatrix> {
        if r.nrows() != self.dim {
            return Err(Error::dims(format!("{} rows", self.dim), shape(r)));
        }
        Ok(self.backend.solve(r))
    }

    /// Solves `Y (M + αI)ᵀ = R`, i.e. `(M + αI) Yᵀ = Rᵀ`.
    pub fn solve_right_transposed(&self, r: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.solve(&r.transpose())?.transpose())
    }
}

impl Backend {
    fn solve(&self, r: &DenseMatrix) -> DenseMatrix {
        match self {
            Backend::Banded(b) => b.solve(r),
            Backend::Dense(lu) => lu.solve(r).expect("pivots were checked at factorization"),
            Backend::Woodbury { base, s_inv_u, v, capacitance } => {
                let mut y = base.solve(r);
                let small = capacitance.solve(&(v.transpose() * &y)).expect("capacitance pivots were checked");
                y.gemm(-1.0, s_inv_u, &small, 1.0);
                y
            }
        }
    }
}

fn min_abs_diag(u: &DenseMatrix) -> f64 {
    u.diagonal().iter().fold(f64::INFINITY, |a, x| a.min(x.abs()))
}

fn factor_dense(mut d: DenseMatrix, alpha: f64, threshold: f64) -> Result<Backend> {
    for i in 0..d.nrows() {
        d[(i, i)] += alpha;
    }
    let lu = d.lu();
    let pivot = min_abs_diag(&lu.u());
    if pivot <= threshold {
        return Err(Error::SingularShift { pivot, threshold });
    }
    Ok(Backend::Dense(lu))
}

fn factor_sparse(s: &SparseMatrix, alpha: f64, threshold: f64) -> Result<Backend> {
    let n = s.nrows();
    let (kl, ku) = s.bandwidths();
    // band storage plus pivoting fill must stay well below dense storage
    if (2 * kl + ku + 1) * 4 <= n {
        Ok(Backend::Banded(BandedLu::factor(s, alpha, threshold)?))
    } else {
        factor_dense(s.to_dense(), alpha, threshold)
    }
}

/// Banded LU with partial pivoting (LINPACK layout: row interchanges are
/// applied to `U` only and replayed on the right-hand side during the solve).
#[derive(Debug, Clone)]
struct BandedLu {
    n: usize,
    kl: usize,
    /// Row width of the band store, `2·kl + ku + 1`.
    width: usize,
    /// Row `i` stores columns `i - kl ..= i + kl + ku` at offsets `j - i + kl`.
    band: Vec<f64>,
    /// `lower[k·kl + t]` multiplies row `k` into row `k + 1 + t`.
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn factor(s: &SparseMatrix, alpha: f64, threshold: f64) -> Result<Self> {
        let n = s.nrows();
        let (kl, ku) = s.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * width];
        for (i, j, v) in s.triplets() {
            band[i * width + (j + kl - i)] += v;
        }
        for i in 0..n {
            band[i * width + kl] += alpha;
        }
        let at = |i: usize, j: usize| i * width + (j + kl - i);

        let mut lower = vec![0.0; n * kl.max(1)];
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = band[at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = band[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= threshold {
                return Err(Error::SingularShift { pivot: best, threshold });
            }
            pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    band.swap(at(k, j), at(p, j));
                }
            }
            let diag = band[at(k, k)];
            for i in k + 1..=last_row {
                let m = band[at(i, k)] / diag;
                lower[k * kl + (i - k - 1)] = m;
                band[at(i, k)] = 0.0;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        band[at(i, j)] -= m * band[at(k, j)];
                    }
                }
            }
        }
        Ok(Self { n, kl, width, band, lower, pivots })
    }

    fn solve(&self, r: &DenseMatrix) -> DenseMatrix {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let mut y = r.clone();
        for mut col in y.column_iter_mut() {
            let b = col.as_mut_slice();
            for k in 0..n {
                let p = self.pivots[k];
                if p != k {
                    b.swap(k, p);
                }
                let bk = b[k];
                if bk != 0.0 {
                    let end = (k + kl).min(n - 1);
                    for (bi, l) in b[k + 1..=end].iter_mut().zip(&self.lower[k * kl..]) {
                        *bi -= l * bk;
                    }
                }
            }
            for k in (0..n).rev() {
                let row = &self.band[k * width..(k + 1) * width];
                let mut acc = b[k];
                for j in k + 1..=(k + width - 1 - kl).min(n - 1) {
                    acc -= row[j + kl - k] * b[j];
                }
                b[k] = acc / row[kl];
            }
        }
        y
    }
}
