//! Brute-force references: Kronecker-vectorized Lyapunov solves, dense ADI
//! sweeps and exact Newton for Riccati equations. Small `n` only.

use crate::care::{care_residual_dense, CareProblem};
use crate::error::{Error, Result};
use crate::matcore::dense::{ensure_square, relative_asymmetry, shape, symmetrize, unvec, vec_of, DenseMatrix};

/// Largest `n` for which the `n² x n²` operator is assembled.
pub const KRON_MAX_N: usize = 48;

fn check_size(n: usize) -> Result<()> {
    if n > KRON_MAX_N {
        Err(Error::DenseThresholdExceeded { n, threshold: KRON_MAX_N })
    } else {
        Ok(())
    }
}

/// `Fᵀ⊗I + I⊗Fᵀ`, the vectorized form of `X ↦ FᵀX + XF`.
#[derive(Debug, Clone, PartialEq)]
pub struct KronOperator {
    n: usize,
    matrix: DenseMatrix,
}

impl KronOperator {
    pub fn new(f: &DenseMatrix) -> Result<Self> {
        let n = ensure_square(f)?;
        check_size(n)?;
        let ft = f.transpose();
        let id = DenseMatrix::identity(n, n);
        let matrix = ft.kronecker(&id) + id.kronecker(&ft);
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// 2-norm condition number of the assembled operator.
    pub fn condition_number(&self) -> f64 {
        let s = self.matrix.singular_values();
        let min = s.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            s.max() / min
        }
    }

    /// Solves `FᵀX + XF = Q` without symmetrizing.
    pub fn solve(&self, q: &DenseMatrix) -> Result<DenseMatrix> {
        if q.nrows() != self.n || q.ncols() != self.n {
            return Err(Error::dims(format!("{0}x{0}", self.n), shape(q)));
        }
        let lu = self.matrix.clone().lu();
        let scale = self.matrix.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if !(min_pivot > 1e-14 * scale) {
            return Err(Error::SingularOperator);
        }
        let x = lu.solve(&vec_of(q)).ok_or(Error::SingularOperator)?;
        Ok(unvec(x.as_slice(), self.n, self.n))
    }
}

/// Unique solution of `FᵀX + XF = Q` for symmetric `Q`, symmetrized after
/// checking that the raw solve is symmetric to 1e-10.
pub fn lyap_kron_solve(f: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    let x = KronOperator::new(f)?.solve(q)?;
    let asym = relative_asymmetry(&x);
    if asym > 1e-10 {
        return Err(Error::Asymmetric(asym));
    }
    Ok(symmetrize(&x))
}

fn shifted(m: &DenseMatrix, alpha: f64) -> DenseMatrix {
    let mut s = m.clone();
    for i in 0..s.nrows() {
        s[(i, i)] += alpha;
    }
    s
}

fn inverse(m: DenseMatrix) -> Result<DenseMatrix> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let lu = m.lu();
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(pivot > 1e-14 * scale) {
        return Err(Error::SingularShift { pivot, threshold: 1e-14 * scale });
    }
    lu.solve(&DenseMatrix::identity(n, n)).ok_or(Error::SingularShift { pivot, threshold: 1e-14 * scale })
}

/// Two-shift dense ADI from `X₀ = 0`:
/// `(Fᵀ+αI)X_{k+½} = Q − X_k(F−αI)`, `X_{k+1}(F+βI) = Q − (Fᵀ−βI)X_{k+½}`.
/// Returns `X₁, …, X_k`.
pub fn adi2_dense_history(f: &DenseMatrix, q: &DenseMatrix, alpha: f64, beta: f64, k: usize) -> Result<Vec<DenseMatrix>> {
    let n = ensure_square(f)?;
    check_size(n)?;
    if q.shape() != (n, n) {
        return Err(Error::dims(format!("{n}x{n}"), shape(q)));
    }
    let ft = f.transpose();
    let left_inv = inverse(shifted(&ft, alpha))?;
    let right_inv = inverse(shifted(f, beta))?;
    let f_minus_a = shifted(f, -alpha);
    let ft_minus_b = shifted(&ft, -beta);
    let mut x = DenseMatrix::zeros(n, n);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let half = &left_inv * (q - &x * &f_minus_a);
        x = (q - &ft_minus_b * half) * &right_inv;
        out.push(x.clone());
    }
    Ok(out)
}

pub fn adi2_dense(f: &DenseMatrix, q: &DenseMatrix, alpha: f64, beta: f64, k: usize) -> Result<DenseMatrix> {
    Ok(adi2_dense_history(f, q, alpha, beta, k)?.pop().unwrap_or_else(|| DenseMatrix::zeros(f.nrows(), f.nrows())))
}

/// Single-shift dense ADI (`β = α`).
pub fn adi1_dense_history(f: &DenseMatrix, q: &DenseMatrix, alpha: f64, k: usize) -> Result<Vec<DenseMatrix>> {
    adi2_dense_history(f, q, alpha, alpha, k)
}

pub fn adi1_dense(f: &DenseMatrix, q: &DenseMatrix, alpha: f64, k: usize) -> Result<DenseMatrix> {
    adi2_dense(f, q, alpha, alpha, k)
}

/// Maximum eigenvalue real part of `A − B·K0ᵀ`.
pub fn closed_loop_abscissa(p: &CareProblem, k0: &DenseMatrix) -> Result<f64> {
    p.closed_loop_abscissa(k0)
}

/// Newton iterates `X₁, X₂, …` with every Lyapunov step solved by
/// [`lyap_kron_solve`]. Stops at CARE residual ≤ 1e-12 or after 30 steps.
pub fn care_newton_exact_history(p: &CareProblem, k0: &DenseMatrix) -> Result<Vec<DenseMatrix>> {
    const MAX_STEPS: usize = 30;
    const TOL: f64 = 1e-12;
    let n = p.n();
    check_size(n)?;
    if k0.shape() != (n, p.m()) {
        return Err(Error::dims(format!("{n}x{}", p.m()), shape(k0)));
    }
    let abscissa = closed_loop_abscissa(p, k0)?;
    if !(abscissa < 0.0) {
        return Err(Error::NotStabilizing { max_real_part: abscissa });
    }
    let a = p.a.to_dense();
    let q = p.c.tr_mul(&p.c);
    let mut k = k0.clone();
    let mut history = Vec::new();
    let mut last = f64::INFINITY;
    for _ in 0..MAX_STEPS {
        let ak = &p.b * k.transpose() - &a;
        let x = lyap_kron_solve(&ak, &(&q + &k * k.transpose()))?;
        k = &x * &p.b;
        last = care_residual_dense(p, &x)?;
        history.push(x);
        if last <= TOL {
            return Ok(history);
        }
    }
    Err(Error::MaxIterations { iterations: MAX_STEPS, last })
}

pub fn care_newton_exact(p: &CareProblem, k0: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(care_newton_exact_history(p, k0)?.pop().expect("at least one step"))
}
