//! Spectral-norm and singular-value estimation by Lanczos iteration on the
//! Gram operator `MᵀM`.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::coefficient::Coefficient;
use crate::matcore::dense::DenseMatrix;
use crate::matcore::shifted::ShiftedSolver;

/// Stopping rule for the Gram Lanczos iteration: Ritz residual of the top
/// eigenvalue `θ` of `MᵀM` below `tol·θ`, or `θ` growing by at most
/// `0.1·tol·θ` over ten steps. The basis is restarted from the current Ritz
/// vector after `max_dim` vectors, at most `restarts` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lanczos {
    pub max_dim: usize,
    pub restarts: usize,
    pub tol: f64,
}

impl Default for Lanczos {
    fn default() -> Self {
        Self { max_dim: 300, restarts: 20, tol: 1e-10 }
    }
}

/// Residual norms only need to be accurate enough to compare against a
/// stopping tolerance.
pub const RESIDUAL_NORM_TOL: f64 = 1e-8;

/// Dense matrices up to this size fall back to a full SVD when the
/// iteration stalls.
const SVD_FALLBACK_DIM: usize = 1024;

/// Largest singular value of `m`, started from a fixed pseudo-random vector.
pub fn max_singular_value(m: &Coefficient) -> Result<f64> {
    max_singular_value_with(m, &Lanczos::default())
}

pub fn max_singular_value_with(m: &Coefficient, opts: &Lanczos) -> Result<f64> {
    match max_singular_value_estimate(m, opts)? {
        (sigma, true) => Ok(sigma),
        (_, false) => Err(Error::NoConvergence { what: "max singular value", iterations: opts.max_dim * (opts.restarts + 1) }),
    }
}

/// The estimate (a lower bound) and whether the stopping rule was met.
pub fn max_singular_value_estimate(m: &Coefficient, opts: &Lanczos) -> Result<(f64, bool)> {
    let n = m.check_square()?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    gram_lanczos(seeded_start(n), |x| m.mul(x), |y| m.tr_mul(y), opts)
}

/// Smallest singular value of a nonsingular `m` via the inverse operator.
pub fn min_singular_value(m: &Coefficient) -> Result<f64> {
    let n = m.check_square()?;
    let forward = ShiftedSolver::with_shift(m, 0.0)?;
    let backward = ShiftedSolver::with_shift(&m.transpose(), 0.0)?;
    let opts = Lanczos::default();
    match gram_lanczos(seeded_start(n), |x| forward.solve(x), |y| backward.solve(y), &opts)? {
        (inv, true) => Ok(1.0 / inv),
        (_, false) => Err(Error::NoConvergence { what: "min singular value", iterations: opts.max_dim * (opts.restarts + 1) }),
    }
}

/// Spectral norm of a dense matrix to [`RESIDUAL_NORM_TOL`]; stalls fall back to an SVD at moderate sizes and
/// otherwise return the last (lower-bound) estimate.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let opts = Lanczos { tol: RESIDUAL_NORM_TOL, ..Lanczos::default() };
    match gram_lanczos(seeded_start(m.ncols()), |x| Ok(m * x), |y| Ok(m.tr_mul(y)), &opts) {
        Ok((sigma, true)) => sigma,
        Ok((sigma, false)) => {
            if m.nrows().max(m.ncols()) <= SVD_FALLBACK_DIM {
                m.singular_values().max()
            } else {
                sigma
            }
        }
        Err(_) => m.singular_values().max(),
    }
}

fn seeded_start(n: usize) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_2a41);
    let v = DenseMatrix::from_fn(n, 1, |_, _| rng.random_range(0.5..1.5));
    let norm = v.norm();
    v / norm
}

/// Top Ritz pair of the tridiagonal matrix with diagonal `a` and
/// off-diagonal `b`: eigenvalue and eigenvector.
fn top_ritz(a: &[f64], b: &[f64]) -> (f64, DenseMatrix) {
    let k = a.len();
    let t = DenseMatrix::from_fn(k, k, |i, j| {
        if i == j {
            a[i]
        } else if i + 1 == j {
            b[i]
        } else if j + 1 == i {
            b[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let top = eig.eigenvalues.imax();
    (eig.eigenvalues[top], eig.eigenvectors.columns(top, 1).into_owned())
}

/// Largest singular value of the operator `apply` (with adjoint `apply_t`)
/// and whether the stopping rule was met.
fn gram_lanczos<A, T>(start: DenseMatrix, apply: A, apply_t: T, opts: &Lanczos) -> Result<(f64, bool)>
where
    A: Fn(&DenseMatrix) -> Result<DenseMatrix>,
    T: Fn(&DenseMatrix) -> Result<DenseMatrix>,
{
    let n = start.nrows();
    let dim = opts.max_dim.clamp(1, n.max(1));
    let mut x = &start / start.norm();
    // work with (MᵀM)/s² so squared norms of Gram products cannot overflow
    let s = apply(&x)?.norm();
    let scale = if s > 0.0 && s.is_finite() { s } else { 1.0 };
    let gram = |v: &DenseMatrix| -> Result<DenseMatrix> { Ok(apply_t(&(apply(v)? / scale))? / scale) };
    let mut best = 0.0f64;
    let mut cycle = 0;
    while cycle <= opts.restarts {
        let mut q = DenseMatrix::zeros(n, dim);
        q.set_column(0, &x.column(0));
        let (mut alphas, mut betas) = (Vec::with_capacity(dim), Vec::with_capacity(dim));
        let mut ritz_values: Vec<(usize, f64)> = Vec::new();
        let mut restart_from = None;
        for j in 0..dim {
            let qj = q.columns(j, 1).into_owned();
            let mut w = gram(&qj)?;
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite value in Lanczos iteration".into()));
            }
            alphas.push(qj.dot(&w));
            for _ in 0..2 {
                let basis = q.columns(0, j + 1);
                let c = basis.tr_mul(&w);
                w -= basis * c;
            }
            let beta = w.norm();
            let size = alphas.iter().chain(&betas).fold(0.0f64, |m, v| m.max(v.abs()));
            let exhausted = beta <= 1e-13 * size || beta == 0.0;
            let last = j + 1 == dim;
            if !(exhausted || last || j < 40 || j % 10 == 9) {
                q.set_column(j + 1, &(w / beta).column(0));
                betas.push(beta);
                continue;
            }
            let (theta, s) = top_ritz(&alphas, &betas);
            best = best.max(scale * theta.max(0.0).sqrt());
            let stalled = j >= 10
                && ritz_values.iter().find(|&&(i, _)| i + 10 == j).is_some_and(|&(_, earlier)| theta - earlier <= 0.1 * opts.tol * theta);
            if exhausted || stalled || beta * s[(j, 0)].abs() <= opts.tol * theta {
                return Ok((scale * theta.max(0.0).sqrt(), true));
            }
            ritz_values.push((j, theta));
            if last {
                restart_from = Some(q.columns(0, j + 1) * s);
                cycle += 1;
                break;
            }
            q.set_column(j + 1, &(w / beta).column(0));
            betas.push(beta);
        }
        match restart_from {
            Some(v) => {
                let norm = v.norm();
                x = v / norm;
            }
            None => break,
        }
    }
    Ok((best, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::sparse::SparseMatrix;

    #[test]
    fn diagonal_and_identity() {
        let m: Coefficient = DenseMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]).into();
        assert!((max_singular_value(&m).unwrap() - 3.0).abs() < 1e-9);
        let i: Coefficient = SparseMatrix::identity(10).into();
        assert!((max_singular_value(&i).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_identity_is_exact() {
        for n in [1usize, 7, 64, 256] {
            for c in [-3.5, 0.25, 1e3] {
                let m: Coefficient = SparseMatrix::identity(n).scaled(c).into();
                let s = max_singular_value(&m).unwrap();
                assert!((s - c.abs()).abs() <= 1e-12 * c.abs(), "n={n} c={c} s={s}");
            }
        }
    }

    #[test]
    fn min_singular_value_of_diagonal() {
        let m: Coefficient = DenseMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]).into();
        assert!((min_singular_value(&m).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let m = DenseMatrix::from_fn(9, 9, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let exact = m.singular_values().max();
        assert!((spectral_norm(&m) - exact).abs() <= 1e-7 * exact);
        assert_eq!(spectral_norm(&DenseMatrix::zeros(4, 4)), 0.0);
    }

    #[test]
    fn clustered_spectrum_meets_accuracy() {
        for (lo, d, up) in [(0.2, 5.0, 0.3), (-2.0, 9.0, 3.0)] {
            let m = SparseMatrix::toeplitz_bands(200, &[(-1, lo), (0, d), (1, up)]);
            let exact = m.to_dense().singular_values().max();
            let s = max_singular_value(&m.into()).unwrap();
            assert!((s - exact).abs() <= 1e-8 * exact, "{s} {exact}");
        }
    }

    #[test]
    fn restarts_converge_with_small_basis() {
        let m: Coefficient = SparseMatrix::toeplitz_bands(64, &[(-1, -1.0), (0, 2.0), (1, -1.0)]).into();
        let exact = m.to_dense().singular_values().max();
        let opts = Lanczos { max_dim: 12, restarts: 400, tol: 1e-10 };
        let s = max_singular_value_with(&m, &opts).unwrap();
        assert!((s - exact).abs() <= 1e-8 * exact, "{s} {exact}");
    }

    #[test]
    fn all_ones_kernel_is_not_a_trap() {
        let m: Coefficient = DenseMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]).into();
        let s = max_singular_value(&m).unwrap();
        assert!((s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn near_double_top_pair_is_resolved_to_the_pair() {
        // the two largest singular values differ by about 2e-8 relative
        let m: Coefficient = crate::probgen::generate_care(crate::probgen::Family::Care342, 512).unwrap().a.into();
        let mut sv: Vec<f64> = m.to_dense().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let s = max_singular_value(&m).unwrap();
        assert!(s <= sv[0] * (1.0 + 1e-14));
        assert!(s >= sv[1] * (1.0 - 1e-10), "{s} below {}", sv[1]);
    }
}
