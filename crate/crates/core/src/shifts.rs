//! Shift selection and convergence diagnostics for the GADI iteration.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyap::{rgadi, LyapProblem, Shift, SolveOptions};
use crate::matcore::dense::{eigenvalues, ensure_square, DenseMatrix};
use crate::matcore::{max_singular_value, Coefficient};
use crate::oracle::KRON_MAX_N;

/// Largest `n` for which dense eigensolves and dense norm diagnostics run.
pub const EIGEN_THRESHOLD: usize = 512;

/// Default number of iterations each `omega_scan` candidate gets.
pub const DEFAULT_SCAN_BUDGET: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftSource {
    MaxSigma,
    GeometricEig,
    UserFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSelection {
    pub alpha_star: f64,
    /// Largest singular value.
    pub mu: f64,
    /// Smallest eigenvalue real part; `None` above [`EIGEN_THRESHOLD`].
    pub nu: Option<f64>,
    pub source: ShiftSource,
}

/// `α* = μ = max σ(F)`, with `ν = min Re λ(F)` when `n` allows a dense
/// eigensolve.
pub fn alpha_star(f: &Coefficient) -> Result<ShiftSelection> {
    let n = f.check_square()?;
    let mu = max_singular_value(f)?;
    let nu = if n <= EIGEN_THRESHOLD {
        Some(eigenvalues(&f.to_dense())?.iter().map(|l| l.re).fold(f64::INFINITY, f64::min))
    } else {
        None
    };
    Ok(ShiftSelection { alpha_star: mu, mu, nu, source: ShiftSource::MaxSigma })
}

/// The scalar rate bound `(μ² − 2αν + α²)/(μ² + 2αν + α²)` minimized by `α = μ`.
pub fn rate_objective(mu: f64, nu: f64, alpha: f64) -> f64 {
    (mu * mu - 2.0 * alpha * nu + alpha * alpha) / (mu * mu + 2.0 * alpha * nu + alpha * alpha)
}

/// Turns a [`Shift`] policy into a number for the coefficient `m`.
///
/// `GeometricEig` uses `√(λ_max λ_min)` and is only defined when the spectrum
/// of `m` is real and positive; other spectra are rejected.
pub fn resolve_alpha(m: &Coefficient, shift: Shift) -> Result<f64> {
    match shift {
        Shift::Fixed(a) if a > 0.0 && a.is_finite() => Ok(a),
        Shift::Fixed(a) => Err(Error::InvalidParameter(format!("alpha must be positive, got {a}"))),
        Shift::MaxSigma => max_singular_value(m),
        Shift::GeometricEig => {
            let n = m.check_square()?;
            if n > EIGEN_THRESHOLD {
                return Err(Error::DenseThresholdExceeded { n, threshold: EIGEN_THRESHOLD });
            }
            let ev = eigenvalues(&m.to_dense())?;
            let scale = ev.iter().map(|l| l.norm()).fold(0.0, f64::max);
            if ev.iter().any(|l| l.im.abs() > 1e-10 * scale) {
                return Err(Error::InvalidParameter("geometric shift needs a real spectrum".into()));
            }
            let max = ev.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
            let min = ev.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
            if !(min > 0.0) {
                return Err(Error::InvalidParameter("geometric shift needs a positive spectrum".into()));
            }
            Ok((max * min).sqrt())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionBound {
    pub delta: f64,
    pub eta: f64,
}

fn two_norm(m: &DenseMatrix) -> f64 {
    m.singular_values().max()
}

fn shifted(m: &DenseMatrix, alpha: f64) -> DenseMatrix {
    let mut s = m.clone();
    for i in 0..s.nrows() {
        s[(i, i)] += alpha;
    }
    s
}

fn invert(m: DenseMatrix) -> Result<DenseMatrix> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let lu = m.lu();
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(pivot > 1e-14 * scale) {
        return Err(Error::SingularShift { pivot, threshold: 1e-14 * scale });
    }
    Ok(lu.solve(&DenseMatrix::identity(n, n)).expect("pivots checked"))
}

/// Per-step error bound `‖X_{k+1}−X‖₂ ≤ δ‖X_k−X‖₂ + η‖R(X_k)‖₂` of dense GADI:
///
/// `δ = ‖F(αI+F)⁻¹‖₂ + α‖(αI+Fᵀ)⁻¹‖₂‖(αI−F)(αI+F)⁻¹‖₂`,
/// `η = |1−ω|α‖(αI+Fᵀ)⁻¹‖₂‖(αI+F)⁻¹‖₂`.
pub fn contraction_bound(f: &DenseMatrix, alpha: f64, omega: f64) -> Result<ContractionBound> {
    let n = ensure_square(f)?;
    if n > EIGEN_THRESHOLD {
        return Err(Error::DenseThresholdExceeded { n, threshold: EIGEN_THRESHOLD });
    }
    let right_inv = invert(shifted(f, alpha))?;
    let left_inv = invert(shifted(&f.transpose(), alpha))?;
    let cayley = DenseMatrix::identity(n, n) * alpha - f;
    let left_norm = two_norm(&left_inv);
    let delta = two_norm(&(f * &right_inv)) + alpha * left_norm * two_norm(&(cayley * &right_inv));
    let eta = (1.0 - omega).abs() * alpha * left_norm * two_norm(&right_inv);
    Ok(ContractionBound { delta, eta })
}

/// The iteration matrices of the vectorized ADI and GADI sweeps,
/// `T(α)` and `T(α, ω)`, assembled by brute force.
pub fn iteration_matrices(f: &DenseMatrix, alpha: f64, omega: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = ensure_square(f)?;
    if n > KRON_MAX_N {
        return Err(Error::DenseThresholdExceeded { n, threshold: KRON_MAX_N });
    }
    let ft = f.transpose();
    let id = DenseMatrix::identity(n, n);
    let big = DenseMatrix::identity(n * n, n * n);
    let left = ft.kronecker(&id); // Fᵀ⊗I
    let right = id.kronecker(&ft); // I⊗Fᵀ
    let inv_l = invert(&big * alpha + &left)?;
    let inv_r = invert(&big * alpha + &right)?;
    let front = &inv_l * &inv_r;
    let t_adi = &front * (&big * alpha - &right) * (&big * alpha - &left);
    let inner = &big * (alpha * alpha) + &right * &left - (&right + &left) * ((1.0 - omega) * alpha);
    let t_gadi = front * inner;
    Ok((t_adi, t_gadi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFactors {
    pub rho_adi: f64,
    pub rho_gadi: f64,
    /// Dominant eigenvalue `c + di` of `T(α)`.
    pub dominant_adi: (f64, f64),
    /// Dominant eigenvalue `a + bi` of `T(α, ω)`.
    pub dominant_gadi: (f64, f64),
    pub eigenvalues_adi: Vec<(f64, f64)>,
    pub eigenvalues_gadi: Vec<(f64, f64)>,
}

fn dominant(ev: &[Complex<f64>]) -> Complex<f64> {
    ev.iter().copied().fold(Complex::new(0.0, 0.0), |best, l| if l.norm() > best.norm() { l } else { best })
}

/// Spectral radii and dominant eigenvalues of `T(α)` and `T(α, ω)`.
pub fn spectral_factors(f: &DenseMatrix, alpha: f64, omega: f64) -> Result<SpectralFactors> {
    let (t_adi, t_gadi) = iteration_matrices(f, alpha, omega)?;
    let ev_adi = eigenvalues(&t_adi)?;
    let ev_gadi = eigenvalues(&t_gadi)?;
    let (da, dg) = (dominant(&ev_adi), dominant(&ev_gadi));
    Ok(SpectralFactors {
        rho_adi: da.norm(),
        rho_gadi: dg.norm(),
        dominant_adi: (da.re, da.im),
        dominant_gadi: (dg.re, dg.im),
        eigenvalues_adi: ev_adi.iter().map(|l| (l.re, l.im)).collect(),
        eigenvalues_gadi: ev_gadi.iter().map(|l| (l.re, l.im)).collect(),
    })
}

/// `max_λ ½|(2−ω)λ + ω|` over the eigenvalues of `T(α)`.
pub fn mapped_radius(sf: &SpectralFactors, omega: f64) -> f64 {
    sf.eigenvalues_adi
        .iter()
        .map(|&(re, im)| 0.5 * Complex::new((2.0 - omega) * re + omega, (2.0 - omega) * im).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateCase {
    /// `|η|² ≤ c`: relaxation cannot speed up the dominant mode.
    AdiFaster,
    /// `|η|² > c` and `0 < ω < ω_max`: relaxation speeds up the dominant mode.
    GadiFaster { omega_max: f64 },
    /// `|η|² > c` but `ω` lies outside the window; no prediction.
    Undecided { omega_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateVerdict {
    pub case: RateCase,
    /// Whether the full spectra agree with the prediction from the dominant
    /// pair (always true for `Undecided`).
    pub holds: bool,
    /// The dominant pair alone predicts one ordering but another eigenvalue
    /// of `T(α)` reverses it.
    pub subdominant_reverses: bool,
}

/// Compares ADI and GADI rates using the dominant eigenvalue `η = c + di`
/// of `T(α)`.
pub fn rate_verdict(sf: &SpectralFactors, omega: f64) -> RateVerdict {
    let (c, d) = sf.dominant_adi;
    let eta2 = c * c + d * d;
    let case = if eta2 <= c {
        RateCase::AdiFaster
    } else {
        let omega_max = 4.0 * (eta2 - c) / ((1.0 - c).powi(2) + d * d);
        if omega > 0.0 && omega < omega_max && omega_max < 2.0 {
            RateCase::GadiFaster { omega_max }
        } else {
            RateCase::Undecided { omega_max }
        }
    };
    let holds = match case {
        RateCase::AdiFaster => sf.rho_adi <= sf.rho_gadi + 1e-10,
        RateCase::GadiFaster { .. } => sf.rho_gadi < sf.rho_adi,
        RateCase::Undecided { .. } => true,
    };
    RateVerdict { case, holds, subdominant_reverses: !holds }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaTrial {
    pub omega: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaScan {
    pub best: f64,
    pub alpha: f64,
    pub trials: Vec<OmegaTrial>,
}

/// Runs R-GADI once per candidate with the same iteration budget and picks
/// the lowest final residual, ties going to the smaller `ω`.
pub fn omega_scan(p: &LyapProblem, omegas: &[f64], alpha: Shift, budget: usize, opts: &SolveOptions) -> Result<OmegaScan> {
    if omegas.is_empty() {
        return Err(Error::InvalidParameter("no omega candidates".into()));
    }
    let alpha = resolve_alpha(&p.g(), alpha)?;
    let mut trials = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let run_opts = SolveOptions { alpha: Shift::Fixed(alpha), omega, max_iter: budget, ..opts.clone() };
        let s = rgadi(p, &run_opts)?;
        trials.push(OmegaTrial {
            omega,
            iterations: s.iterations,
            converged: s.converged,
            final_residual: s.final_residual().unwrap_or(0.0),
        });
    }
    let key = |t: &OmegaTrial| (t.final_residual, t.omega);
    let best = trials
        .iter()
        .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite residuals"))
        .expect("non-empty")
        .omega;
    Ok(OmegaScan { best, alpha, trials })
}
