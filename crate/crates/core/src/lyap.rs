//! Lyapunov solvers for `FᵀX + XF = Q` with `Q = CᵀC`: the one- and
//! two-shift low-rank ADI schemes, dense GADI, and low-rank R-GADI.
//!
//! Every scheme is exposed twice: as a stepper that advances one iterate at a
//! time (used by the equivalence tests and the Newton inner loop) and as a
//! driver that loops until the relative residual drops below `tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::dense::{ensure_finite, hcat, shape, DenseMatrix};
use crate::matcore::lowrank::{compress_factors, materialize, LowRankFactors, DESK_THRESHOLD};
use crate::matcore::norms::spectral_norm;
use crate::matcore::{Coefficient, ShiftedSolver, SparseMatrix};
use crate::shifts::resolve_alpha;

/// Default cap on the entries of one factor (`n · width`), 128 MiB of `f64`.
pub const DEFAULT_FACTOR_ENTRY_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapProblem {
    /// `n x n` coefficient.
    pub f: SparseMatrix,
    /// `p x n` right-hand-side factor.
    pub c: DenseMatrix,
}

impl LyapProblem {
    pub fn new(f: SparseMatrix, c: DenseMatrix) -> Result<Self> {
        if !f.is_square() {
            return Err(Error::dims("square F", format!("{}x{}", f.nrows(), f.ncols())));
        }
        if c.ncols() != f.nrows() {
            return Err(Error::dims(format!("C with {} columns", f.nrows()), shape(&c)));
        }
        if c.nrows() > c.ncols() {
            return Err(Error::InvalidParameter(format!("C has more rows ({}) than columns", c.nrows())));
        }
        ensure_finite(&c)?;
        Ok(Self { f, c })
    }

    pub fn n(&self) -> usize {
        self.f.nrows()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// `Fᵀ`, the matrix that the shifted solves act with.
    pub fn g(&self) -> Coefficient {
        Coefficient::Sparse(self.f.transpose())
    }

    pub fn q_dense(&self) -> DenseMatrix {
        self.c.tr_mul(&self.c)
    }

    /// Whether every eigenvalue of `F` has positive real part. Dense
    /// eigensolve; meant for small `n`.
    pub fn is_positive_real(&self) -> bool {
        self.f.to_dense().complex_eigenvalues().iter().all(|l| l.re > 0.0)
    }
}

/// How the shift `α` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shift {
    Fixed(f64),
    /// Largest singular value of the coefficient.
    MaxSigma,
    /// `√(λ_max λ_min)`; only for coefficients with real spectrum.
    GeometricEig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    RelativeResidual,
    /// Relative change of the feedback `K = XB`; Riccati solves only.
    FeedbackChange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub alpha: Shift,
    pub beta: Option<f64>,
    pub omega: f64,
    pub max_iter: usize,
    /// Sweep cap of the inner Lyapunov solves in the Newton iteration.
    pub inner_max_iter: usize,
    pub tol: f64,
    pub criterion: Criterion,
    pub compress_tol: Option<f64>,
    pub dense_threshold: usize,
    pub factor_entry_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            alpha: Shift::MaxSigma,
            beta: None,
            omega: 0.015,
            max_iter: 50,
            inner_max_iter: 16,
            tol: 1e-12,
            criterion: Criterion::RelativeResidual,
            compress_tol: None,
            dense_threshold: DESK_THRESHOLD,
            factor_entry_cap: DEFAULT_FACTOR_ENTRY_CAP,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..2.0).contains(&self.omega) {
            return Err(Error::InvalidParameter(format!("omega must lie in [0, 2), got {}", self.omega)));
        }
        if let Shift::Fixed(a) = self.alpha {
            check_shift("alpha", a)?;
        }
        if let Some(b) = self.beta {
            check_shift("beta", b)?;
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(t) = self.compress_tol {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!("compression tolerance must be >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

fn check_shift(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// A Lyapunov iterate, either factored or dense.
#[derive(Debug, Clone, PartialEq)]
pub enum Approximation {
    LowRank(LowRankFactors),
    Dense(DenseMatrix),
}

impl Approximation {
    pub fn n(&self) -> usize {
        match self {
            Approximation::LowRank(f) => f.n(),
            Approximation::Dense(d) => d.nrows(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Approximation::LowRank(f) => materialize(f),
            Approximation::Dense(d) => d.clone(),
        }
    }

    pub fn width(&self) -> Option<usize> {
        match self {
            Approximation::LowRank(f) => Some(f.width()),
            Approximation::Dense(_) => None,
        }
    }

    pub fn factors(&self) -> Option<&LowRankFactors> {
        match self {
            Approximation::LowRank(f) => Some(f),
            Approximation::Dense(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapSolution {
    pub x: Approximation,
    pub residual_history: Vec<f64>,
    /// Factor width after each iteration (empty for the dense path).
    pub width_history: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub omega: f64,
}

impl LyapSolution {
    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }
}

/// Relative residual `‖GX + XGᵀ − RRᵀ‖₂ / ‖RRᵀ‖₂` for a fixed equation,
/// with `‖RRᵀ‖₂` computed once.
#[derive(Debug, Clone)]
pub struct ResidualEvaluator {
    g: Coefficient,
    rhs: DenseMatrix,
    dense_threshold: usize,
    q_norm: f64,
}

impl ResidualEvaluator {
    /// `g` is the `n x n` left coefficient, `rhs` the `n x p` factor of `Q`.
    pub fn new(g: Coefficient, rhs: DenseMatrix, dense_threshold: usize) -> Result<Self> {
        let n = g.check_square()?;
        if rhs.nrows() != n {
            return Err(Error::dims(format!("{n} rows"), shape(&rhs)));
        }
        let q_norm = if n <= dense_threshold {
            spectral_norm(&(&rhs * rhs.transpose()))
        } else {
            factored_core_norm(&rhs, &rhs)
        };
        Ok(Self { g, rhs, dense_threshold, q_norm })
    }

    pub fn q_norm(&self) -> f64 {
        self.q_norm
    }

    pub fn eval(&self, x: &Approximation) -> Result<f64> {
        if x.n() != self.rhs.nrows() {
            return Err(Error::dims(format!("{} x {}", self.rhs.nrows(), self.rhs.nrows()), format!("n = {}", x.n())));
        }
        match x {
            Approximation::Dense(d) => self.eval_dense(d),
            Approximation::LowRank(f) if f.n() <= self.dense_threshold => self.eval_dense(&materialize(f)),
            Approximation::LowRank(f) => self.eval_factored(f),
        }
    }

    pub fn eval_dense(&self, x: &DenseMatrix) -> Result<f64> {
        let mut r = self.g.mul(x)?;
        r += self.g.mul(&x.transpose())?.transpose();
        r.gemm(-1.0, &self.rhs, &self.rhs.transpose(), 1.0);
        Ok(self.relative(spectral_norm(&r)))
    }

    /// Never forms an `n x n` matrix: the residual is `U·Zᵀ` with
    /// `U = [GV, V, R]`, `Z = [W, GW, −R]`, reduced by thin QR factorizations.
    pub fn eval_factored(&self, f: &LowRankFactors) -> Result<f64> {
        if f.width() == 0 {
            return Ok(if self.q_norm == 0.0 { 0.0 } else { 1.0 });
        }
        let gv = self.g.mul(f.v())?;
        let gw = self.g.mul(f.w())?;
        let neg = -&self.rhs;
        let u = hcat(&[&gv, f.v(), &self.rhs]);
        let z = hcat(&[f.w(), &gw, &neg]);
        Ok(self.relative(factored_core_norm(&u, &z)))
    }

    fn relative(&self, r: f64) -> f64 {
        if self.q_norm == 0.0 {
            r
        } else {
            r / self.q_norm
        }
    }
}

/// `‖U·Zᵀ‖₂` through `R_U·R_Zᵀ`.
fn factored_core_norm(u: &DenseMatrix, z: &DenseMatrix) -> f64 {
    if u.ncols() == 0 {
        return 0.0;
    }
    let ru = u.clone().qr().r();
    let rz = z.clone().qr().r();
    spectral_norm(&(ru * rz.transpose()))
}

/// `Res(X) = ‖FᵀX + XF − Q‖₂ / ‖Q‖₂`.
pub fn lyap_residual(p: &LyapProblem, x: &Approximation) -> Result<f64> {
    ResidualEvaluator::new(p.g(), p.c.transpose(), DESK_THRESHOLD)?.eval(x)
}

/// Residual through the factored path regardless of size.
pub fn lyap_residual_factored(p: &LyapProblem, f: &LowRankFactors) -> Result<f64> {
    ResidualEvaluator::new(p.g(), p.c.transpose(), 0)?.eval_factored(f)
}

fn check_width(n: usize, width: usize, cap: usize) -> Result<()> {
    if n.saturating_mul(width) > cap {
        Err(Error::WidthCapExceeded { n, width, cap })
    } else {
        Ok(())
    }
}

/// One-shift low-rank ADI: `V₁ = √(2α)(Fᵀ+αI)⁻¹Cᵀ`,
/// `V_k = [(Fᵀ−αI)(Fᵀ+αI)⁻¹V_{k−1}, V₁]`, `X_k = V_kV_kᵀ`.
#[derive(Debug, Clone)]
pub struct R1AdiStepper {
    solver: ShiftedSolver,
    v1: DenseMatrix,
    v: Option<DenseMatrix>,
    steps: usize,
}

impl R1AdiStepper {
    pub fn new(g: &Coefficient, rhs: &DenseMatrix, alpha: f64) -> Result<Self> {
        let solver = ShiftedSolver::new(g, alpha)?;
        let v1 = solver.solve(rhs)? * (2.0 * alpha).sqrt();
        Ok(Self { solver, v1, v: None, steps: 0 })
    }

    pub fn step(&mut self) -> Result<()> {
        let next = match self.v.take() {
            None => self.v1.clone(),
            Some(v) => {
                // (Fᵀ−αI)(Fᵀ+αI)⁻¹ = I − 2α(Fᵀ+αI)⁻¹
                let mut head = self.solver.solve(&v)?;
                head *= -2.0 * self.solver.alpha();
                head += &v;
                hcat(&[&head, &self.v1])
            }
        };
        self.v = Some(next);
        self.steps += 1;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn factors(&self) -> LowRankFactors {
        match &self.v {
            Some(v) => LowRankFactors::symmetric(v.clone()),
            None => LowRankFactors::empty(self.v1.nrows()),
        }
    }

    pub fn width(&self) -> usize {
        self.v.as_ref().map_or(0, |v| v.ncols())
    }
}

/// Two-shift low-rank ADI:
/// `V_k = [(Fᵀ−βI)(Fᵀ+αI)⁻¹V_{k−1}, V₁]`, `W_k = [(Fᵀ+βI)⁻¹(Fᵀ−αI)W_{k−1}, W₁]`.
#[derive(Debug, Clone)]
pub struct R2AdiStepper {
    solver_a: ShiftedSolver,
    solver_b: ShiftedSolver,
    v1: DenseMatrix,
    w1: DenseMatrix,
    vw: Option<(DenseMatrix, DenseMatrix)>,
    steps: usize,
}

impl R2AdiStepper {
    pub fn new(g: &Coefficient, rhs: &DenseMatrix, alpha: f64, beta: f64) -> Result<Self> {
        let solver_a = ShiftedSolver::new(g, alpha)?;
        let solver_b = ShiftedSolver::new(g, beta)?;
        let s = (alpha + beta).sqrt();
        let v1 = solver_a.solve(rhs)? * s;
        let w1 = solver_b.solve(rhs)? * s;
        Ok(Self { solver_a, solver_b, v1, w1, vw: None, steps: 0 })
    }

    pub fn step(&mut self) -> Result<()> {
        let next = match self.vw.take() {
            None => (self.v1.clone(), self.w1.clone()),
            Some((v, w)) => {
                let sum = self.solver_a.alpha() + self.solver_b.alpha();
                let mut vh = self.solver_a.solve(&v)?;
                vh *= -sum;
                vh += &v;
                let mut wh = self.solver_b.solve(&w)?;
                wh *= -sum;
                wh += &w;
                (hcat(&[&vh, &self.v1]), hcat(&[&wh, &self.w1]))
            }
        };
        self.vw = Some(next);
        self.steps += 1;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn factors(&self) -> LowRankFactors {
        match &self.vw {
            Some((v, w)) => LowRankFactors::new(v.clone(), w.clone()).expect("matching widths"),
            None => LowRankFactors::empty(self.v1.nrows()),
        }
    }
}

/// Low-rank GADI on `GX + XGᵀ = RRᵀ` (for the Lyapunov problem `G = Fᵀ`,
/// `R = Cᵀ`). With `s = √((2−ω)α)` and `P = αI + G`:
///
/// `V₁ = W₁ = s·P⁻¹R`,
/// `V_k = [V_{k−1}, s·P⁻¹V_{k−1}, V₁]`,
/// `W_k = [P⁻¹(G − (1−ω)αI)W_{k−1}, s·P⁻¹(αI − G)W_{k−1}, W₁]`.
#[derive(Debug, Clone)]
pub struct RgadiStepper {
    solver: ShiftedSolver,
    omega: f64,
    v1: DenseMatrix,
    factors: Option<LowRankFactors>,
    steps: usize,
    factor_entry_cap: usize,
    compress_tol: Option<f64>,
}

impl RgadiStepper {
    pub fn new(g: &Coefficient, rhs: &DenseMatrix, alpha: f64, omega: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&omega) {
            return Err(Error::InvalidParameter(format!("omega must lie in [0, 2), got {omega}")));
        }
        let solver = ShiftedSolver::new(g, alpha)?;
        let v1 = solver.solve(rhs)? * ((2.0 - omega) * alpha).sqrt();
        Ok(Self { solver, omega, v1, factors: None, steps: 0, factor_entry_cap: usize::MAX, compress_tol: None })
    }

    pub fn with_limits(mut self, factor_entry_cap: usize, compress_tol: Option<f64>) -> Self {
        self.factor_entry_cap = factor_entry_cap;
        self.compress_tol = compress_tol;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.solver.alpha()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn step(&mut self) -> Result<()> {
        let n = self.v1.nrows();
        let next = match self.factors.take() {
            None => LowRankFactors::symmetric(self.v1.clone()),
            Some(prev) => {
                let r = prev.width();
                let p = self.v1.ncols();
                if let Err(e) = check_width(n, 2 * r + p, self.factor_entry_cap) {
                    self.factors = Some(prev);
                    return Err(e);
                }
                let alpha = self.solver.alpha();
                let s = ((2.0 - self.omega) * alpha).sqrt();
                let (v, w) = (prev.v(), prev.w());
                // one multi-column solve for P⁻¹[V, W]
                let both = self.solver.solve(&hcat(&[v, w]))?;
                let pv = both.columns(0, r) * s;
                let z = both.columns(r, r).into_owned();
                // P⁻¹(G − (1−ω)α)W = W − (2−ω)αZ,  s·P⁻¹(α − G)W = s(2αZ − W)
                let w_first = w - &z * ((2.0 - self.omega) * alpha);
                let w_second = (&z * (2.0 * alpha) - w) * s;
                let f = LowRankFactors::concat(&[(v, &w_first), (&pv, &w_second), (&self.v1, &self.v1)])?;
                match self.compress_tol {
                    Some(t) => compress_factors(&f, t)?,
                    None => f,
                }
            }
        };
        self.factors = Some(next);
        self.steps += 1;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn factors(&self) -> LowRankFactors {
        self.factors.clone().unwrap_or_else(|| LowRankFactors::empty(self.v1.nrows()))
    }

    pub fn factors_ref(&self) -> Option<&LowRankFactors> {
        self.factors.as_ref()
    }

    pub fn into_factors(self) -> LowRankFactors {
        let n = self.v1.nrows();
        self.factors.unwrap_or_else(|| LowRankFactors::empty(n))
    }
}

/// Dense GADI on `GX + XGᵀ = Q` from `X₀ = 0`:
///
/// `(αI + G)X_{k+½} = X_k(αI − Gᵀ) + Q`,
/// `X_{k+1}(αI + Gᵀ) = X_k(Gᵀ − (1−ω)αI) + (2−ω)αX_{k+½}`.
#[derive(Debug, Clone)]
pub struct GadiDenseStepper {
    g: Coefficient,
    solver: ShiftedSolver,
    q: DenseMatrix,
    omega: f64,
    x: DenseMatrix,
    steps: usize,
}

impl GadiDenseStepper {
    pub fn new(g: &Coefficient, q: DenseMatrix, alpha: f64, omega: f64) -> Result<Self> {
        Self::with_start(g, q, alpha, omega, None)
    }

    /// Starts from `x0` instead of zero.
    pub fn with_start(g: &Coefficient, q: DenseMatrix, alpha: f64, omega: f64, x0: Option<DenseMatrix>) -> Result<Self> {
        if !(0.0..2.0).contains(&omega) {
            return Err(Error::InvalidParameter(format!("omega must lie in [0, 2), got {omega}")));
        }
        let n = g.check_square()?;
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::dims(format!("{n}x{n}"), shape(&q)));
        }
        let solver = ShiftedSolver::new(g, alpha)?;
        let x = x0.unwrap_or_else(|| DenseMatrix::zeros(n, n));
        Ok(Self { g: g.clone(), solver, q, omega, x, steps: 0 })
    }

    /// `X·Gᵀ`.
    fn times_gt(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.g.mul(&x.transpose())?.transpose())
    }

    pub fn step(&mut self) -> Result<()> {
        let alpha = self.solver.alpha();
        let xgt = self.times_gt(&self.x)?;
        let rhs_half = &self.x * alpha - &xgt + &self.q;
        let half = self.solver.solve(&rhs_half)?;
        let rhs = xgt - &self.x * ((1.0 - self.omega) * alpha) + half * ((2.0 - self.omega) * alpha);
        self.x = self.solver.solve_right_transposed(&rhs)?;
        self.steps += 1;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn into_x(self) -> DenseMatrix {
        self.x
    }
}

fn zero_solution(n: usize, alpha: f64, beta: Option<f64>, omega: f64) -> LyapSolution {
    LyapSolution {
        x: Approximation::LowRank(LowRankFactors::empty(n)),
        residual_history: Vec::new(),
        width_history: Vec::new(),
        iterations: 0,
        converged: true,
        alpha,
        beta,
        omega,
    }
}

fn prepare(p: &LyapProblem, opts: &SolveOptions) -> Result<()> {
    opts.validate()?;
    if opts.criterion != Criterion::RelativeResidual {
        return Err(Error::InvalidParameter("Lyapunov solves stop on the relative residual only".into()));
    }
    if p.n() == 0 {
        return Err(Error::InvalidParameter("empty problem".into()));
    }
    Ok(())
}

/// Drives a low-rank stepper until the residual drops below `tol`.
fn drive<S>(
    p: &LyapProblem,
    opts: &SolveOptions,
    stepper: &mut S,
    mut advance: impl FnMut(&mut S) -> Result<()>,
    current: impl Fn(&S) -> LowRankFactors,
) -> Result<(LowRankFactors, Vec<f64>, Vec<usize>, bool)> {
    let eval = ResidualEvaluator::new(p.g(), p.c.transpose(), opts.dense_threshold)?;
    let mut history = Vec::new();
    let mut widths = Vec::new();
    for _ in 0..opts.max_iter {
        advance(stepper)?;
        let f = current(stepper);
        let res = eval.eval(&Approximation::LowRank(f.clone()))?;
        history.push(res);
        widths.push(f.width());
        if res < opts.tol {
            return Ok((f, history, widths, true));
        }
    }
    Ok((current(stepper), history, widths, false))
}

/// Low-rank one-shift ADI.
pub fn r1_adi(p: &LyapProblem, alpha: f64, opts: &SolveOptions) -> Result<LyapSolution> {
    prepare(p, opts)?;
    check_shift("alpha", alpha)?;
    if p.p() == 0 {
        return Ok(zero_solution(p.n(), alpha, None, 0.0));
    }
    check_width(p.n(), opts.max_iter.saturating_mul(p.p()), opts.factor_entry_cap)?;
    let mut st = R1AdiStepper::new(&p.g(), &p.c.transpose(), alpha)?;
    let (f, residual_history, width_history, converged) = drive(p, opts, &mut st, |s| s.step(), |s| s.factors())?;
    Ok(LyapSolution {
        iterations: residual_history.len(),
        x: Approximation::LowRank(f),
        residual_history,
        width_history,
        converged,
        alpha,
        beta: None,
        omega: 0.0,
    })
}

/// Low-rank two-shift ADI.
pub fn r2_adi(p: &LyapProblem, alpha: f64, beta: f64, opts: &SolveOptions) -> Result<LyapSolution> {
    prepare(p, opts)?;
    check_shift("alpha", alpha)?;
    check_shift("beta", beta)?;
    if p.p() == 0 {
        return Ok(zero_solution(p.n(), alpha, Some(beta), 0.0));
    }
    check_width(p.n(), opts.max_iter.saturating_mul(p.p()), opts.factor_entry_cap)?;
    let mut st = R2AdiStepper::new(&p.g(), &p.c.transpose(), alpha, beta)?;
    let (f, residual_history, width_history, converged) = drive(p, opts, &mut st, |s| s.step(), |s| s.factors())?;
    Ok(LyapSolution {
        iterations: residual_history.len(),
        x: Approximation::LowRank(f),
        residual_history,
        width_history,
        converged,
        alpha,
        beta: Some(beta),
        omega: 0.0,
    })
}

/// Dense GADI; materializes every iterate.
pub fn gadi_dense(p: &LyapProblem, opts: &SolveOptions) -> Result<LyapSolution> {
    prepare(p, opts)?;
    let n = p.n();
    if n > opts.dense_threshold {
        return Err(Error::DenseThresholdExceeded { n, threshold: opts.dense_threshold });
    }
    let alpha = resolve_alpha(&p.g(), opts.alpha)?;
    if p.p() == 0 {
        let mut s = zero_solution(n, alpha, None, opts.omega);
        s.x = Approximation::Dense(DenseMatrix::zeros(n, n));
        return Ok(s);
    }
    let eval = ResidualEvaluator::new(p.g(), p.c.transpose(), opts.dense_threshold)?;
    let mut st = GadiDenseStepper::new(&p.g(), p.q_dense(), alpha, opts.omega)?;
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        st.step()?;
        let res = eval.eval_dense(st.x())?;
        history.push(res);
        if res < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(LyapSolution {
        iterations: history.len(),
        x: Approximation::Dense(st.into_x()),
        residual_history: history,
        width_history: Vec::new(),
        converged,
        alpha,
        beta: None,
        omega: opts.omega,
    })
}

/// Low-rank GADI (R-GADI).
pub fn rgadi(p: &LyapProblem, opts: &SolveOptions) -> Result<LyapSolution> {
    prepare(p, opts)?;
    let alpha = resolve_alpha(&p.g(), opts.alpha)?;
    if p.p() == 0 {
        return Ok(zero_solution(p.n(), alpha, None, opts.omega));
    }
    let mut st = RgadiStepper::new(&p.g(), &p.c.transpose(), alpha, opts.omega)?
        .with_limits(opts.factor_entry_cap, opts.compress_tol);
    let (f, residual_history, width_history, converged) = drive(p, opts, &mut st, |s| s.step(), |s| s.factors())?;
    Ok(LyapSolution {
        iterations: residual_history.len(),
        x: Approximation::LowRank(f),
        residual_history,
        width_history,
        converged,
        alpha,
        beta: None,
        omega: opts.omega,
    })
}
