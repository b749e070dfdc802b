//! Kleinman–Newton iteration for `AᵀX + XA − XBBᵀX + CᵀC = 0` with every
//! Newton step's Lyapunov equation solved by low-rank GADI.

use crate::error::{Error, Result};
use crate::lyap::{Approximation, Criterion, GadiDenseStepper, ResidualEvaluator, RgadiStepper, SolveOptions};
use crate::matcore::dense::{eigenvalues, ensure_finite, hcat, shape, DenseMatrix};
use crate::matcore::lowrank::{materialize, LowRankFactors};
use crate::matcore::norms::spectral_norm;
use crate::matcore::{Coefficient, SparseMatrix};
use crate::shifts::{resolve_alpha, EIGEN_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct CareProblem {
    /// `n x n`.
    pub a: SparseMatrix,
    /// `n x m`.
    pub b: DenseMatrix,
    /// `p x n`.
    pub c: DenseMatrix,
}

impl CareProblem {
    pub fn new(a: SparseMatrix, b: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("square A", format!("{}x{}", a.nrows(), a.ncols())));
        }
        let n = a.nrows();
        if b.nrows() != n {
            return Err(Error::dims(format!("B with {n} rows"), shape(&b)));
        }
        if c.ncols() != n {
            return Err(Error::dims(format!("C with {n} columns"), shape(&c)));
        }
        ensure_finite(&b)?;
        ensure_finite(&c)?;
        Ok(Self { a, b, c })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn q_dense(&self) -> DenseMatrix {
        self.c.tr_mul(&self.c)
    }

    pub fn g_dense(&self) -> DenseMatrix {
        &self.b * self.b.transpose()
    }

    /// Maximum real part of the eigenvalues of `A − B·Kᵀ` (dense eigensolve).
    pub fn closed_loop_abscissa(&self, k: &DenseMatrix) -> Result<f64> {
        let cl = self.a.to_dense() - &self.b * k.transpose();
        Ok(eigenvalues(&cl)?.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
    }
}

/// One Newton step's Lyapunov equation `A_kᵀX + XA_k = M_kM_kᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonState {
    pub k: DenseMatrix,
    /// `A_k = B·Kᵀ − A`, kept as sparse plus rank-`m`.
    pub a_k: Coefficient,
    /// `M_k = [K, Cᵀ]`.
    pub m_k: DenseMatrix,
    pub outer_index: usize,
}

impl NewtonState {
    /// `A_kᵀ`, the coefficient the shifted solves act with.
    pub fn g(&self) -> Coefficient {
        self.a_k.transpose()
    }

    pub fn q_dense(&self) -> DenseMatrix {
        &self.m_k * self.m_k.transpose()
    }
}

pub fn kn_step_operator(p: &CareProblem, k: &DenseMatrix) -> Result<NewtonState> {
    if k.shape() != (p.n(), p.m()) {
        return Err(Error::dims(format!("{}x{}", p.n(), p.m()), shape(k)));
    }
    let a_k = Coefficient::sparse_low_rank(p.a.scaled(-1.0), p.b.clone(), k.clone())?;
    let m_k = hcat(&[k, &p.c.transpose()]);
    Ok(NewtonState { k: k.clone(), a_k, m_k, outer_index: 0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolve {
    pub factors: LowRankFactors,
    pub sweeps: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Low-rank GADI on the Newton step's Lyapunov equation, from zero, until
/// the relative Lyapunov residual drops below `opts.tol` or
/// `opts.inner_max_iter` sweeps have run.
pub fn inner_rgadi(state: &NewtonState, alpha_k: f64, omega_k: f64, opts: &SolveOptions) -> Result<InnerSolve> {
    inner_rgadi_to(state, alpha_k, omega_k, opts.tol, opts)
}

pub fn inner_rgadi_to(state: &NewtonState, alpha_k: f64, omega_k: f64, inner_tol: f64, opts: &SolveOptions) -> Result<InnerSolve> {
    let g = state.g();
    let mut stepper =
        RgadiStepper::new(&g, &state.m_k, alpha_k, omega_k)?.with_limits(opts.factor_entry_cap, opts.compress_tol);
    let eval = ResidualEvaluator::new(g, state.m_k.clone(), opts.dense_threshold)?;
    let mut history = Vec::new();
    let mut converged = false;
    while stepper.steps() < opts.inner_max_iter.max(1) {
        stepper.step()?;
        let res = eval.eval(&Approximation::LowRank(stepper.factors()))?;
        history.push(res);
        if res < inner_tol {
            converged = true;
            break;
        }
    }
    Ok(InnerSolve { sweeps: stepper.steps(), factors: stepper.into_factors(), residual_history: history, converged })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution {
    pub factors: LowRankFactors,
    pub k: DenseMatrix,
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    /// Value of the stopping criterion after each outer step.
    pub residual_history: Vec<f64>,
    /// Relative CARE residual after each outer step.
    pub care_residual_history: Vec<f64>,
    /// Relative feedback change after each outer step (`None` when undefined).
    pub feedback_history: Vec<Option<f64>>,
    /// Factor width after each outer step.
    pub width_history: Vec<usize>,
    pub alphas: Vec<f64>,
    pub omega: f64,
    pub converged: bool,
}

/// Inner tolerance for an outer step whose predecessor had CARE residual
/// `outer`: superlinear forcing `min(0.1, r)·r`, floored at `0.1·tol`.
pub fn inner_tolerance(outer: f64, tol: f64) -> f64 {
    (outer.min(0.1) * outer).max(0.1 * tol)
}

/// Kleinman–Newton with low-rank GADI inner solves.
///
/// The initial feedback must make `A − B·K0ᵀ` stable. This is checked with a
/// dense eigensolve when `n` is small enough and trusted otherwise.
pub fn kleinman_newton(p: &CareProblem, k0: &DenseMatrix, opts: &SolveOptions) -> Result<CareSolution> {
    opts.validate()?;
    let n = p.n();
    if k0.shape() != (n, p.m()) {
        return Err(Error::dims(format!("{n}x{}", p.m()), shape(k0)));
    }
    if n <= EIGEN_THRESHOLD {
        let abscissa = p.closed_loop_abscissa(k0)?;
        if !(abscissa < 0.0) {
            return Err(Error::NotStabilizing { max_real_part: abscissa });
        }
    }
    let eval = CareResidual::new(p, opts.dense_threshold)?;
    let mut k = k0.clone();
    let mut sol = CareSolution {
        factors: LowRankFactors::empty(n),
        k: k.clone(),
        outer_iterations: 0,
        inner_iterations: Vec::new(),
        residual_history: Vec::new(),
        care_residual_history: Vec::new(),
        feedback_history: Vec::new(),
        width_history: Vec::new(),
        alphas: Vec::new(),
        omega: opts.omega,
        converged: false,
    };
    let mut outer_res = 1.0;
    for outer in 0..opts.max_iter {
        let mut state = kn_step_operator(p, &k)?;
        state.outer_index = outer;
        let alpha = resolve_alpha(&state.g(), opts.alpha)?;
        let inner = inner_rgadi_to(&state, alpha, opts.omega, inner_tolerance(outer_res, opts.tol), opts)?;
        let f = inner.factors;
        let k_next = f.apply(&p.b)?;
        outer_res = eval.eval(&f)?;
        let change = match feedback_change(&k_next, &k) {
            Ok(v) => Some(v),
            Err(Error::ZeroFeedback) => None,
            Err(e) => return Err(e),
        };
        let criterion = match (opts.criterion, change) {
            (Criterion::FeedbackChange, Some(v)) => v,
            _ => outer_res,
        };
        sol.outer_iterations += 1;
        sol.inner_iterations.push(inner.sweeps);
        sol.residual_history.push(criterion);
        sol.care_residual_history.push(outer_res);
        sol.feedback_history.push(change);
        sol.width_history.push(f.width());
        sol.alphas.push(alpha);
        sol.factors = f;
        k = k_next;
        if criterion < opts.tol {
            sol.converged = true;
            sol.k = k;
            return Ok(sol);
        }
    }
    Err(Error::MaxOuterIterations { iterations: sol.outer_iterations, last: sol.residual_history.last().copied().unwrap_or(f64::INFINITY) })
}

/// Where each dense inner solve starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerStart {
    Zero,
    /// The previous outer iterate.
    Previous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseCareSolution {
    /// Outer iterates `X₁, X₂, …`.
    pub iterates: Vec<DenseMatrix>,
    pub k: DenseMatrix,
    pub inner_iterations: Vec<usize>,
    pub care_residual_history: Vec<f64>,
    pub converged: bool,
}

impl DenseCareSolution {
    pub fn x(&self) -> Option<&DenseMatrix> {
        self.iterates.last()
    }
}

/// Kleinman–Newton with dense GADI inner sweeps, for comparing inner start
/// strategies at small `n`. Shift, forcing and stopping follow
/// [`kleinman_newton`] with the CARE residual as criterion.
pub fn kleinman_newton_dense(p: &CareProblem, k0: &DenseMatrix, opts: &SolveOptions, start: InnerStart) -> Result<DenseCareSolution> {
    opts.validate()?;
    let n = p.n();
    if n > opts.dense_threshold {
        return Err(Error::DenseThresholdExceeded { n, threshold: opts.dense_threshold });
    }
    if k0.shape() != (n, p.m()) {
        return Err(Error::dims(format!("{n}x{}", p.m()), shape(k0)));
    }
    let abscissa = p.closed_loop_abscissa(k0)?;
    if !(abscissa < 0.0) {
        return Err(Error::NotStabilizing { max_real_part: abscissa });
    }
    let eval = CareResidual::new(p, usize::MAX)?;
    let mut sol = DenseCareSolution {
        iterates: Vec::new(),
        k: k0.clone(),
        inner_iterations: Vec::new(),
        care_residual_history: Vec::new(),
        converged: false,
    };
    let mut outer_res = 1.0;
    for _ in 0..opts.max_iter {
        let state = kn_step_operator(p, &sol.k)?;
        let g = state.g();
        let alpha = resolve_alpha(&g, opts.alpha)?;
        let x0 = match start {
            InnerStart::Zero => None,
            InnerStart::Previous => sol.iterates.last().cloned(),
        };
        let inner_eval = ResidualEvaluator::new(g.clone(), state.m_k.clone(), usize::MAX)?;
        let mut stepper = GadiDenseStepper::with_start(&g, state.q_dense(), alpha, opts.omega, x0)?;
        let inner_tol = inner_tolerance(outer_res, opts.tol);
        while stepper.steps() < opts.inner_max_iter.max(1) {
            stepper.step()?;
            if inner_eval.eval_dense(stepper.x())? < inner_tol {
                break;
            }
        }
        sol.inner_iterations.push(stepper.steps());
        let x = stepper.into_x();
        sol.k = &x * &p.b;
        outer_res = eval.eval_dense(&x)?;
        sol.care_residual_history.push(outer_res);
        sol.iterates.push(x);
        if outer_res < opts.tol {
            sol.converged = true;
            return Ok(sol);
        }
    }
    Err(Error::MaxOuterIterations { iterations: sol.iterates.len(), last: outer_res })
}

/// Relative CARE residual with `‖CᵀC‖₂` computed once.
#[derive(Debug, Clone)]
pub struct CareResidual<'a> {
    p: &'a CareProblem,
    dense_threshold: usize,
    q_norm: f64,
}

impl<'a> CareResidual<'a> {
    pub fn new(p: &'a CareProblem, dense_threshold: usize) -> Result<Self> {
        let q_norm = if p.n() <= dense_threshold {
            spectral_norm(&p.q_dense())
        } else {
            let r = p.c.transpose().qr().r();
            spectral_norm(&(&r * r.transpose()))
        };
        Ok(Self { p, dense_threshold, q_norm })
    }

    fn relative(&self, r: f64) -> f64 {
        if self.q_norm == 0.0 {
            r
        } else {
            r / self.q_norm
        }
    }

    pub fn eval(&self, f: &LowRankFactors) -> Result<f64> {
        if f.n() != self.p.n() {
            return Err(Error::dims(format!("n = {}", self.p.n()), format!("n = {}", f.n())));
        }
        if f.n() <= self.dense_threshold {
            self.eval_dense(&materialize(f))
        } else {
            self.eval_factored(f)
        }
    }

    pub fn eval_dense(&self, x: &DenseMatrix) -> Result<f64> {
        let p = self.p;
        if x.shape() != (p.n(), p.n()) {
            return Err(Error::dims(format!("{0}x{0}", p.n()), shape(x)));
        }
        let mut r = p.a.tr_mul_dense(x)?;
        r += p.a.tr_mul_dense(&x.transpose())?.transpose();
        let xb = x * &p.b;
        let btx = p.b.tr_mul(x);
        r.gemm(-1.0, &xb, &btx, 1.0);
        r.gemm_tr(1.0, &p.c, &p.c, 1.0);
        Ok(self.relative(spectral_norm(&r)))
    }

    /// `U·Zᵀ` with `U = [AᵀV, V, −K, Cᵀ]`, `Z = [W, AᵀW, W(VᵀB), Cᵀ]` and
    /// `K = V(WᵀB)`, reduced through thin QR factorizations.
    pub fn eval_factored(&self, f: &LowRankFactors) -> Result<f64> {
        let p = self.p;
        let (v, w) = (f.v(), f.w());
        let k = f.apply(&p.b)?;
        let wvb = w * v.tr_mul(&p.b);
        let ct = p.c.transpose();
        let u = hcat(&[&p.a.tr_mul_dense(v)?, v, &(-k), &ct]);
        let z = hcat(&[w, &p.a.tr_mul_dense(w)?, &wvb, &ct]);
        let ru = u.qr().r();
        let rz = z.qr().r();
        Ok(self.relative(spectral_norm(&(ru * rz.transpose()))))
    }
}

/// `Res(X) = ‖AᵀX + XA − XGX + Q‖₂ / ‖Q‖₂`.
pub fn care_residual(p: &CareProblem, x: &Approximation) -> Result<f64> {
    let eval = CareResidual::new(p, crate::matcore::DESK_THRESHOLD)?;
    match x {
        Approximation::Dense(d) => eval.eval_dense(d),
        Approximation::LowRank(f) => eval.eval(f),
    }
}

pub fn care_residual_dense(p: &CareProblem, x: &DenseMatrix) -> Result<f64> {
    CareResidual::new(p, usize::MAX)?.eval_dense(x)
}

pub fn care_residual_factored(p: &CareProblem, f: &LowRankFactors) -> Result<f64> {
    CareResidual::new(p, 0)?.eval_factored(f)
}

/// `R_s = ‖K_next − K_prev‖₂ / ‖K_next‖₂`.
pub fn feedback_change(k_next: &DenseMatrix, k_prev: &DenseMatrix) -> Result<f64> {
    if k_next.shape() != k_prev.shape() {
        return Err(Error::dims(shape(k_next), shape(k_prev)));
    }
    let denom = spectral_norm(k_next);
    if denom == 0.0 {
        return Err(Error::ZeroFeedback);
    }
    Ok(spectral_norm(&(k_next - k_prev)) / denom)
}
