mod common;

use common::{care_operator, min_eigenvalue};
use rgadi_core::care::{care_residual_dense, feedback_change, inner_rgadi, kn_step_operator, CareProblem};
use rgadi_core::lyap::GadiDenseStepper;
use rgadi_core::matcore::dense::eigenvalues;
use rgadi_core::matcore::{materialize, max_singular_value, relative_asymmetry, DenseMatrix};
use rgadi_core::oracle::{care_newton_exact, care_newton_exact_history};
use rgadi_core::probgen::{generate_care, random_care, Family};
use rgadi_core::{kleinman_newton, Criterion, SolveOptions};

fn instances() -> Vec<CareProblem> {
    let mut v = vec![
        generate_care(Family::Care341, 8).unwrap(),
        generate_care(Family::Care342, 16).unwrap(),
        generate_care(Family::Care341, 32).unwrap(),
    ];
    v.extend((0..3).map(|s| random_care(12, 2, 2, s).unwrap()));
    v
}

fn zero_k(p: &CareProblem) -> DenseMatrix {
    DenseMatrix::zeros(p.n(), p.m())
}

#[test]
fn matches_exact_newton() {
    for p in instances().into_iter().filter(|p| p.n() <= 16) {
        let exact = care_newton_exact(&p, &zero_k(&p)).unwrap();
        assert!(care_residual_dense(&p, &exact).unwrap() <= 1e-10);
        let s = kleinman_newton(&p, &zero_k(&p), &SolveOptions::default()).unwrap();
        let x = materialize(&s.factors);
        assert!((&x - &exact).norm() <= 1e-9 * exact.norm());
        assert!((&s.k - &x * &p.b).norm() <= 1e-12 * s.k.norm().max(1e-300));
    }
}

#[test]
fn step_matrix_is_positive_real_for_stabilizing_feedback() {
    let p = random_care(8, 2, 2, 7).unwrap();
    let x = care_newton_exact(&p, &zero_k(&p)).unwrap();
    let s = kn_step_operator(&p, &(&x * &p.b)).unwrap();
    assert!(eigenvalues(&s.a_k.to_dense()).unwrap().iter().all(|l| l.re > 0.0));
    assert_eq!(s.m_k.ncols(), p.m() + p.p());
}

#[test]
fn residual_splits_into_inner_residual_and_feedback_gap() {
    for p in instances() {
        let (a, q) = (p.a.to_dense(), p.q_dense());
        let mut x_prev = DenseMatrix::zeros(p.n(), p.n());
        for _ in 0..4 {
            let st = kn_step_operator(&p, &(&x_prev * &p.b)).unwrap();
            let alpha = max_singular_value(&st.g()).unwrap();
            let inner = inner_rgadi(&st, alpha, 0.015, &SolveOptions { tol: 1e-14, inner_max_iter: 20, ..SolveOptions::default() }).unwrap();
            let x = materialize(&inner.factors);
            let a_k = st.a_k.to_dense();
            let lyap = a_k.transpose() * &x + &x * &a_k - st.q_dense();
            let gap = &x_prev * &p.b - &x * &p.b;
            let total = care_operator(&a, &p.b, &p.c, &x) + lyap + &gap * gap.transpose();
            assert!(total.norm() <= 1e-8 * q.norm(), "{}", total.norm());
            let cl = &a - &p.b * p.b.transpose() * &x;
            assert!(eigenvalues(&cl).unwrap().iter().all(|l| l.re < 0.0));
            x_prev = x;
        }
    }
}

#[test]
fn converged_solution_is_stabilizing_and_symmetric() {
    for p in instances() {
        let s = kleinman_newton(&p, &zero_k(&p), &SolveOptions::default()).unwrap();
        assert!(s.converged && *s.care_residual_history.last().unwrap() < 1e-12);
        let x = materialize(&s.factors);
        assert!(relative_asymmetry(&x) <= 1e-8);
        let cl = p.a.to_dense() - &p.b * p.b.transpose() * &x;
        assert!(eigenvalues(&cl).unwrap().iter().all(|l| l.re < 0.0));
        assert_eq!(s.inner_iterations.len(), s.outer_iterations);
    }
}

#[test]
fn exact_newton_is_monotone_with_quadratic_tail() {
    for p in instances().into_iter().filter(|p| p.n() <= 16) {
        let h = care_newton_exact_history(&p, &zero_k(&p)).unwrap();
        for w in h.windows(2) {
            assert!(min_eigenvalue(&(&w[0] - &w[1])) >= -1e-8);
        }
        assert!(min_eigenvalue(&h[0]) >= -1e-8);
        let x = h.last().unwrap();
        let errs: Vec<f64> = h.iter().map(|xk| (xk - x).norm()).filter(|&e| e > 1e-10).collect();
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
        for r in ratios.iter().rev().take(3) {
            assert!(r.is_finite() && *r < 1e3, "{ratios:?}");
        }
    }
}

#[test]
fn inner_factors_follow_dense_inner_sweeps() {
    for p in instances().into_iter().filter(|p| p.n() <= 32) {
        let x1 = care_newton_exact_history(&p, &zero_k(&p)).unwrap().swap_remove(0);
        let st = kn_step_operator(&p, &(&x1 * &p.b)).unwrap();
        let alpha = max_singular_value(&st.g()).unwrap();
        let mut de = GadiDenseStepper::new(&st.g(), st.q_dense(), alpha, 0.3).unwrap();
        for sweeps in 1..=6 {
            de.step().unwrap();
            let opts = SolveOptions { tol: 0.0, inner_max_iter: sweeps, ..SolveOptions::default() };
            let lr = inner_rgadi(&st, alpha, 0.3, &opts).unwrap();
            assert_eq!(lr.sweeps, sweeps);
            assert!((materialize(&lr.factors) - de.x()).norm() <= 1e-10 * (1.0 + de.x().norm()));
        }
    }
}

#[test]
fn feedback_change_decreases_after_second_step() {
    let p = generate_care(Family::Care341, 16).unwrap();
    let opts = SolveOptions { criterion: Criterion::FeedbackChange, tol: 1e-14, ..SolveOptions::default() };
    let s = kleinman_newton(&p, &zero_k(&p), &opts).unwrap();
    let changes: Vec<f64> = s.feedback_history.iter().map(|c| c.unwrap()).collect();
    assert_eq!(changes[0], 1.0);
    for w in changes[1..].windows(2) {
        assert!(w[1] < w[0], "{changes:?}");
    }
    assert_eq!(s.residual_history, changes);
    let x = materialize(&s.factors);
    assert_eq!(feedback_change(&(&x * &p.b), &(&x * &p.b)).unwrap(), 0.0);
}
