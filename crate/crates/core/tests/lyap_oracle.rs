mod common;

use common::{lyap_operator, two_norm};
use rgadi_core::lyap::{GadiDenseStepper, R1AdiStepper, R2AdiStepper, RgadiStepper};
use rgadi_core::matcore::{compress_factors, materialize, max_singular_value, min_singular_value, relative_asymmetry};
use rgadi_core::oracle::{adi1_dense_history, adi2_dense_history, lyap_kron_solve};
use rgadi_core::probgen::{generate_lyap, random_lyap, Family};
use rgadi_core::shifts::contraction_bound;
use rgadi_core::{r1_adi, rgadi, Shift, SolveOptions};

#[test]
fn r1_adi_reaches_kronecker_solution() {
    let p = generate_lyap(Family::Lyap251, 16).unwrap();
    let alpha = max_singular_value(&p.g()).unwrap();
    let s = r1_adi(&p, alpha, &SolveOptions { max_iter: 20, ..SolveOptions::default() }).unwrap();
    assert!(s.converged && s.iterations <= 20);
    let exact = lyap_kron_solve(&p.f.to_dense(), &p.q_dense()).unwrap();
    assert!((s.x.to_dense() - &exact).norm() <= 1e-10 * exact.norm());
}

#[test]
fn r2_adi_follows_dense_two_shift_sweeps() {
    let p = generate_lyap(Family::Lyap252, 16).unwrap();
    let alpha = max_singular_value(&p.g()).unwrap();
    let beta = min_singular_value(&p.g()).unwrap();
    let dense = adi2_dense_history(&p.f.to_dense(), &p.q_dense(), alpha, beta, 8).unwrap();
    let mut st = R2AdiStepper::new(&p.g(), &p.c.transpose(), alpha, beta).unwrap();
    for xk in &dense {
        st.step().unwrap();
        assert!((materialize(&st.factors()) - xk).norm() <= 1e-11 * xk.norm());
    }
}

#[test]
fn low_rank_adi_matches_dense_on_random_instances() {
    for seed in 0..4 {
        let p = random_lyap(8, 2, seed).unwrap();
        let (f, q) = (p.f.to_dense(), p.q_dense());
        let (alpha, beta) = (6.0, 4.5);
        let d1 = adi1_dense_history(&f, &q, alpha, 6).unwrap();
        let d2 = adi2_dense_history(&f, &q, alpha, beta, 6).unwrap();
        let mut s1 = R1AdiStepper::new(&p.g(), &p.c.transpose(), alpha).unwrap();
        let mut s2 = R2AdiStepper::new(&p.g(), &p.c.transpose(), alpha, beta).unwrap();
        for k in 0..6 {
            s1.step().unwrap();
            s2.step().unwrap();
            assert!((materialize(&s1.factors()) - &d1[k]).norm() <= 1e-11 * d1[k].norm(), "seed {seed} step {k}");
            assert!((materialize(&s2.factors()) - &d2[k]).norm() <= 1e-11 * d2[k].norm(), "seed {seed} step {k}");
            assert_eq!(s1.factors().width(), (k + 1) * 2);
        }
    }
}

#[test]
fn rgadi_iterates_equal_dense_gadi_up_to_n64() {
    for (n, omega) in [(16, 0.015), (40, 0.7), (64, 1.5)] {
        let p = generate_lyap(Family::Lyap252, n).unwrap();
        let alpha = max_singular_value(&p.g()).unwrap();
        let mut lr = RgadiStepper::new(&p.g(), &p.c.transpose(), alpha, omega).unwrap();
        let mut de = GadiDenseStepper::new(&p.g(), p.q_dense(), alpha, omega).unwrap();
        for _ in 0..6 {
            lr.step().unwrap();
            de.step().unwrap();
            assert!((materialize(&lr.factors()) - de.x()).norm() <= 1e-10 * (1.0 + de.x().norm()));
        }
    }
}

#[test]
fn gadi_error_obeys_contraction_bound() {
    for (family, n) in [(Family::Lyap251, 16), (Family::Lyap252, 24), (Family::RandomPositiveReal, 32)] {
        let p = generate_lyap(family, n).unwrap();
        let (f, q) = (p.f.to_dense(), p.q_dense());
        let exact = lyap_kron_solve(&f, &q).unwrap();
        let alpha = max_singular_value(&p.g()).unwrap();
        let omega = 0.015;
        let b = contraction_bound(&f, alpha, omega).unwrap();
        let mut st = GadiDenseStepper::new(&p.g(), q.clone(), alpha, omega).unwrap();
        for _ in 0..6 {
            let prev = st.x().clone();
            st.step().unwrap();
            let lhs = two_norm(&(st.x() - &exact));
            let rhs = b.delta * two_norm(&(&prev - &exact)) + b.eta * two_norm(&lyap_operator(&f, &prev, &q));
            assert!(lhs <= rhs + 1e-10, "{family}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn compression_preserves_six_step_product() {
    let p = generate_lyap(Family::Lyap251, 32).unwrap();
    let alpha = max_singular_value(&p.g()).unwrap();
    let mut st = RgadiStepper::new(&p.g(), &p.c.transpose(), alpha, 0.015).unwrap();
    for _ in 0..6 {
        st.step().unwrap();
    }
    let f = st.factors();
    assert_eq!(f.width(), 63);
    let c = compress_factors(&f, 1e-12).unwrap();
    assert!(c.width() < f.width());
    let (x, xc) = (materialize(&f), materialize(&c));
    assert!((&x - xc).norm() <= 1e-11 * x.norm());
}

#[test]
fn converged_solutions_are_symmetric_and_below_tolerance() {
    for family in [Family::Lyap251, Family::Lyap252, Family::RandomPositiveReal] {
        let p = generate_lyap(family, 48).unwrap();
        let s = rgadi(&p, &SolveOptions::default()).unwrap();
        assert!(s.converged);
        assert!(s.final_residual().unwrap() < 1e-12);
        assert_eq!(s.residual_history.len(), s.iterations);
        assert!(relative_asymmetry(&s.x.to_dense()) <= 1e-8);
    }
}

#[test]
fn compressed_run_converges_to_same_solution() {
    let p = generate_lyap(Family::Lyap252, 32).unwrap();
    let plain = rgadi(&p, &SolveOptions::default()).unwrap();
    let squeezed = rgadi(&p, &SolveOptions { compress_tol: Some(1e-14), ..SolveOptions::default() }).unwrap();
    assert!(squeezed.converged);
    assert!(squeezed.x.width().unwrap() < plain.x.width().unwrap());
    let (a, b) = (plain.x.to_dense(), squeezed.x.to_dense());
    assert!((&a - b).norm() <= 1e-10 * a.norm());
}

#[test]
fn geometric_shift_on_real_spectrum() {
    let p = generate_lyap(Family::Lyap251, 32).unwrap();
    let s = rgadi(&p, &SolveOptions { alpha: Shift::GeometricEig, ..SolveOptions::default() }).unwrap();
    assert!(s.converged);
    assert!(s.alpha > 4.5 && s.alpha < 5.5);
}
