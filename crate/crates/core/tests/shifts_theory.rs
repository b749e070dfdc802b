use rgadi_core::lyap::GadiDenseStepper;
use rgadi_core::matcore::max_singular_value;
use rgadi_core::oracle::lyap_kron_solve;
use rgadi_core::probgen::{generate_lyap, random_lyap, Family};
use rgadi_core::shifts::{alpha_star, mapped_radius, omega_scan, rate_objective, rate_verdict, spectral_factors, RateCase};
use rgadi_core::{rgadi, LyapProblem, Shift, SolveOptions};

#[test]
fn radius_below_one_and_mapped_from_adi_spectrum() {
    for seed in 0..6 {
        let f = random_lyap(6, 1, seed).unwrap().f.to_dense();
        for alpha in [0.5, 2.0, 5.0, 9.0] {
            for omega in [0.0, 0.4, 1.0, 1.9] {
                let sf = spectral_factors(&f, alpha, omega).unwrap();
                assert!(sf.rho_gadi < 1.0 && sf.rho_adi < 1.0);
                assert!((sf.rho_gadi - mapped_radius(&sf, omega)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn dominant_case_one_means_adi_is_not_slower() {
    let mut seen = 0;
    for seed in 0..10 {
        let f = random_lyap(5, 1, seed).unwrap().f.to_dense();
        for alpha in [1.0, 5.0, 20.0] {
            for omega in [0.015, 0.5, 1.2] {
                let sf = spectral_factors(&f, alpha, omega).unwrap();
                let v = rate_verdict(&sf, omega);
                if v.case == RateCase::AdiFaster {
                    seen += 1;
                    assert!(v.holds && sf.rho_adi <= sf.rho_gadi + 1e-10);
                }
                if let RateCase::GadiFaster { omega_max } = v.case {
                    assert!(omega < omega_max);
                    assert_eq!(v.holds, sf.rho_gadi < sf.rho_adi);
                }
            }
        }
    }
    assert!(seen > 0);
}

fn error_ratios(p: &LyapProblem, alpha: f64, omega: f64, steps: usize) -> Vec<f64> {
    let (f, q) = (p.f.to_dense(), p.q_dense());
    let exact = lyap_kron_solve(&f, &q).unwrap();
    let mut st = GadiDenseStepper::new(&p.g(), q, alpha, omega).unwrap();
    let mut prev = exact.norm();
    (0..steps)
        .map(|_| {
            st.step().unwrap();
            let e = (st.x() - &exact).norm();
            let r = e / prev;
            prev = e;
            r
        })
        .collect()
}

#[test]
fn predicted_rate_bounds_observed_error_decay() {
    let p = generate_lyap(Family::Lyap251, 8).unwrap();
    let alpha = alpha_star(&p.g()).unwrap().alpha_star;
    let sf = spectral_factors(&p.f.to_dense(), alpha, 0.015).unwrap();
    assert!(sf.rho_gadi < 1.0);
    // the all-ones right-hand side misses the slowest mode, so decay is faster
    for r in error_ratios(&p, alpha, 0.015, 5) {
        assert!(r <= sf.rho_gadi, "{r} vs {}", sf.rho_gadi);
    }
    let generic = LyapProblem::new(p.f.clone(), random_lyap(8, 8, 3).unwrap().c).unwrap();
    let ratios = error_ratios(&generic, alpha, 0.015, 6);
    for r in &ratios[2..] {
        assert!(*r <= 2.0 * sf.rho_gadi && *r >= 0.5 * sf.rho_gadi, "{ratios:?} vs {}", sf.rho_gadi);
    }
}

#[test]
fn alpha_star_minimizes_scalar_objective_on_grid() {
    for family in [Family::Lyap251, Family::Lyap252, Family::RandomPositiveReal] {
        let s = alpha_star(&generate_lyap(family, 24).unwrap().g()).unwrap();
        let (mu, nu) = (s.mu, s.nu.unwrap());
        let grid: Vec<f64> = (0..50).map(|i| mu * (0.5 + i as f64 / 49.0)).collect();
        let best = grid.iter().copied().min_by(|a, b| rate_objective(mu, nu, *a).total_cmp(&rate_objective(mu, nu, *b))).unwrap();
        let nearest = grid.iter().copied().min_by(|a, b| (a - mu).abs().total_cmp(&(b - mu).abs())).unwrap();
        assert_eq!(best, nearest);
    }
}

#[test]
fn alpha_star_matches_svd() {
    let p = generate_lyap(Family::Lyap251, 16).unwrap();
    let exact = p.f.to_dense().singular_values().max();
    assert!((alpha_star(&p.g()).unwrap().alpha_star - exact).abs() <= 1e-8 * exact);
    assert_eq!(max_singular_value(&p.g()).unwrap(), alpha_star(&p.g()).unwrap().mu);
}

#[test]
fn omega_scan_picks_lowest_budget_residual() {
    let p = generate_lyap(Family::Lyap252, 32).unwrap();
    let omegas = [0.0, 0.015, 0.5, 1.0];
    let scan = omega_scan(&p, &omegas, Shift::MaxSigma, 8, &SolveOptions::default()).unwrap();
    let direct: Vec<f64> = omegas
        .iter()
        .map(|&omega| {
            let opts = SolveOptions { alpha: Shift::Fixed(scan.alpha), omega, max_iter: 8, ..SolveOptions::default() };
            rgadi(&p, &opts).unwrap().final_residual().unwrap()
        })
        .collect();
    let (i, _) = direct.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert_eq!(scan.best, omegas[i]);
    for (t, r) in scan.trials.iter().zip(&direct) {
        assert_eq!(t.final_residual, *r);
    }
}
