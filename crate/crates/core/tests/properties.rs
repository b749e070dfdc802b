use proptest::prelude::*;
use rgadi_core::lyap::{GadiDenseStepper, R1AdiStepper, RgadiStepper};
use rgadi_core::matcore::{compress_factors, materialize, max_singular_value, unvec, vec_of, Coefficient, DenseMatrix, LowRankFactors, ShiftedSolver, SparseMatrix};
use rgadi_core::probgen::{generate, random_lyap, random_positive_real, Family, Problem, ProblemSpec};
use rgadi_core::record::{from_json, read_csv, to_json, write_csv, SCHEMA_VERSION};
use rgadi_core::shifts::spectral_factors;
use rgadi_core::{Criterion, RunRecord};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| DenseMatrix::from_vec(rows, cols, v))
}

fn banded(n: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec((0..n, -2isize..=2, -1.0f64..1.0), 0..3 * n).prop_map(move |entries| {
        let mut t: Vec<_> = (0..n).map(|i| (i, i, 3.0)).collect();
        for (i, off, v) in entries {
            let j = i as isize + off;
            if j >= 0 && (j as usize) < n {
                t.push((i, j as usize, v));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifted_solve_round_trips(
        (m, r) in (2usize..40, 1usize..4).prop_flat_map(|(n, k)| (banded(n), matrix(n, k))),
        alpha in 0.1f64..10.0,
        dense in any::<bool>(),
    ) {
        let c: Coefficient = if dense { m.to_dense().into() } else { m.clone().into() };
        let s = ShiftedSolver::new(&c, alpha).unwrap();
        let y = s.solve(&r).unwrap();
        let back = m.mul_dense(&y).unwrap() + &y * alpha;
        prop_assert!((back - &r).norm() <= 1e-10 * r.norm().max(1e-300));
    }

    #[test]
    fn compression_error_is_bounded(
        (v, w) in (3usize..20, 1usize..8).prop_flat_map(|(n, r)| (matrix(n, r), matrix(n, r))),
        tol in prop::sample::select(vec![0.0, 1e-12, 1e-6, 1e-2, 0.3]),
    ) {
        let f = LowRankFactors::new(v, w).unwrap();
        let c = compress_factors(&f, tol).unwrap();
        prop_assert!(c.width() <= f.width());
        let x = materialize(&f);
        prop_assert!((&x - materialize(&c)).norm() <= tol * x.norm() + 1e-13 * x.norm().max(1.0));
    }

    #[test]
    fn scaled_identity_norm_is_exact(n in 1usize..=256, c in prop::num::f64::NORMAL.prop_filter("moderate", |c| c.abs() > 1e-100 && c.abs() < 1e100)) {
        let m: Coefficient = SparseMatrix::identity(n).scaled(c).into();
        let s = max_singular_value(&m).unwrap();
        prop_assert!((s - c.abs()).abs() <= 1e-12 * c.abs());
    }

    #[test]
    fn vec_unvec_is_identity(x in (1usize..=48, 1usize..=48).prop_flat_map(|(r, c)| matrix(r, c))) {
        let v = vec_of(&x);
        prop_assert_eq!(unvec(v.as_slice(), x.nrows(), x.ncols()), x);
    }

    #[test]
    fn width_law(seed in 0u64..1000, p in 1usize..=3, omega in 0.0f64..1.99) {
        let prob = random_lyap(8, p, seed).unwrap();
        let mut g = RgadiStepper::new(&prob.g(), &prob.c.transpose(), 5.0, omega).unwrap();
        let mut a = R1AdiStepper::new(&prob.g(), &prob.c.transpose(), 5.0).unwrap();
        for k in 1..=8usize {
            g.step().unwrap();
            a.step().unwrap();
            prop_assert_eq!(g.factors().width(), ((1 << k) - 1) * p);
            prop_assert_eq!(a.factors().width(), k * p);
        }
    }

    #[test]
    fn low_rank_equals_dense(seed in 0u64..1000, n in 4usize..16, alpha in 0.5f64..12.0, omega in 0.0f64..1.99) {
        let prob = random_lyap(n, 2, seed).unwrap();
        let mut lr = RgadiStepper::new(&prob.g(), &prob.c.transpose(), alpha, omega).unwrap();
        let mut de = GadiDenseStepper::new(&prob.g(), prob.q_dense(), alpha, omega).unwrap();
        for _ in 0..6 {
            lr.step().unwrap();
            de.step().unwrap();
            prop_assert!((materialize(&lr.factors()) - de.x()).norm() <= 1e-10 * (1.0 + de.x().norm()));
        }
    }

    #[test]
    fn gadi_radius_below_one(seed in 0u64..1000, n in 2usize..6, alpha in 0.1f64..20.0, omega in 0.0f64..1.999) {
        let f = random_positive_real(n, seed).to_dense();
        let sf = spectral_factors(&f, alpha, omega).unwrap();
        prop_assert!(sf.rho_gadi < 1.0);
    }

    #[test]
    fn generators_are_deterministic(n in 2usize..64, seed in any::<u64>(), i in 0usize..5) {
        let spec = ProblemSpec { family: Family::ALL[i], n, seed };
        let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        prop_assert_eq!(&a, &b);
        if let Problem::Care(p) = a {
            prop_assert_eq!(p.m(), 1);
        }
    }

    #[test]
    fn records_round_trip(
        res in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 0..12),
        alpha in prop::num::f64::POSITIVE.prop_filter("finite", |a| a.is_finite()),
        omega in 0.0f64..2.0,
        care in any::<bool>(),
    ) {
        let k = res.len();
        let rec = RunRecord {
            schema_version: SCHEMA_VERSION,
            family: "lyap252".into(),
            n: 128,
            p: 1,
            m: care.then_some(1),
            solver: if care { "kn-rgadi".into() } else { "rgadi".into() },
            alpha,
            omega,
            beta: (!care).then_some(alpha / 3.0),
            criterion: if care { Criterion::FeedbackChange } else { Criterion::RelativeResidual },
            tol: 1e-12,
            compress_tol: None,
            iterations: k,
            inner_iterations: if care { (0..k).collect() } else { vec![] },
            residual_history: res,
            factor_width_history: (0..k).map(|i| (1 << i) - 1).collect(),
            converged: false,
            wall_milliseconds: 0.25,
        };
        prop_assert!(rec.is_consistent());
        let recs = vec![rec];
        prop_assert_eq!(&from_json(&to_json(&recs).unwrap()).unwrap(), &recs);
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        prop_assert_eq!(&read_csv(buf.as_slice()).unwrap(), &recs);
    }
}
