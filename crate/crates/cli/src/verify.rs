use rgadi_core::care::{care_residual_dense, inner_rgadi, kleinman_newton, kn_step_operator, CareProblem};
use rgadi_core::lyap::{GadiDenseStepper, LyapProblem, R1AdiStepper, R2AdiStepper, RgadiStepper, SolveOptions};
use rgadi_core::matcore::{materialize, max_singular_value, min_singular_value, DenseMatrix};
use rgadi_core::oracle::{adi1_dense_history, adi2_dense_history, care_newton_exact, lyap_kron_solve, KRON_MAX_N};
use rgadi_core::probgen::{generate_care, generate_lyap, random_care, random_lyap, random_positive_real, Family};
use rgadi_core::shifts::{mapped_radius, spectral_factors};
use rgadi_core::{rgadi, Result};

use crate::args::VerifyArgs;
use crate::commands::{Failure, Outcome};

/// Spectral checks assemble `n² x n²` operators; cap their size.
const SPECTRAL_MAX_N: usize = 8;
const STEPS: usize = 6;

struct Row {
    check: &'static str,
    instance: String,
    value: f64,
    tol: f64,
}

impl Row {
    fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn lyap_instances(n: usize) -> Vec<(String, LyapProblem)> {
    vec![
        ("lyap251".into(), generate_lyap(Family::Lyap251, n).unwrap()),
        ("lyap252".into(), generate_lyap(Family::Lyap252, n).unwrap()),
        ("random/0".into(), random_lyap(n, 2, 0).unwrap()),
        ("random/1".into(), random_lyap(n, 1, 1).unwrap()),
    ]
}

fn care_instances(n: usize) -> Vec<(String, CareProblem)> {
    vec![
        ("care341".into(), generate_care(Family::Care341, n).unwrap()),
        ("care342".into(), generate_care(Family::Care342, n).unwrap()),
        ("random/0".into(), random_care(n, 1, 2, 0).unwrap()),
        ("random/1".into(), random_care(n, 2, 2, 1).unwrap()),
    ]
}

fn lyap_rows(name: &str, p: &LyapProblem, rows: &mut Vec<Row>) -> Result<()> {
    let (f, q) = (p.f.to_dense(), p.q_dense());
    let exact = lyap_kron_solve(&f, &q)?;
    let sol = rgadi(p, &SolveOptions::default())?;
    rows.push(Row { check: "rgadi vs kronecker", instance: name.into(), value: rel(&sol.x.to_dense(), &exact), tol: 1e-9 });

    let alpha = max_singular_value(&p.g())?;
    let beta = min_singular_value(&p.g())?;
    let rhs = p.c.transpose();
    let d1 = adi1_dense_history(&f, &q, alpha, STEPS)?;
    let d2 = adi2_dense_history(&f, &q, alpha, beta, STEPS)?;
    let mut s1 = R1AdiStepper::new(&p.g(), &rhs, alpha)?;
    let mut s2 = R2AdiStepper::new(&p.g(), &rhs, alpha, beta)?;
    let mut sg = RgadiStepper::new(&p.g(), &rhs, alpha, 0.015)?;
    let mut dg = GadiDenseStepper::new(&p.g(), q, alpha, 0.015)?;
    let (mut g1, mut g2, mut gg) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..STEPS {
        s1.step()?;
        s2.step()?;
        sg.step()?;
        dg.step()?;
        g1 = g1.max(rel(&materialize(&s1.factors()), &d1[k]));
        g2 = g2.max(rel(&materialize(&s2.factors()), &d2[k]));
        gg = gg.max(rel(&materialize(&sg.factors()), dg.x()));
    }
    rows.push(Row { check: "r1adi vs dense adi", instance: name.into(), value: g1, tol: 1e-10 });
    rows.push(Row { check: "r2adi vs dense adi", instance: name.into(), value: g2, tol: 1e-10 });
    rows.push(Row { check: "rgadi vs dense gadi", instance: name.into(), value: gg, tol: 1e-10 });
    Ok(())
}

fn care_rows(name: &str, p: &CareProblem, rows: &mut Vec<Row>) -> Result<()> {
    let k0 = DenseMatrix::zeros(p.n(), p.m());
    let exact = care_newton_exact(p, &k0)?;
    let sol = kleinman_newton(p, &k0, &SolveOptions::default())?;
    let x = materialize(&sol.factors);
    rows.push(Row { check: "kn-rgadi vs exact newton", instance: name.into(), value: rel(&x, &exact), tol: 1e-8 });
    rows.push(Row { check: "kn-rgadi care residual", instance: name.into(), value: care_residual_dense(p, &x)?, tol: 1e-12 });

    let st = kn_step_operator(p, &(&exact * &p.b))?;
    let alpha = max_singular_value(&st.g())?;
    let mut dense = GadiDenseStepper::new(&st.g(), st.q_dense(), alpha, 0.015)?;
    let mut worst = 0.0f64;
    for sweeps in 1..=STEPS {
        dense.step()?;
        let opts = SolveOptions { tol: 0.0, inner_max_iter: sweeps, ..SolveOptions::default() };
        let lr = inner_rgadi(&st, alpha, 0.015, &opts)?;
        worst = worst.max(rel(&materialize(&lr.factors), dense.x()));
    }
    rows.push(Row { check: "inner rgadi vs dense gadi", instance: name.into(), value: worst, tol: 1e-10 });
    Ok(())
}

fn spectral_rows(n: usize, rows: &mut Vec<Row>) -> Result<()> {
    let n = n.min(SPECTRAL_MAX_N);
    for seed in 0..4 {
        let f = random_positive_real(n, seed).to_dense();
        let mu = f.singular_values().max();
        let (mut excess, mut gap) = (f64::NEG_INFINITY, 0.0f64);
        for scale in [0.5, 1.0, 2.0] {
            for omega in [0.0, 0.015, 1.0, 1.9] {
                let sf = spectral_factors(&f, scale * mu, omega)?;
                excess = excess.max(sf.rho_gadi - 1.0);
                gap = gap.max((sf.rho_gadi - mapped_radius(&sf, omega)).abs());
            }
        }
        let instance = format!("random/{seed} n={n}");
        rows.push(Row { check: "gadi radius below one", instance: instance.clone(), value: excess.max(0.0), tol: 0.0 });
        rows.push(Row { check: "mapped radius identity", instance, value: gap, tol: 1e-10 });
    }
    Ok(())
}

pub fn run(a: &VerifyArgs) -> Outcome {
    if a.n < 2 || a.n > KRON_MAX_N {
        return Err(Failure::usage(format!("verify needs 2 <= n <= {KRON_MAX_N}, got {}", a.n)));
    }
    let mut rows = Vec::new();
    for (name, p) in lyap_instances(a.n) {
        lyap_rows(&name, &p, &mut rows)?;
    }
    for (name, p) in care_instances(a.n) {
        care_rows(&name, &p, &mut rows)?;
    }
    spectral_rows(a.n, &mut rows)?;

    println!("{:<28} {:<16} {:>11} {:>9}  result", "check", "instance", "value", "tol");
    for r in &rows {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        println!("{:<28} {:<16} {:>11.3e} {:>9.0e}  {verdict}", r.check, r.instance, r.value, r.tol);
    }
    let failed = rows.iter().filter(|r| !r.passed()).count();
    println!("{} checks, {failed} failed", rows.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::solver("VerifyFailed", format!("{failed} of {} checks failed", rows.len())))
    }
}
