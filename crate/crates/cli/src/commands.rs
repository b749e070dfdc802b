use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rgadi_core::care::{kleinman_newton, CareProblem};
use rgadi_core::lyap::{gadi_dense, r1_adi, r2_adi, rgadi, Criterion, LyapProblem, SolveOptions};
use rgadi_core::matcore::mmio::{read_path, write_dense_path, write_sparse_path};
use rgadi_core::matcore::{min_singular_value, DenseMatrix};
use rgadi_core::probgen::{generate, generate_care, generate_lyap, random_care, random_lyap, Family, Problem, ProblemSpec};
use rgadi_core::record::{self, RunRecord};
use rgadi_core::shifts::{omega_scan, resolve_alpha};
use rgadi_core::Error;

use crate::args::{BenchArgs, CareArgs, CriterionArg, Format, GenArgs, LyapArgs, ProblemArgs, ScanArgs, SolveArgs, Solver};

pub const USAGE: u8 = 2;
pub const SOLVER: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    code: u8,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: "Usage".into(), message: message.into(), code: USAGE }
    }

    pub fn solver(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: message.into(), code: SOLVER }
    }

    pub fn code(&self) -> u8 {
        self.code
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::UnknownFamily(_) | Error::MatrixMarket(_) | Error::Io(_) => USAGE,
            _ => SOLVER,
        };
        Self { kind: e.kind().into(), message: e.to_string(), code }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

pub type Outcome = Result<(), Failure>;

fn required(p: &ProblemArgs) -> Result<(Family, usize), Failure> {
    match (p.family, p.n) {
        (Some(f), Some(n)) => Ok((f, n)),
        _ => Err(Failure::usage("either --family with --n or matrix files are required")),
    }
}

fn lyap_problem(p: &ProblemArgs) -> Result<(String, LyapProblem), Failure> {
    let (family, n) = required(p)?;
    let problem = match family {
        Family::RandomPositiveReal => random_lyap(n, 2, p.seed)?,
        f => generate_lyap(f, n)?,
    };
    Ok((family.name().to_string(), problem))
}

fn care_problem(p: &ProblemArgs) -> Result<(String, CareProblem), Failure> {
    let (family, n) = required(p)?;
    let problem = match family {
        Family::RandomPositiveReal => random_care(n, 1, 2, p.seed)?,
        f => generate_care(f, n)?,
    };
    Ok((family.name().to_string(), problem))
}

fn options(s: &SolveArgs) -> SolveOptions {
    SolveOptions {
        alpha: s.alpha.0,
        beta: s.beta,
        omega: s.omega,
        max_iter: s.max_iter,
        tol: s.tol,
        compress_tol: s.compress_tol,
        ..SolveOptions::default()
    }
}

fn criterion(c: CriterionArg) -> Criterion {
    match c {
        CriterionArg::Res => Criterion::RelativeResidual,
        CriterionArg::Feedback => Criterion::FeedbackChange,
    }
}

fn with_sink(out: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Outcome {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit(records: &[RunRecord], out: Option<&Path>, format: Format) -> Outcome {
    with_sink(out, |w| {
        match format {
            Format::Json => writeln!(w, "{}", record::to_json(records)?)?,
            Format::Csv => record::write_csv(records, w)?,
        }
        Ok(())
    })
}

fn emit_history(history: &[f64], out: Option<&Path>) -> Outcome {
    if let Some(path) = out {
        record::write_history_csv(history, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn gen(a: &GenArgs) -> Outcome {
    fs::create_dir_all(&a.out)?;
    let spec = ProblemSpec { family: a.family, n: a.n, seed: a.seed };
    let written = match generate(&spec)? {
        Problem::Lyap(p) => {
            write_sparse_path(&a.out.join("F.mtx"), &p.f)?;
            write_dense_path(&a.out.join("C.mtx"), &p.c)?;
            "F.mtx C.mtx"
        }
        Problem::Care(p) => {
            write_sparse_path(&a.out.join("A.mtx"), &p.a)?;
            write_dense_path(&a.out.join("B.mtx"), &p.b)?;
            write_dense_path(&a.out.join("C.mtx"), &p.c)?;
            "A.mtx B.mtx C.mtx"
        }
    };
    eprintln!("wrote {written} to {}", a.out.display());
    Ok(())
}

pub fn solve_lyap(p: &LyapProblem, solver: Solver, opts: &SolveOptions) -> rgadi_core::Result<rgadi_core::LyapSolution> {
    match solver {
        Solver::R1adi => r1_adi(p, resolve_alpha(&p.g(), opts.alpha)?, opts),
        Solver::R2adi => {
            let alpha = resolve_alpha(&p.g(), opts.alpha)?;
            let beta = match opts.beta {
                Some(b) => b,
                None => min_singular_value(&p.g())?,
            };
            r2_adi(p, alpha, beta, opts)
        }
        Solver::Gadi => gadi_dense(p, opts),
        Solver::Rgadi => rgadi(p, opts),
    }
}

pub fn lyap(a: &LyapArgs) -> Outcome {
    let (family, p) = match (&a.matrix, &a.rhs) {
        (Some(f), Some(c)) => ("file".to_string(), LyapProblem::new(read_path(f)?.to_sparse(), read_path(c)?.to_dense())?),
        _ => lyap_problem(&a.problem)?,
    };
    let opts = options(&a.solve);
    let t = Instant::now();
    let sol = solve_lyap(&p, a.solver, &opts)?;
    let rec = RunRecord::from_lyap(&family, p.p(), a.solver.name(), &sol, opts.tol, opts.compress_tol, millis(t));
    emit(std::slice::from_ref(&rec), a.output.out.as_deref(), a.output.format)?;
    emit_history(&sol.residual_history, a.output.history.as_deref())?;
    let last = sol.final_residual().unwrap_or(0.0);
    eprintln!("{} n={} iterations={} residual={last:e} converged={}", a.solver.name(), p.n(), sol.iterations, sol.converged);
    if sol.converged {
        Ok(())
    } else {
        Err(Error::MaxIterations { iterations: sol.iterations, last }.into())
    }
}

pub fn care(a: &CareArgs) -> Outcome {
    let (family, p) = match (&a.a, &a.b, &a.c) {
        (Some(am), Some(bm), Some(cm)) => (
            "file".to_string(),
            CareProblem::new(read_path(am)?.to_sparse(), read_path(bm)?.to_dense(), read_path(cm)?.to_dense())?,
        ),
        _ => care_problem(&a.problem)?,
    };
    let opts = SolveOptions { criterion: criterion(a.criterion), inner_max_iter: a.inner_max_iter, ..options(&a.solve) };
    let t = Instant::now();
    let sol = kleinman_newton(&p, &DenseMatrix::zeros(p.n(), p.m()), &opts)?;
    let rec = RunRecord::from_care(&family, p.p(), p.m(), &sol, opts.criterion, opts.tol, opts.compress_tol, millis(t));
    emit(std::slice::from_ref(&rec), a.output.out.as_deref(), a.output.format)?;
    emit_history(&sol.residual_history, a.output.history.as_deref())?;
    eprintln!(
        "kn-rgadi n={} outer={} inner={:?} residual={:e}",
        p.n(),
        sol.outer_iterations,
        sol.inner_iterations,
        sol.care_residual_history.last().copied().unwrap_or(0.0)
    );
    Ok(())
}

pub fn scan_omega(a: &ScanArgs) -> Outcome {
    let (_, p) = lyap_problem(&a.problem)?;
    let opts = SolveOptions { tol: a.tol, ..SolveOptions::default() };
    let scan = omega_scan(&p, &a.omegas, a.alpha.0, a.budget, &opts)?;
    with_sink(a.out.as_deref(), |w| {
        match a.format {
            Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&scan).map_err(|e| Error::Io(e.to_string()))?)?,
            Format::Csv => {
                let mut c = csv::Writer::from_writer(w);
                for t in &scan.trials {
                    c.serialize(t).map_err(|e| Error::Io(e.to_string()))?;
                }
                c.flush()?;
            }
        }
        Ok(())
    })?;
    eprintln!("best omega={} alpha={:e}", scan.best, scan.alpha);
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Lyap(usize, Solver),
    Care(usize),
}

fn run_cell(a: &BenchArgs, cell: Cell) -> Result<RunRecord, Failure> {
    let problem = ProblemArgs { family: Some(a.family), n: None, seed: 0 };
    let opts = options(&a.solve);
    match cell {
        Cell::Lyap(n, solver) => {
            let (family, p) = lyap_problem(&ProblemArgs { n: Some(n), ..problem })?;
            let t = Instant::now();
            let sol = solve_lyap(&p, solver, &opts)?;
            Ok(RunRecord::from_lyap(&family, p.p(), solver.name(), &sol, opts.tol, opts.compress_tol, millis(t)))
        }
        Cell::Care(n) => {
            let (family, p) = care_problem(&ProblemArgs { n: Some(n), ..problem })?;
            let opts = SolveOptions { criterion: criterion(a.criterion), inner_max_iter: a.inner_max_iter, ..opts };
            let t = Instant::now();
            let sol = kleinman_newton(&p, &DenseMatrix::zeros(p.n(), p.m()), &opts)?;
            Ok(RunRecord::from_care(&family, p.p(), p.m(), &sol, opts.criterion, opts.tol, opts.compress_tol, millis(t)))
        }
    }
}

fn cell_label(cell: Cell) -> String {
    match cell {
        Cell::Lyap(n, s) => format!("n={n} solver={}", s.name()),
        Cell::Care(n) => format!("n={n} solver=kn-rgadi"),
    }
}

pub fn bench(a: &BenchArgs) -> Outcome {
    if a.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    let cells: Vec<Cell> = if a.family.is_care() {
        a.n.0.iter().map(|&n| Cell::Care(n)).collect()
    } else {
        a.n.0.iter().flat_map(|&n| a.solvers.iter().map(move |&s| Cell::Lyap(n, s))).collect()
    };
    let results: Vec<Mutex<Option<Result<RunRecord, Failure>>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.min(cells.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&cell) = cells.get(i) else { break };
                let r = run_cell(a, cell);
                *results[i].lock().expect("no poisoned cell") = Some(r);
            });
        }
    });
    let mut records = Vec::new();
    let mut failed = None;
    for (cell, slot) in cells.iter().zip(results) {
        match slot.into_inner().expect("no poisoned cell").expect("every cell ran") {
            Ok(r) => {
                eprintln!(
                    "{} iterations={} residual={:e} ms={:.1}",
                    cell_label(*cell),
                    r.iterations,
                    r.final_residual().unwrap_or(0.0),
                    r.wall_milliseconds
                );
                records.push(r);
            }
            Err(f) => {
                eprintln!("error kind={} cell=\"{}\" message={:?}", f.kind, cell_label(*cell), f.message);
                failed = Some(f);
            }
        }
    }
    emit(&records, a.out.as_deref(), a.format)?;
    match failed {
        None => Ok(()),
        Some(f) => Err(Failure::solver(f.kind, "one or more bench cells failed")),
    }
}
