//! Per-run records for benchmark emission, as JSON or one CSV row per run.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::care::CareSolution;
use crate::error::{Error, Result};
use crate::lyap::{Criterion, LyapSolution};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub family: String,
    pub n: usize,
    pub p: usize,
    /// Input count for Riccati runs.
    pub m: Option<usize>,
    pub solver: String,
    /// Shift of the first (or only) solve.
    pub alpha: f64,
    pub omega: f64,
    pub beta: Option<f64>,
    pub criterion: Criterion,
    pub tol: f64,
    pub compress_tol: Option<f64>,
    /// Outer iterations for Riccati runs.
    pub iterations: usize,
    /// Inner sweeps per outer iteration; empty for Lyapunov runs.
    pub inner_iterations: Vec<usize>,
    pub residual_history: Vec<f64>,
    pub factor_width_history: Vec<usize>,
    pub converged: bool,
    pub wall_milliseconds: f64,
}

impl RunRecord {
    pub fn from_lyap(family: &str, p: usize, solver: &str, sol: &LyapSolution, tol: f64, compress_tol: Option<f64>, wall_milliseconds: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            family: family.to_string(),
            n: sol.x.n(),
            p,
            m: None,
            solver: solver.to_string(),
            alpha: sol.alpha,
            omega: sol.omega,
            beta: sol.beta,
            criterion: Criterion::RelativeResidual,
            tol,
            compress_tol,
            iterations: sol.iterations,
            inner_iterations: Vec::new(),
            residual_history: sol.residual_history.clone(),
            factor_width_history: sol.width_history.clone(),
            converged: sol.converged,
            wall_milliseconds,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_care(
        family: &str,
        p: usize,
        m: usize,
        sol: &CareSolution,
        criterion: Criterion,
        tol: f64,
        compress_tol: Option<f64>,
        wall_milliseconds: f64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            family: family.to_string(),
            n: sol.factors.n(),
            p,
            m: Some(m),
            solver: "kn-rgadi".to_string(),
            alpha: sol.alphas.first().copied().unwrap_or(f64::NAN),
            omega: sol.omega,
            beta: None,
            criterion,
            tol,
            compress_tol,
            iterations: sol.outer_iterations,
            inner_iterations: sol.inner_iterations.clone(),
            residual_history: sol.residual_history.clone(),
            factor_width_history: sol.width_history.clone(),
            converged: sol.converged,
            wall_milliseconds,
        }
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    /// Histories have one entry per (outer) iteration.
    pub fn is_consistent(&self) -> bool {
        self.residual_history.len() == self.iterations
            && self.factor_width_history.len() == self.iterations
            && (self.m.is_none() || self.inner_iterations.len() == self.iterations)
    }
}

pub fn to_json(records: &[RunRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json(s: &str) -> Result<Vec<RunRecord>> {
    serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    schema_version: u32,
    family: String,
    n: usize,
    p: usize,
    m: Option<usize>,
    solver: String,
    alpha: f64,
    omega: f64,
    beta: Option<f64>,
    criterion: String,
    tol: f64,
    compress_tol: Option<f64>,
    iterations: usize,
    inner_iterations: String,
    residual_history: String,
    factor_width_history: String,
    converged: bool,
    wall_milliseconds: f64,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn split<T: std::str::FromStr>(s: &str, field: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|t| t.parse().map_err(|_| Error::Io(format!("bad entry `{t}` in {field}"))))
        .collect()
}

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::RelativeResidual => "res",
        Criterion::FeedbackChange => "feedback",
    }
}

fn criterion_from(s: &str) -> Result<Criterion> {
    match s {
        "res" => Ok(Criterion::RelativeResidual),
        "feedback" => Ok(Criterion::FeedbackChange),
        _ => Err(Error::Io(format!("unknown criterion `{s}`"))),
    }
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            schema_version: r.schema_version,
            family: r.family.clone(),
            n: r.n,
            p: r.p,
            m: r.m,
            solver: r.solver.clone(),
            alpha: r.alpha,
            omega: r.omega,
            beta: r.beta,
            criterion: criterion_name(r.criterion).to_string(),
            tol: r.tol,
            compress_tol: r.compress_tol,
            iterations: r.iterations,
            inner_iterations: join(&r.inner_iterations),
            residual_history: join(&r.residual_history),
            factor_width_history: join(&r.factor_width_history),
            converged: r.converged,
            wall_milliseconds: r.wall_milliseconds,
        }
    }
}

impl TryFrom<CsvRow> for RunRecord {
    type Error = Error;

    fn try_from(r: CsvRow) -> Result<Self> {
        Ok(Self {
            schema_version: r.schema_version,
            family: r.family,
            n: r.n,
            p: r.p,
            m: r.m,
            solver: r.solver,
            alpha: r.alpha,
            omega: r.omega,
            beta: r.beta,
            criterion: criterion_from(&r.criterion)?,
            tol: r.tol,
            compress_tol: r.compress_tol,
            iterations: r.iterations,
            inner_iterations: split(&r.inner_iterations, "inner_iterations")?,
            residual_history: split(&r.residual_history, "residual_history")?,
            factor_width_history: split(&r.factor_width_history, "factor_width_history")?,
            converged: r.converged,
            wall_milliseconds: r.wall_milliseconds,
        })
    }
}

/// Header plus one row per record; list fields are `;`-joined.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    csv::Reader::from_reader(input)
        .deserialize::<CsvRow>()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())).and_then(RunRecord::try_from))
        .collect()
}

/// Two columns, `iteration,residual`, starting at iteration 1.
pub fn write_history_csv<W: Write>(history: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "residual"]).map_err(|e| Error::Io(e.to_string()))?;
    for (i, r) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()]).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
