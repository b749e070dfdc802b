use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rgadi_core::probgen::Family;
use rgadi_core::Shift;

#[derive(Debug, Parser)]
#[command(name = "rgadi", version, about = "Low-rank GADI solvers for Lyapunov and Riccati equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated problem as Matrix Market files.
    Gen(GenArgs),
    /// Solve FᵀX + XF = CᵀC.
    Lyap(LyapArgs),
    /// Solve AᵀX + XA − XBBᵀX + CᵀC = 0 by Kleinman–Newton.
    Care(CareArgs),
    /// Run R-GADI for each candidate ω with a fixed budget.
    ScanOmega(ScanArgs),
    /// Cross-check the solvers against dense references.
    Verify(VerifyArgs),
    /// Sweep n over a doubling schedule and emit one record per cell.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    R1adi,
    R2adi,
    Gadi,
    Rgadi,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::R1adi => "r1adi",
            Solver::R2adi => "r2adi",
            Solver::Gadi => "gadi",
            Solver::Rgadi => "rgadi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Res,
    Feedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `maxsigma`, `geomeig` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaArg(pub Shift);

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "maxsigma" => Ok(AlphaArg(Shift::MaxSigma)),
            "geomeig" => Ok(AlphaArg(Shift::GeometricEig)),
            other => match other.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(AlphaArg(Shift::Fixed(v))),
                _ => Err(format!("expected maxsigma, geomeig or a positive number, got `{s}`")),
            },
        }
    }
}

/// A single size, a comma list, or `lo..hi` doubling from `lo` up to `hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

impl FromStr for Sizes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad size `{t}`"));
        let sizes = if let Some((lo, hi)) = s.split_once("..") {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo == 0 || lo > hi {
                return Err(format!("empty schedule `{s}`"));
            }
            std::iter::successors(Some(lo), |&n| Some(n * 2)).take_while(|&n| n <= hi).collect()
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if sizes.iter().any(|&n| n < 2) {
            return Err("sizes must be at least 2".into());
        }
        Ok(Sizes(sizes))
    }
}

pub fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the random family.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, default_value = "maxsigma")]
    pub alpha: AlphaArg,
    #[arg(long, default_value_t = 0.015)]
    pub omega: f64,
    /// Second shift of R2-ADI; defaults to the smallest singular value.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    #[arg(long)]
    pub compress_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Record file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Two-column residual history CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LyapArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Coefficient `F` as a Matrix Market file, instead of a family.
    #[arg(long, requires = "rhs", conflicts_with = "family")]
    pub matrix: Option<PathBuf>,
    /// Right-hand-side factor `C` (p x n) as a Matrix Market file.
    #[arg(long, requires = "matrix")]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Solver::Rgadi)]
    pub solver: Solver,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, requires_all = ["b", "c"], conflicts_with = "family")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub c: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CriterionArg::Res)]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = 16)]
    pub inner_max_iter: usize,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,0.015,0.1,0.5,1,1.5")]
    pub omegas: Vec<f64>,
    /// Iterations per candidate.
    #[arg(long, default_value_t = rgadi_core::shifts::DEFAULT_SCAN_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value = "maxsigma")]
    pub alpha: AlphaArg,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, default_value = "128..1024")]
    pub n: Sizes,
    /// Lyapunov solvers; ignored for Riccati families.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gadi,rgadi")]
    pub solvers: Vec<Solver>,
    #[arg(long, value_enum, default_value_t = CriterionArg::Res)]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = 16)]
    pub inner_max_iter: usize,
    /// Cells solved at once.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_schedule() {
        assert_eq!("128..1024".parse::<Sizes>().unwrap().0, vec![128, 256, 512, 1024]);
        assert_eq!("100..300".parse::<Sizes>().unwrap().0, vec![100, 200]);
        assert_eq!("8,12".parse::<Sizes>().unwrap().0, vec![8, 12]);
        assert!("64..8".parse::<Sizes>().is_err());
        assert!("1".parse::<Sizes>().is_err());
    }

    #[test]
    fn alpha_forms() {
        assert_eq!("MaxSigma".parse::<AlphaArg>().unwrap().0, Shift::MaxSigma);
        assert_eq!("geomeig".parse::<AlphaArg>().unwrap().0, Shift::GeometricEig);
        assert_eq!("2.5".parse::<AlphaArg>().unwrap().0, Shift::Fixed(2.5));
        assert!("-1".parse::<AlphaArg>().is_err());
        assert!("auto".parse::<AlphaArg>().is_err());
    }
}
