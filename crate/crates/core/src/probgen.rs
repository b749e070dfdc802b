//! Deterministic benchmark problems and seeded random positive-real instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::care::CareProblem;
use crate::error::{Error, Result};
use crate::lyap::LyapProblem;
use crate::matcore::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Tridiagonal `F`: sub 0.2, diagonal 5, super 0.3; `C` all ones.
    Lyap251,
    /// Tridiagonal `F`: sub −2, diagonal 9, super 3; `C` all ones.
    Lyap252,
    /// Tridiagonal `A`: sub 2, diagonal −12, super −3; `B` = 0.2, `C` = 0.1.
    Care341,
    /// Pentadiagonal `A`: bands 1, 2, −12, −3, −2; `B` = 0.2, `C` = 0.1.
    Care342,
    /// Seeded diagonally dominant matrix with positive diagonal.
    RandomPositiveReal,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Lyap251, Family::Lyap252, Family::Care341, Family::Care342, Family::RandomPositiveReal];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lyap251 => "lyap251",
            Family::Lyap252 => "lyap252",
            Family::Care341 => "care341",
            Family::Care342 => "care342",
            Family::RandomPositiveReal => "random",
        }
    }

    pub fn is_care(self) -> bool {
        matches!(self, Family::Care341 | Family::Care342)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_', '.'], "");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key || (key == "randompositivereal" && *f == Family::RandomPositiveReal))
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub family: Family,
    pub n: usize,
    /// Used by the random family only.
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(family: Family, n: usize) -> Self {
        Self { family, n, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Lyap(LyapProblem),
    Care(CareProblem),
}

pub fn generate(spec: &ProblemSpec) -> Result<Problem> {
    if spec.n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {}", spec.n)));
    }
    if spec.family.is_care() {
        generate_care(spec.family, spec.n).map(Problem::Care)
    } else if spec.family == Family::RandomPositiveReal {
        random_lyap(spec.n, 2, spec.seed).map(Problem::Lyap)
    } else {
        generate_lyap(spec.family, spec.n).map(Problem::Lyap)
    }
}

fn lyap_stencil(family: Family) -> Option<&'static [(isize, f64)]> {
    match family {
        Family::Lyap251 => Some(&[(-1, 0.2), (0, 5.0), (1, 0.3)]),
        Family::Lyap252 => Some(&[(-1, -2.0), (0, 9.0), (1, 3.0)]),
        _ => None,
    }
}

fn care_stencil(family: Family) -> Option<&'static [(isize, f64)]> {
    match family {
        Family::Care341 => Some(&[(-1, 2.0), (0, -12.0), (1, -3.0)]),
        Family::Care342 => Some(&[(-2, 1.0), (-1, 2.0), (0, -12.0), (1, -3.0), (2, -2.0)]),
        _ => None,
    }
}

/// One of the fixed Lyapunov families (seed 0 for the random one).
pub fn generate_lyap(family: Family, n: usize) -> Result<LyapProblem> {
    if family == Family::RandomPositiveReal {
        return random_lyap(n, 2, 0);
    }
    let stencil = lyap_stencil(family).ok_or_else(|| Error::UnknownFamily(format!("{family} is not a Lyapunov family")))?;
    LyapProblem::new(SparseMatrix::toeplitz_bands(n, stencil), DenseMatrix::from_element(1, n, 1.0))
}

/// One of the fixed Riccati families (seed 0 for the random one).
pub fn generate_care(family: Family, n: usize) -> Result<CareProblem> {
    if family == Family::RandomPositiveReal {
        return random_care(n, 1, 2, 0);
    }
    let stencil = care_stencil(family).ok_or_else(|| Error::UnknownFamily(format!("{family} is not a Riccati family")))?;
    CareProblem::new(
        SparseMatrix::toeplitz_bands(n, stencil),
        DenseMatrix::from_element(n, 1, 0.2),
        DenseMatrix::from_element(1, n, 0.1),
    )
}

/// Diagonal in `[4.5, 5.5]`, at most two off-diagonal entries per row within
/// distance 3 of the diagonal, each of magnitude below 0.5. Every Gershgorin
/// disc stays in the right half-plane.
pub fn random_positive_real(n: usize, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::with_capacity(3 * n);
    for i in 0..n {
        triplets.push((i, i, rng.random_range(4.5..5.5)));
        for _ in 0..2 {
            let offset = rng.random_range(-3i64..=3) as isize;
            let j = i as isize + offset;
            if offset != 0 && j >= 0 && (j as usize) < n {
                triplets.push((i, j as usize, rng.random_range(-0.5..0.5)));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets).expect("indices in range")
}

fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| scale * rng.random_range(-1.0..1.0))
}

/// Random positive-real `F` with a `p x n` right-hand-side factor.
pub fn random_lyap(n: usize, p: usize, seed: u64) -> Result<LyapProblem> {
    let f = random_positive_real(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    LyapProblem::new(f, random_dense(&mut rng, p.min(n), n, 1.0))
}

/// Random stable `A = −F` with `B` (`n x m`) and `C` (`p x n`).
pub fn random_care(n: usize, m: usize, p: usize, seed: u64) -> Result<CareProblem> {
    let a = random_positive_real(n, seed).scaled(-1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2545_f491_4f6c_dd1d);
    let b = random_dense(&mut rng, n, m, 0.5);
    let c = random_dense(&mut rng, p.min(n), n, 0.5);
    CareProblem::new(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyap251_stencil() {
        let p = generate_lyap(Family::Lyap251, 3).unwrap();
        let expected = DenseMatrix::from_row_slice(3, 3, &[5.0, 0.3, 0.0, 0.2, 5.0, 0.3, 0.0, 0.2, 5.0]);
        assert_eq!(p.f.to_dense(), expected);
        assert_eq!(p.c, DenseMatrix::from_element(1, 3, 1.0));
    }

    #[test]
    fn care341_stencil() {
        let p = generate_care(Family::Care341, 2).unwrap();
        assert_eq!(p.a.to_dense(), DenseMatrix::from_row_slice(2, 2, &[-12.0, -3.0, 2.0, -12.0]));
        assert_eq!(p.b, DenseMatrix::from_element(2, 1, 0.2));
        assert_eq!(p.c, DenseMatrix::from_element(1, 2, 0.1));
    }

    #[test]
    fn care342_is_pentadiagonal() {
        let a = generate_care(Family::Care342, 7).unwrap().a.to_dense();
        assert_eq!(a.row(3).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 2.0, -12.0, -3.0, -2.0, 0.0]);
    }

    #[test]
    fn random_family_is_positive_real_and_seeded() {
        for seed in 0..5 {
            let p = random_lyap(8, 2, seed).unwrap();
            assert!(p.is_positive_real());
            assert_eq!(p, random_lyap(8, 2, seed).unwrap());
        }
        assert_ne!(random_positive_real(8, 1), random_positive_real(8, 2));
    }

    #[test]
    fn fixed_families_are_stable_where_required() {
        for family in [Family::Care341, Family::Care342] {
            let p = generate_care(family, 48).unwrap();
            assert!(p.a.to_dense().complex_eigenvalues().iter().all(|l| l.re < 0.0));
        }
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!("LYAP_251".parse::<Family>().unwrap(), Family::Lyap251);
        assert!(matches!("heat".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(matches!(generate(&ProblemSpec::new(Family::Lyap251, 1)), Err(Error::InvalidParameter(_))));
    }
}
