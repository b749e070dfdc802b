//! Fixed problem instances shared by the benchmarks.

use rgadi_core::care::CareProblem;
use rgadi_core::lyap::LyapProblem;
use rgadi_core::matcore::DenseMatrix;
use rgadi_core::probgen::{generate_care, generate_lyap, Family};

/// Sizes swept by the solver benchmarks.
pub const SIZES: [usize; 3] = [64, 128, 256];

pub fn lyap(family: Family, n: usize) -> LyapProblem {
    generate_lyap(family, n).expect("fixed Lyapunov family")
}

pub fn care(family: Family, n: usize) -> CareProblem {
    generate_care(family, n).expect("fixed Riccati family")
}

/// Stabilizing start for the stable Riccati families.
pub fn zero_feedback(p: &CareProblem) -> DenseMatrix {
    DenseMatrix::zeros(p.n(), p.m())
}
