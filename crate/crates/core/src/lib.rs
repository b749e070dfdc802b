//! Low-rank generalized ADI solvers for large sparse Lyapunov equations
//! `FᵀX + XF = CᵀC` and Kleinman–Newton solvers for continuous-time
//! algebraic Riccati equations `AᵀX + XA − XBBᵀX + CᵀC = 0`.
//!
//! Iterates are kept as factor pairs `X ≈ V·Wᵀ`; dense reference solvers in
//! [`oracle`] cross-check them at small sizes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod care;
pub mod error;
pub mod lyap;
pub mod matcore;
pub mod oracle;
pub mod probgen;
pub mod record;
pub mod shifts;

pub use care::{kleinman_newton, CareProblem, CareSolution};
pub use error::{Error, Result};
pub use lyap::{gadi_dense, r1_adi, r2_adi, rgadi, Approximation, Criterion, LyapProblem, LyapSolution, Shift, SolveOptions};
pub use matcore::{DenseMatrix, LowRankFactors, SparseMatrix};
pub use probgen::{Family, Problem, ProblemSpec};
pub use record::RunRecord;
