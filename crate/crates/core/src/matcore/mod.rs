//! Matrix storage, shifted factorizations, low-rank factor containers and
//! norm estimation shared by every solver.

pub mod coefficient;
pub mod dense;
pub mod lowrank;
pub mod mmio;
pub mod norms;
pub mod shifted;
pub mod sparse;

pub use coefficient::Coefficient;
pub use dense::{hcat, relative_asymmetry, symmetrize, unvec, vec_of, DenseMatrix};
pub use lowrank::{compress_factors, materialize, LowRankFactors, DESK_THRESHOLD};
pub use mmio::{read_matrix_market, MarketMatrix};
pub use norms::{max_singular_value, max_singular_value_estimate, max_singular_value_with, min_singular_value, spectral_norm, Lanczos};
pub use shifted::{shifted_factorize, solve_shifted, ShiftedSolver};
pub use sparse::SparseMatrix;
