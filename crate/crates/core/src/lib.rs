#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
//! Space-time isogeometric discretization of parabolic problems with a
//! fast-diagonalization preconditioner.

pub mod assembly;
pub mod bspline;
pub mod error;
pub mod fdsolve;
pub mod gmres;
pub mod kronop;
pub mod matrix;
pub mod operator;
pub mod pencil;
pub mod problems;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use fdsolve::{ArrowheadSystem, ExtendedFdPreconditioner};
pub use gmres::{GmresOptions, SolveReport};
pub use kronop::{KronSumOperator, Tensor};
pub use operator::LinearOperator;
pub use problems::{DiscreteSolution, ProblemSpec};
pub use scalar::Real;
pub use system::{PreconditionerKind, SpaceTimeSystem};

pub type KnotVector64 = bspline::KnotVector<f64>;
pub type SplineSpace64 = bspline::SplineSpace1D<f64>;
pub type BandedMatrix64 = matrix::BandedMatrix<f64>;
pub type KronSumOperator64 = KronSumOperator<f64>;
pub type ExtendedFdPreconditioner64 = ExtendedFdPreconditioner<f64>;
pub type ProblemSpec64 = ProblemSpec<f64>;
pub type SpaceTimeSystem64 = SpaceTimeSystem<f64>;

pub type KnotVector32 = bspline::KnotVector<f32>;
pub type SplineSpace32 = bspline::SplineSpace1D<f32>;
pub type BandedMatrix32 = matrix::BandedMatrix<f32>;
pub type KronSumOperator32 = KronSumOperator<f32>;
pub type ExtendedFdPreconditioner32 = ExtendedFdPreconditioner<f32>;
pub type ProblemSpec32 = ProblemSpec<f32>;
pub type SpaceTimeSystem32 = SpaceTimeSystem<f32>;

/// Crate version, recorded in benchmark manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
