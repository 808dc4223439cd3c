//! Galerkin matrices, load vectors and separable coefficient approximations.

mod diagonal;
mod geometry;
mod rhs;
mod separation;
mod spatial;
mod univariate;

pub use diagonal::system_diagonal;
pub use geometry::{invert_jacobian, GeometryMap, Jacobian};
pub use rhs::assemble_rhs;
pub use separation::{separate_variables, SeparableCoefficients};
pub use spatial::{
    assemble_spatial_physical, coefficient_diagonal_samples, ElementView, PointData, SpaceFn, SpatialIntegrator,
};
pub use univariate::{assemble_spatial_parametric, assemble_time_matrices, assemble_univariate, Weight};
