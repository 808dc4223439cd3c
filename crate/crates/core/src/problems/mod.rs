//! Benchmark problems: geometries, coefficients, manufactured solutions and
//! error norms.

mod catalog;
mod errors;
mod exact;
mod fit;

use std::sync::Arc;

use crate::assembly::GeometryMap;
use crate::scalar::Real;

pub use catalog::{builtin_problem, builtin_problems, BUILTIN_NAMES};
pub use errors::{compute_errors, DiscreteSolution, ErrorNorms};
pub use exact::{AnnulusPolynomial, RevolvedAnnulusPolynomial, SineProduct};
pub use fit::{fit_geometry, FittedGeometry};

pub type SpaceFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type SpaceGradFn<T> = Arc<dyn Fn(&[T]) -> [T; 3] + Send + Sync>;
pub type TimeFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type ForcingFn<T> = Arc<dyn Fn(&[T], T) -> T + Send + Sync>;

/// Coefficient `c(x, t) = c_s(x) c_t(t)`.
#[derive(Clone)]
pub struct SeparableCoefficient<T> {
    pub space: SpaceFn<T>,
    pub space_gradient: SpaceGradFn<T>,
    pub time: TimeFn<T>,
}

#[derive(Clone)]
pub enum Coefficient<T> {
    Constant(T),
    Separable(SeparableCoefficient<T>),
}

impl<T: Real> Coefficient<T> {
    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    /// Spatial factor; a constant is treated as purely spatial.
    pub fn space_value(&self, x: &[T]) -> T {
        match self {
            Self::Constant(c) => *c,
            Self::Separable(s) => (s.space)(x),
        }
    }

    pub fn space_gradient(&self, x: &[T]) -> [T; 3] {
        match self {
            Self::Constant(_) => [T::zero(); 3],
            Self::Separable(s) => (s.space_gradient)(x),
        }
    }

    pub fn time_value(&self, t: T) -> T {
        match self {
            Self::Constant(_) => T::one(),
            Self::Separable(s) => (s.time)(t),
        }
    }

    pub fn value(&self, x: &[T], t: T) -> T {
        self.space_value(x) * self.time_value(t)
    }
}

/// Analytic solution with the derivatives needed for forcing terms and errors.
pub trait ExactSolution<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T], t: T) -> T;
    fn gradient(&self, x: &[T], t: T) -> [T; 3];
    fn time_derivative(&self, x: &[T], t: T) -> T;
    fn laplacian(&self, x: &[T], t: T) -> T;
}

/// Heat problem `γ ∂_t u − ∇·(ν ∇u) = f` on `Ω × (0, T)`.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub name: String,
    pub geometry: GeometryMap<T>,
    /// Maximum deviation of the spline geometry from the analytic map.
    pub geometry_fit_residual: T,
    pub final_time: T,
    pub gamma: Coefficient<T>,
    pub nu: Coefficient<T>,
    pub exact: Option<Arc<dyn ExactSolution<T>>>,
    pub rhs: ForcingFn<T>,
    /// Whether the exact solution vanishes on the lateral boundary and at `t = 0`.
    pub homogeneous: bool,
}

impl<T: Real> ProblemSpec<T> {
    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.gamma.is_constant() && self.nu.is_constant()
    }

    /// Builds a problem whose forcing term is derived from `exact`.
    #[allow(clippy::too_many_arguments)]
    pub fn manufactured(
        name: &str,
        geometry: GeometryMap<T>,
        geometry_fit_residual: T,
        final_time: T,
        gamma: Coefficient<T>,
        nu: Coefficient<T>,
        exact: Arc<dyn ExactSolution<T>>,
        homogeneous: bool,
    ) -> Self {
        let rhs = {
            let (gamma, nu, u) = (gamma.clone(), nu.clone(), exact.clone());
            let f: ForcingFn<T> = Arc::new(move |x: &[T], t: T| {
                let grad_nu = nu.space_gradient(x);
                let grad_u = u.gradient(x, t);
                let flux_div =
                    nu.space_value(x) * u.laplacian(x, t) + (0..x.len()).map(|i| grad_nu[i] * grad_u[i]).sum::<T>();
                gamma.value(x, t) * u.time_derivative(x, t) - nu.time_value(t) * flux_div
            });
            f
        };
        Self {
            name: name.to_string(),
            geometry,
            geometry_fit_residual,
            final_time,
            gamma,
            nu,
            exact: Some(exact),
            rhs,
            homogeneous,
        }
    }
}
