use std::sync::Arc;

use crate::assembly::GeometryMap;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::exact::{AnnulusPolynomial, RevolvedAnnulusPolynomial, SineProduct};
use super::fit::fit_geometry;
use super::{Coefficient, ProblemSpec, SeparableCoefficient};

pub const BUILTIN_NAMES: &[&str] =
    &["line", "square", "cube", "annulus", "square_varcoef", "annulus_varcoef", "revolved_annulus"];

const GEOMETRY_DEGREE: usize = 3;
const GEOMETRY_ELEMENTS: usize = 8;

fn quarter_annulus<T: Real>(eta: &[T]) -> [T; 3] {
    let a = T::one() + eta[0];
    let th = T::FRAC_PI_2() * eta[1];
    [a * th.cos(), a * th.sin(), T::zero()]
}

/// Quarter annulus rotated by a quarter turn around the line `x_2 = −1, x_3 = 0`.
fn revolved_quarter_annulus<T: Real>(eta: &[T]) -> [T; 3] {
    let a = T::one() + eta[0];
    let th = T::FRAC_PI_2() * eta[1];
    let phi = T::FRAC_PI_2() * eta[2];
    let dist = T::one() + a * th.sin();
    [a * th.cos(), dist * phi.cos() - T::one(), dist * phi.sin()]
}

/// `ν_s(x) = 1 + 99/2 (1 + |x_2| / |x|)` and `ν_t(t) = 1 + 50 (1 + cos(t / 2π))`.
fn layered_diffusion<T: Real>() -> Coefficient<T> {
    let c = T::of(49.5);
    Coefficient::Separable(SeparableCoefficient {
        space: Arc::new(move |x: &[T]| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            T::one() + c * (T::one() + x[1].abs() / r)
        }),
        space_gradient: Arc::new(move |x: &[T]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let r3 = r2 * r2.sqrt();
            let s = if x[1] < T::zero() { -T::one() } else { T::one() };
            [-c * s * x[1] * x[0] / r3, c * s * x[0] * x[0] / r3, T::zero()]
        }),
        time: Arc::new(|t: T| T::one() + T::of(50.0) * (T::one() + (t / (T::of(2.0) * T::PI())).cos())),
    })
}

/// Builds one of the problems listed in [`BUILTIN_NAMES`].
pub fn builtin_problem<T: Real>(name: &str) -> Result<ProblemSpec<T>> {
    let one = Coefficient::Constant(T::one());
    let final_time = T::one();
    let problem = match name {
        "line" | "square" | "cube" => {
            let d = match name {
                "line" => 1,
                "square" => 2,
                _ => 3,
            };
            ProblemSpec::manufactured(
                name,
                GeometryMap::identity(d)?,
                T::zero(),
                final_time,
                one.clone(),
                one,
                Arc::new(SineProduct { d }),
                true,
            )
        }
        "square_varcoef" => ProblemSpec::manufactured(
            name,
            GeometryMap::identity(2)?,
            T::zero(),
            final_time,
            one,
            layered_diffusion(),
            Arc::new(SineProduct { d: 2 }),
            true,
        ),
        "annulus" | "annulus_varcoef" => {
            let fit = fit_geometry(&quarter_annulus::<T>, 2, GEOMETRY_DEGREE, GEOMETRY_ELEMENTS)?;
            let nu = if name == "annulus" { one.clone() } else { layered_diffusion() };
            ProblemSpec::manufactured(
                name,
                fit.geometry,
                fit.residual,
                final_time,
                one,
                nu,
                Arc::new(AnnulusPolynomial),
                true,
            )
        }
        "revolved_annulus" => {
            let fit = fit_geometry(&revolved_quarter_annulus::<T>, 3, GEOMETRY_DEGREE, GEOMETRY_ELEMENTS)?;
            ProblemSpec::manufactured(
                name,
                fit.geometry,
                fit.residual,
                final_time,
                one.clone(),
                one,
                Arc::new(RevolvedAnnulusPolynomial),
                false,
            )
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown problem '{name}'; available: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(problem)
}

/// Every built-in problem.
pub fn builtin_problems<T: Real>() -> Result<Vec<ProblemSpec<T>>> {
    BUILTIN_NAMES.iter().map(|n| builtin_problem(n)).collect()
}
