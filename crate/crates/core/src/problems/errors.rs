use crate::assembly::SpatialIntegrator;
use crate::bspline::{gauss_rule, BasisTable, QuadratureRule, SplineSpace1D};
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

use super::ProblemSpec;

/// Coefficients of a space-time spline function (colexicographic, time slowest).
#[derive(Clone, Debug)]
pub struct DiscreteSolution<T> {
    pub spaces: Vec<SplineSpace1D<T>>,
    pub time_space: SplineSpace1D<T>,
    pub final_time: T,
    pub coeffs: Vec<T>,
}

impl<T: Real> DiscreteSolution<T> {
    pub fn new(
        spaces: Vec<SplineSpace1D<T>>,
        time_space: SplineSpace1D<T>,
        final_time: T,
        coeffs: Vec<T>,
    ) -> Result<Self> {
        let n: usize = spaces.iter().map(|s| s.dim()).product::<usize>() * time_space.dim();
        check_len(n, coeffs.len())?;
        Ok(Self { spaces, time_space, final_time, coeffs })
    }

    pub fn spatial_dofs(&self) -> usize {
        self.spaces.iter().map(|s| s.dim()).product()
    }

    /// Value at parametric point `eta` and normalized time `tau ∈ [0, 1]`.
    pub fn eval_parametric(&self, eta: &[T], tau: T) -> Result<T> {
        check_len(self.spaces.len(), eta.len())?;
        let mut dirs = Vec::with_capacity(eta.len() + 1);
        for (s, &e) in self.spaces.iter().zip(eta).chain(std::iter::once((&self.time_space, &tau))) {
            let (first, vals) = s.knot_vector().eval_basis(e, 0)?;
            let active: Vec<(usize, T)> =
                vals.into_iter().enumerate().filter_map(|(r, v)| s.active_index(first + r).map(|i| (i, v))).collect();
            dirs.push((s.dim(), active));
        }
        // contract one direction at a time
        let mut terms = vec![(0usize, 1usize, T::one())];
        for (n, active) in &dirs {
            let mut next = Vec::with_capacity(terms.len() * active.len());
            for &(idx, stride, w) in &terms {
                for &(i, v) in active {
                    next.push((idx + i * stride, stride * n, w * v));
                }
            }
            terms = next;
        }
        Ok(terms.iter().map(|&(i, _, w)| w * self.coeffs[i]).sum())
    }
}

/// Relative errors of a discrete solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms<T> {
    /// `‖u − u_h‖_{L²(L²)} / ‖u‖_{L²(L²)}`.
    pub l2l2: T,
    /// Relative error in `(‖∇·‖²_{L²(L²)} + ‖∂_t·‖²_{L²(L²)})^{1/2}`.
    pub x_upper: T,
}

/// Relative errors against the exact solution of `problem`, integrated with
/// `p + 3` Gauss points per element and direction.
pub fn compute_errors<T: Real>(sol: &DiscreteSolution<T>, problem: &ProblemSpec<T>) -> Result<ErrorNorms<T>> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("problem '{}' has no exact solution", problem.name)))?;
    let quads: Vec<QuadratureRule<T>> =
        sol.spaces.iter().map(|s| gauss_rule(s.knot_vector(), s.degree() + 3)).collect::<Result<_>>()?;
    let tkv = sol.time_space.knot_vector();
    let tquad = gauss_rule(tkv, sol.time_space.degree() + 3)?;
    let ttable = BasisTable::new(tkv, &tquad);
    let integ = SpatialIntegrator::new(&sol.spaces, &quads, &problem.geometry)?;
    let d = integ.dim();
    let ns = sol.spatial_dofs();
    let nt = sol.time_space.dim();
    let big_t = sol.final_time;
    let inv_t = T::one() / big_t;
    let (mut e0, mut e1, mut u0, mut u1) = (T::zero(), T::zero(), T::zero(), T::zero());
    let mut vals = vec![T::zero(); nt];
    let mut grads = vec![[T::zero(); 3]; nt];
    integ.for_each_element(|el| {
        for pt in &el.points {
            // spatial contraction for every time function
            vals.iter_mut().for_each(|v| *v = T::zero());
            grads.iter_mut().for_each(|g| *g = [T::zero(); 3]);
            for (a, dof) in el.dofs.iter().enumerate() {
                let Some(i) = *dof else { continue };
                let (b, gb) = (pt.values[a], pt.grads[a]);
                for j in 0..nt {
                    let c = sol.coeffs[i + ns * j];
                    vals[j] += c * b;
                    for k in 0..d {
                        grads[j][k] += c * gb[k];
                    }
                }
            }
            let x = &pt.x[..d];
            for q in 0..tquad.num_points() {
                let t = tquad.nodes()[q] * big_t;
                let w = tquad.weights()[q] * big_t * pt.dvol;
                let first = ttable.first(q);
                let (mut uh, mut dth, mut gh) = (T::zero(), T::zero(), [T::zero(); 3]);
                for (r, (&b, &db)) in ttable.values(q).iter().zip(ttable.derivs(q)).enumerate() {
                    let Some(j) = sol.time_space.active_index(first + r) else { continue };
                    uh += b * vals[j];
                    dth += db * inv_t * vals[j];
                    for k in 0..d {
                        gh[k] += b * grads[j][k];
                    }
                }
                let u = exact.value(x, t);
                let du = exact.time_derivative(x, t);
                let gu = exact.gradient(x, t);
                e0 += w * (u - uh) * (u - uh);
                u0 += w * u * u;
                let mut eg = (du - dth) * (du - dth);
                let mut ug = du * du;
                for k in 0..d {
                    eg += (gu[k] - gh[k]) * (gu[k] - gh[k]);
                    ug += gu[k] * gu[k];
                }
                e1 += w * eg;
                u1 += w * ug;
            }
        }
        Ok(())
    })?;
    if !(u0 > T::zero()) || !(u1 > T::zero()) {
        return Err(Error::InvalidArgument("exact solution has zero norm; relative error undefined".into()));
    }
    Ok(ErrorNorms { l2l2: (e0 / u0).sqrt(), x_upper: (e1 / u1).sqrt() })
}
