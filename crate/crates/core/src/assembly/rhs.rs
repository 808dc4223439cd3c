use crate::bspline::{BasisTable, QuadratureRule, SplineSpace1D};
use crate::error::{check_len, Result};
use crate::scalar::Real;

use super::geometry::GeometryMap;
use super::spatial::SpatialIntegrator;
use super::univariate::check_matching;

/// Space-time load vector `∫∫ f(x, t) B_i(x) b_j(t / T) dx dt` in colexicographic
/// order (time slowest).
#[allow(clippy::too_many_arguments)]
pub fn assemble_rhs<T: Real>(
    spaces: &[SplineSpace1D<T>],
    quads: &[QuadratureRule<T>],
    time_space: &SplineSpace1D<T>,
    time_quad: &QuadratureRule<T>,
    final_time: T,
    geometry: &GeometryMap<T>,
    f: &(dyn Fn(&[T], T) -> T + Sync),
) -> Result<Vec<T>> {
    check_matching(time_space.knot_vector(), time_quad)?;
    let integ = SpatialIntegrator::new(spaces, quads, geometry)?;
    let d = integ.dim();
    let n_s = integ.num_dofs();
    let nq = time_quad.num_points();
    let times: Vec<T> = time_quad.nodes().iter().map(|&tau| tau * final_time).collect();
    // loads[q * n_s + i] = ∫ f(x, t_q) B_i(x) dx
    let mut loads = vec![T::zero(); nq * n_s];
    let mut fx = vec![T::zero(); nq];
    integ.for_each_element(|el| {
        for pt in &el.points {
            for (v, &t) in fx.iter_mut().zip(&times) {
                *v = f(&pt.x[..d], t) * pt.dvol;
            }
            for (a, dof) in el.dofs.iter().enumerate() {
                let Some(i) = *dof else { continue };
                let b = pt.values[a];
                for (q, &v) in fx.iter().enumerate() {
                    loads[q * n_s + i] += v * b;
                }
            }
        }
        Ok(())
    })?;
    let table = BasisTable::new(time_space.knot_vector(), time_quad);
    let n_t = time_space.dim();
    let mut out = vec![T::zero(); n_s * n_t];
    for q in 0..nq {
        let wq = time_quad.weights()[q] * final_time;
        let first = table.first(q);
        for (r, &b) in table.values(q).iter().enumerate() {
            let Some(j) = time_space.active_index(first + r) else { continue };
            let s = wq * b;
            let dst = &mut out[j * n_s..(j + 1) * n_s];
            for (o, &l) in dst.iter_mut().zip(&loads[q * n_s..(q + 1) * n_s]) {
                *o += s * l;
            }
        }
    }
    check_len(n_s * n_t, out.len())?;
    Ok(out)
}
