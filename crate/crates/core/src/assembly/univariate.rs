use crate::bspline::{gauss_rule, BasisTable, KnotVector, QuadratureRule, SplineSpace1D};
use crate::error::{Error, Result};
use crate::matrix::BandedMatrix;
use crate::scalar::Real;

/// Weight function of a univariate integral.
#[derive(Clone, Copy)]
pub enum Weight<'a, T> {
    Unit,
    /// One constant per non-empty knot span.
    PerElement(&'a [T]),
    /// Pointwise weight in the parametric coordinate.
    Function(&'a dyn Fn(T) -> T),
}

pub(crate) fn check_matching<T: Real>(kv: &KnotVector<T>, quad: &QuadratureRule<T>) -> Result<()> {
    let bp = kv.breakpoints();
    if quad.num_elements() + 1 != bp.len() {
        return Err(Error::InvalidArgument(format!(
            "quadrature has {} elements but the knot vector has {}",
            quad.num_elements(),
            bp.len() - 1
        )));
    }
    for e in 0..quad.num_elements() {
        let (a, b) = quad.element_bounds(e);
        if a != bp[e] || b != bp[e + 1] {
            return Err(Error::InvalidArgument("quadrature was built on a different knot vector".into()));
        }
    }
    Ok(())
}

/// Banded matrix with entries `∫ w D^{deriv_col} b_j D^{deriv_row} b_i` over the
/// active functions of `space`.
pub fn assemble_univariate<T: Real>(
    space: &SplineSpace1D<T>,
    quad: &QuadratureRule<T>,
    deriv_row: usize,
    deriv_col: usize,
    weight: Weight<'_, T>,
) -> Result<BandedMatrix<T>> {
    if deriv_row > 1 || deriv_col > 1 {
        return Err(Error::InvalidArgument("derivative orders must be 0 or 1".into()));
    }
    let kv = space.knot_vector();
    check_matching(kv, quad)?;
    if let Weight::PerElement(w) = weight {
        crate::error::check_len(quad.num_elements(), w.len())?;
    }
    let table = BasisTable::new(kv, quad);
    let p = kv.degree();
    let ppe = quad.points_per_element();
    let mut mat = BandedMatrix::zeros(space.dim(), p);
    for e in 0..quad.num_elements() {
        for k in 0..ppe {
            let q = e * ppe + k;
            let w = match weight {
                Weight::Unit => T::one(),
                Weight::PerElement(v) => v[e],
                Weight::Function(f) => f(quad.nodes()[q]),
            };
            if !(w > T::zero()) {
                return Err(Error::Assembly(format!("non-positive weight {w} at quadrature node {}", quad.nodes()[q])));
            }
            let dw = w * quad.weights()[q];
            let rows = if deriv_row == 0 { table.values(q) } else { table.derivs(q) };
            let cols = if deriv_col == 0 { table.values(q) } else { table.derivs(q) };
            let first = table.first(q);
            for (a, &ra) in rows.iter().enumerate() {
                let Some(i) = space.active_index(first + a) else { continue };
                for (b, &cb) in cols.iter().enumerate() {
                    if let Some(j) = space.active_index(first + b) {
                        mat.add_to(i, j, dw * ra * cb);
                    }
                }
            }
        }
    }
    Ok(mat)
}

/// Time matrices `W_t` (with `[W_t]_{ij} = ∫ b_j' b_i`) and `M_t` on `(0, T)`
/// for a uniform knot vector of degree `p_t` with `n_el` elements.
pub fn assemble_time_matrices<T: Real>(
    p_t: usize,
    n_el: usize,
    final_time: T,
) -> Result<(BandedMatrix<T>, BandedMatrix<T>)> {
    if !(final_time > T::zero()) {
        return Err(Error::InvalidArgument(format!("final time must be positive, got {final_time}")));
    }
    let space = SplineSpace1D::temporal(KnotVector::uniform(p_t, n_el)?)?;
    let quad = gauss_rule(space.knot_vector(), p_t + 1)?;
    let w = skew_with_boundary_term(&assemble_univariate(&space, &quad, 0, 1, Weight::Unit)?);
    let m = assemble_univariate(&space, &quad, 0, 0, Weight::Unit)?.scale(final_time);
    Ok((w, m))
}

/// Integration by parts gives `W + Wᵀ = e_n e_nᵀ` exactly; averaging the two
/// quadrature evaluations of each off-diagonal pair removes round-off from it.
fn skew_with_boundary_term<T: Real>(w: &BandedMatrix<T>) -> BandedMatrix<T> {
    let n = w.dim();
    let half = T::of(0.5);
    let mut out = BandedMatrix::zeros(n, w.half_bandwidth());
    for i in 0..n {
        for j in w.row_range(i) {
            if i != j {
                out.add_to(i, j, (w.get(i, j) - w.get(j, i)) * half);
            }
        }
    }
    out.add_to(n - 1, n - 1, half);
    out
}

/// Parametric stiffness and mass `(K̂_l, M̂_l)` for every spatial direction.
pub fn assemble_spatial_parametric<T: Real>(
    spaces: &[SplineSpace1D<T>],
    quads: &[QuadratureRule<T>],
) -> Result<Vec<(BandedMatrix<T>, BandedMatrix<T>)>> {
    crate::error::check_len(spaces.len(), quads.len())?;
    spaces
        .iter()
        .zip(quads)
        .map(|(s, q)| {
            Ok((assemble_univariate(s, q, 1, 1, Weight::Unit)?, assemble_univariate(s, q, 0, 0, Weight::Unit)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_linear_time_element() {
        let (w, m) = assemble_time_matrices::<f64>(1, 1, 1.0).unwrap();
        assert!((w.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((m.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hat_function_integrals() {
        let s = SplineSpace1D::spatial(KnotVector::<f64>::uniform(1, 2).unwrap()).unwrap();
        let q = gauss_rule(s.knot_vector(), 2).unwrap();
        let mats = assemble_spatial_parametric(&[s], &[q]).unwrap();
        assert!((mats[0].0.get(0, 0) - 4.0).abs() < 1e-13);
        assert!((mats[0].1.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights_and_foreign_rules() {
        let kv = KnotVector::<f64>::uniform(2, 3).unwrap();
        let s = SplineSpace1D::spatial(kv.clone()).unwrap();
        let q = gauss_rule(&kv, 3).unwrap();
        let w = [1.0, -1.0, 1.0];
        assert!(matches!(assemble_univariate(&s, &q, 0, 0, Weight::PerElement(&w)), Err(Error::Assembly(_))));
        let other = gauss_rule(&KnotVector::<f64>::uniform(2, 4).unwrap(), 3).unwrap();
        assert!(assemble_univariate(&s, &other, 0, 0, Weight::Unit).is_err());
        assert!(assemble_time_matrices::<f64>(1, 2, 0.0).is_err());
    }

    #[test]
    fn per_element_weight_scales_blocks() {
        let kv = KnotVector::<f64>::uniform(1, 2).unwrap();
        let s = SplineSpace1D::new(kv.clone(), false, false).unwrap();
        let q = gauss_rule(&kv, 2).unwrap();
        let m = assemble_univariate(&s, &q, 0, 0, Weight::PerElement(&[2.0, 3.0])).unwrap();
        // first hat lives on element 0 only
        assert!((m.get(0, 0) - 2.0 / 6.0).abs() < 1e-15);
        assert!((m.get(1, 1) - (2.0 + 3.0) / 6.0).abs() < 1e-15);
        let f = |x: f64| 1.0 + x;
        let mf = assemble_univariate(&s, &q, 0, 0, Weight::Function(&f)).unwrap();
        assert!(mf.get(2, 2) > mf.get(0, 0));
    }
}
