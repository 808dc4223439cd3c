use crate::assembly::{invert_jacobian, GeometryMap};
use crate::bspline::{gauss_rule, KnotVector};
use crate::error::{Error, Result};
use crate::kronop::{kron_matvec, multi_index, KronFactor};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

/// Spline geometry together with its maximum pointwise deviation from the
/// analytic map on a check grid.
#[derive(Clone, Debug)]
pub struct FittedGeometry<T> {
    pub geometry: GeometryMap<T>,
    pub residual: T,
}

fn uniform_points<T: Real>(n: usize, offset: f64) -> Vec<T> {
    let denom = if offset == 0.0 { (n - 1) as f64 } else { n as f64 };
    (0..n).map(|k| T::of((k as f64 + offset) / denom)).collect()
}

/// Least-squares fit of `map: (0,1)^d → R^d` by a tensor-product spline of
/// degree `p_g` with `n_el` uniform elements per direction.
pub fn fit_geometry<T: Real>(
    map: &dyn Fn(&[T]) -> [T; 3],
    d: usize,
    p_g: usize,
    n_el: usize,
) -> Result<FittedGeometry<T>> {
    if d == 0 || d > 3 {
        return Err(Error::InvalidArgument(format!("geometry dimension must be 1, 2 or 3, got {d}")));
    }
    let kv = KnotVector::<T>::uniform(p_g, n_el)?;
    let m = kv.num_basis();
    let ns = 4 * m + 1;
    let samples: Vec<T> = uniform_points(ns, 0.0);
    // collocation matrix B[k][i] = b_i(η_k) and its pseudo-inverse
    let mut b = nalgebra::DMatrix::<T>::zeros(ns, m);
    for (k, &eta) in samples.iter().enumerate() {
        let (first, vals) = kv.eval_basis(eta, 0)?;
        for (r, v) in vals.into_iter().enumerate() {
            b[(k, first + r)] = v;
        }
    }
    let pinv =
        b.pseudo_inverse(T::eps() * T::of(1e3)).map_err(|e| Error::Geometry(format!("geometry fit failed: {e}")))?;
    let pinv = DenseMatrix::from_nalgebra(&pinv);
    let grid_shape = vec![ns; d];
    let npts = ns.pow(d as u32);
    let mut data = vec![vec![T::zero(); npts]; d];
    for k in 0..npts {
        let idx = multi_index(k, &grid_shape);
        let eta: Vec<T> = idx.iter().map(|&i| samples[i]).collect();
        let x = map(&eta);
        for c in 0..d {
            data[c][k] = x[c];
        }
    }
    let factors: Vec<&dyn KronFactor<T>> = (0..d).map(|_| &pinv as &dyn KronFactor<T>).collect();
    let coords = data.iter().map(|x| kron_matvec(&factors, x)).collect::<Result<Vec<_>>>()?;
    let ncp = m.pow(d as u32);
    let control = (0..ncp)
        .map(|i| {
            let mut p = [T::zero(); 3];
            for c in 0..d {
                p[c] = coords[c][i];
            }
            p
        })
        .collect();
    let geometry = GeometryMap::from_control_points(vec![kv.clone(); d], control)?;

    let nc = 4 * m;
    let check: Vec<T> = uniform_points(nc, 0.5);
    let check_shape = vec![nc; d];
    let mut residual = T::zero();
    for k in 0..nc.pow(d as u32) {
        let eta: Vec<T> = multi_index(k, &check_shape).iter().map(|&i| check[i]).collect();
        let (x, _) = geometry.eval(&eta)?;
        let y = map(&eta);
        let dist = (0..d).map(|c| (x[c] - y[c]) * (x[c] - y[c])).sum::<T>().sqrt();
        residual = residual.max(dist);
    }

    let quad = gauss_rule(&kv, p_g + 1)?;
    let gshape = vec![quad.num_points(); d];
    for k in 0..quad.num_points().pow(d as u32) {
        let eta: Vec<T> = multi_index(k, &gshape).iter().map(|&i| quad.nodes()[i]).collect();
        let (_, jac) = geometry.eval(&eta)?;
        match invert_jacobian(&jac, d) {
            Some((det, _)) if det > T::zero() => {}
            _ => {
                return Err(Error::Geometry(format!(
                    "fitted geometry has a non-positive Jacobian at parametric point {eta:?}"
                )))
            }
        }
    }
    Ok(FittedGeometry { geometry, residual })
}
