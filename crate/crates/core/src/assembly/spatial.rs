use crate::bspline::{BasisTable, QuadratureRule, SplineSpace1D};
use crate::error::{check_len, Error, Result};
use crate::kronop::{multi_index, Tensor};
use crate::matrix::CsrMatrix;
use crate::scalar::Real;

use super::geometry::{invert_jacobian, GeometryMap};
use super::univariate::check_matching;

/// Spatial coefficient `x ↦ c(x)`; `x` has length `d`.
pub type SpaceFn<'a, T> = &'a (dyn Fn(&[T]) -> T + Sync);

/// Data of one quadrature point of a physical element.
#[derive(Clone, Debug)]
pub struct PointData<T> {
    pub eta: [T; 3],
    pub x: [T; 3],
    /// Quadrature weight times `|det J|`.
    pub dvol: T,
    /// Values of the local basis functions.
    pub values: Vec<T>,
    /// Physical gradients of the local basis functions.
    pub grads: Vec<[T; 3]>,
}

/// One element of the tensor mesh with its quadrature data.
#[derive(Clone, Debug)]
pub struct ElementView<T> {
    pub index: Vec<usize>,
    /// Active global index of each local function (colexicographic over
    /// directions), `None` for eliminated boundary functions.
    pub dofs: Vec<Option<usize>>,
    pub points: Vec<PointData<T>>,
}

/// Element-by-element quadrature over a mapped tensor-product spline space.
pub struct SpatialIntegrator<'a, T> {
    spaces: &'a [SplineSpace1D<T>],
    quads: &'a [QuadratureRule<T>],
    tables: Vec<BasisTable<T>>,
    geometry: &'a GeometryMap<T>,
}

impl<'a, T: Real> SpatialIntegrator<'a, T> {
    pub fn new(
        spaces: &'a [SplineSpace1D<T>],
        quads: &'a [QuadratureRule<T>],
        geometry: &'a GeometryMap<T>,
    ) -> Result<Self> {
        check_len(geometry.dim(), spaces.len())?;
        check_len(spaces.len(), quads.len())?;
        for (s, q) in spaces.iter().zip(quads) {
            check_matching(s.knot_vector(), q)?;
        }
        let tables = spaces.iter().zip(quads).map(|(s, q)| BasisTable::new(s.knot_vector(), q)).collect();
        Ok(Self { spaces, quads, tables, geometry })
    }

    pub fn dim(&self) -> usize {
        self.spaces.len()
    }

    /// Number of active spatial functions `N_s`.
    pub fn num_dofs(&self) -> usize {
        self.spaces.iter().map(|s| s.dim()).product()
    }

    pub fn element_shape(&self) -> Vec<usize> {
        self.quads.iter().map(|q| q.num_elements()).collect()
    }

    /// Visits every element in colexicographic order.
    pub fn for_each_element(&self, mut visit: impl FnMut(&ElementView<T>) -> Result<()>) -> Result<()> {
        let d = self.dim();
        let el_shape = self.element_shape();
        let loc_shape: Vec<usize> = self.spaces.iter().map(|s| s.degree() + 1).collect();
        let pt_shape: Vec<usize> = self.quads.iter().map(|q| q.points_per_element()).collect();
        let nloc: usize = loc_shape.iter().product();
        let npts: usize = pt_shape.iter().product();
        let n_el: usize = el_shape.iter().product();
        let locs: Vec<Vec<usize>> = (0..nloc).map(|a| multi_index(a, &loc_shape)).collect();
        let pts: Vec<Vec<usize>> = (0..npts).map(|k| multi_index(k, &pt_shape)).collect();
        let dims: Vec<usize> = self.spaces.iter().map(|s| s.dim()).collect();
        for e in 0..n_el {
            let ei = multi_index(e, &el_shape);
            let firsts: Vec<usize> = (0..d).map(|l| self.tables[l].first(ei[l] * pt_shape[l])).collect();
            let dofs = locs
                .iter()
                .map(|loc| {
                    let mut gi = 0;
                    for l in (0..d).rev() {
                        gi = gi * dims[l] + self.spaces[l].active_index(firsts[l] + loc[l])?;
                    }
                    Some(gi)
                })
                .collect();
            let mut points = Vec::with_capacity(npts);
            for k in &pts {
                let q: Vec<usize> = (0..d).map(|l| ei[l] * pt_shape[l] + k[l]).collect();
                let mut eta = [T::zero(); 3];
                let mut w = T::one();
                for l in 0..d {
                    eta[l] = self.quads[l].nodes()[q[l]];
                    w *= self.quads[l].weights()[q[l]];
                }
                let (x, jac) = self.geometry.eval(&eta[..d])?;
                let (det, inv) = invert_jacobian(&jac, d).filter(|(det, _)| *det > T::zero()).ok_or_else(|| {
                    Error::Geometry(format!("non-positive Jacobian determinant at parametric point {:?}", &eta[..d]))
                })?;
                let mut values = Vec::with_capacity(nloc);
                let mut grads = Vec::with_capacity(nloc);
                for loc in &locs {
                    let mut v = T::one();
                    let mut gref = [T::zero(); 3];
                    for l in 0..d {
                        v *= self.tables[l].values(q[l])[loc[l]];
                    }
                    for (j, g) in gref.iter_mut().enumerate().take(d) {
                        let mut prod = T::one();
                        for l in 0..d {
                            prod *= if l == j {
                                self.tables[l].derivs(q[l])[loc[l]]
                            } else {
                                self.tables[l].values(q[l])[loc[l]]
                            };
                        }
                        *g = prod;
                    }
                    // ∇_x = J^{-T} ∇_η
                    let mut gx = [T::zero(); 3];
                    for (i, gxi) in gx.iter_mut().enumerate().take(d) {
                        *gxi = (0..d).map(|j| inv[j][i] * gref[j]).sum();
                    }
                    values.push(v);
                    grads.push(gx);
                }
                points.push(PointData { eta, x, dvol: w * det, values, grads });
            }
            visit(&ElementView { index: ei, dofs, points })?;
        }
        Ok(())
    }
}

fn eval_coefficient<T: Real>(c: Option<SpaceFn<'_, T>>, x: &[T], what: &str) -> Result<T> {
    let v = c.map_or(T::one(), |f| f(x));
    if v > T::zero() {
        Ok(v)
    } else {
        Err(Error::Assembly(format!("non-positive {what} coefficient {v} at {x:?}")))
    }
}

/// Physical stiffness `∫ ν_s ∇B_i·∇B_j` and mass `∫ γ_s B_i B_j`.
pub fn assemble_spatial_physical<T: Real>(
    spaces: &[SplineSpace1D<T>],
    quads: &[QuadratureRule<T>],
    geometry: &GeometryMap<T>,
    nu_s: Option<SpaceFn<'_, T>>,
    gamma_s: Option<SpaceFn<'_, T>>,
) -> Result<(CsrMatrix<T>, CsrMatrix<T>)> {
    let integ = SpatialIntegrator::new(spaces, quads, geometry)?;
    let d = integ.dim();
    let n = integ.num_dofs();
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    integ.for_each_element(|el| {
        let nloc = el.dofs.len();
        let mut kloc = vec![T::zero(); nloc * nloc];
        let mut mloc = vec![T::zero(); nloc * nloc];
        for pt in &el.points {
            let nu = eval_coefficient(nu_s, &pt.x[..d], "diffusion")? * pt.dvol;
            let ga = eval_coefficient(gamma_s, &pt.x[..d], "capacity")? * pt.dvol;
            for a in 0..nloc {
                for b in 0..nloc {
                    let g: T = (0..d).map(|i| pt.grads[a][i] * pt.grads[b][i]).sum();
                    kloc[a * nloc + b] += nu * g;
                    mloc[a * nloc + b] += ga * pt.values[a] * pt.values[b];
                }
            }
        }
        for (a, ia) in el.dofs.iter().enumerate() {
            let Some(i) = *ia else { continue };
            for (b, jb) in el.dofs.iter().enumerate() {
                if let Some(j) = *jb {
                    kt.push((i, j, kloc[a * nloc + b]));
                    mt.push((i, j, mloc[a * nloc + b]));
                }
            }
        }
        Ok(())
    })?;
    Ok((CsrMatrix::from_triplets(n, n, kt)?, CsrMatrix::from_triplets(n, n, mt)?))
}

/// Midpoint samples of `diag(J⁻¹J⁻ᵀ |det J| ν_s, |det J| γ_s)` on the element
/// grid given by `breakpoints` (one list per direction). The last tensor mode
/// indexes the diagonal entry.
pub fn coefficient_diagonal_samples<T: Real>(
    breakpoints: &[Vec<T>],
    geometry: &GeometryMap<T>,
    nu_s: Option<SpaceFn<'_, T>>,
    gamma_s: Option<SpaceFn<'_, T>>,
) -> Result<Tensor<T>> {
    let d = geometry.dim();
    check_len(d, breakpoints.len())?;
    if breakpoints.iter().any(|b| b.len() < 2) {
        return Err(Error::InvalidArgument("every direction needs at least one element".into()));
    }
    let el_shape: Vec<usize> = breakpoints.iter().map(|b| b.len() - 1).collect();
    let mut shape = el_shape.clone();
    shape.push(d + 1);
    let mut out = Tensor::zeros(shape);
    let n_el: usize = el_shape.iter().product();
    let half = T::of(0.5);
    for e in 0..n_el {
        let ei = multi_index(e, &el_shape);
        let eta: Vec<T> = (0..d).map(|l| (breakpoints[l][ei[l]] + breakpoints[l][ei[l] + 1]) * half).collect();
        let (x, jac) = geometry.eval(&eta)?;
        let (det, inv) = invert_jacobian(&jac, d)
            .filter(|(det, _)| *det > T::zero())
            .ok_or_else(|| Error::Geometry(format!("singular or inverted Jacobian at parametric midpoint {eta:?}")))?;
        let nu = eval_coefficient(nu_s, &x[..d], "diffusion")?;
        let ga = eval_coefficient(gamma_s, &x[..d], "capacity")?;
        let mut idx = ei.clone();
        idx.push(0);
        for l in 0..d {
            let jj: T = (0..d).map(|k| inv[l][k] * inv[l][k]).sum();
            idx[d] = l;
            out.set(&idx, jj * det * nu);
        }
        idx[d] = d;
        out.set(&idx, det * ga);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::{gauss_rule, KnotVector};

    fn setup(d: usize, p: usize, n: usize) -> (Vec<SplineSpace1D<f64>>, Vec<QuadratureRule<f64>>) {
        let spaces: Vec<_> =
            (0..d).map(|_| SplineSpace1D::spatial(KnotVector::uniform(p, n).unwrap()).unwrap()).collect();
        let quads = spaces.iter().map(|s| gauss_rule(s.knot_vector(), p + 1).unwrap()).collect();
        (spaces, quads)
    }

    #[test]
    fn affine_1d_scaling() {
        let (s, q) = setup(1, 2, 4);
        let id = GeometryMap::identity(1).unwrap();
        let g2 = GeometryMap::scaling(&[2.0]).unwrap();
        let (k1, m1) = assemble_spatial_physical(&s, &q, &id, None, None).unwrap();
        let (k2, m2) = assemble_spatial_physical(&s, &q, &g2, None, None).unwrap();
        for i in 0..k1.nrows() {
            for j in 0..k1.ncols() {
                assert!((m2.get(i, j) - 2.0 * m1.get(i, j)).abs() < 1e-14);
                assert!((k2.get(i, j) - 0.5 * k1.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn samples_of_scaling_map() {
        let g = GeometryMap::scaling(&[2.0, 3.0]).unwrap();
        let bp = vec![vec![0.0, 0.5, 1.0], vec![0.0, 1.0]];
        let s: Tensor<f64> = coefficient_diagonal_samples(&bp, &g, None, None).unwrap();
        assert_eq!(s.shape(), &[2, 1, 3]);
        assert!((s.get(&[1, 0, 0]) - 6.0 / 4.0).abs() < 1e-14);
        assert!((s.get(&[1, 0, 1]) - 6.0 / 9.0).abs() < 1e-14);
        assert!((s.get(&[0, 0, 2]) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn inverted_map_is_rejected() {
        let kv = KnotVector::<f64>::uniform(1, 1).unwrap();
        let g = GeometryMap::from_control_points(vec![kv], vec![[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let (s, q) = setup(1, 1, 2);
        assert!(matches!(assemble_spatial_physical(&s, &q, &g, None, None), Err(Error::Geometry(_))));
        let bad = |_: &[f64]| -1.0;
        let id = GeometryMap::identity(1).unwrap();
        assert!(matches!(assemble_spatial_physical(&s, &q, &id, Some(&bad), None), Err(Error::Assembly(_))));
    }
}
