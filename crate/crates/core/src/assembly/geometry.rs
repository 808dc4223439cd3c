use crate::bspline::KnotVector;
use crate::error::{check_len, Error, Result};
use crate::kronop::multi_index;
use crate::scalar::Real;

/// Jacobian `J[i][j] = ∂x_i/∂η_j`; only the leading `d × d` block is used.
pub type Jacobian<T> = [[T; 3]; 3];

/// Tensor-product spline map from `(0,1)^d` into `R^d`, `d ∈ {1, 2, 3}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryMap<T> {
    knots: Vec<KnotVector<T>>,
    /// Control points in colexicographic order; unused coordinates are zero.
    control: Vec<[T; 3]>,
}

impl<T: Real> GeometryMap<T> {
    pub fn from_control_points(knots: Vec<KnotVector<T>>, control: Vec<[T; 3]>) -> Result<Self> {
        if knots.is_empty() || knots.len() > 3 {
            return Err(Error::InvalidArgument(format!("geometry dimension must be 1, 2 or 3, got {}", knots.len())));
        }
        check_len(knots.iter().map(|k| k.num_basis()).product(), control.len())?;
        Ok(Self { knots, control })
    }

    /// Bilinear/trilinear map onto the box `(0, c_1) × ... × (0, c_d)`.
    pub fn scaling(c: &[T]) -> Result<Self> {
        if c.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::InvalidArgument("scaling factors must be positive".into()));
        }
        let d = c.len();
        if d == 0 || d > 3 {
            return Err(Error::InvalidArgument(format!("geometry dimension must be 1, 2 or 3, got {d}")));
        }
        let knots = (0..d).map(|_| KnotVector::uniform(1, 1)).collect::<Result<Vec<_>>>()?;
        let shape = vec![2; d];
        let control = (0..1 << d)
            .map(|k| {
                let idx = multi_index(k, &shape);
                let mut p = [T::zero(); 3];
                for l in 0..d {
                    p[l] = c[l] * T::of_usize(idx[l]);
                }
                p
            })
            .collect();
        Self::from_control_points(knots, control)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::scaling(&vec![T::one(); d])
    }

    pub fn dim(&self) -> usize {
        self.knots.len()
    }

    pub fn knot_vectors(&self) -> &[KnotVector<T>] {
        &self.knots
    }

    pub fn control_points(&self) -> &[[T; 3]] {
        &self.control
    }

    /// Point and Jacobian at parametric coordinates `eta` (length `d`).
    pub fn eval(&self, eta: &[T]) -> Result<([T; 3], Jacobian<T>)> {
        let d = self.dim();
        check_len(d, eta.len())?;
        let mut firsts = [0usize; 3];
        let mut vals: [Vec<T>; 3] = Default::default();
        let mut ders: [Vec<T>; 3] = Default::default();
        let mut shape = [1usize; 3];
        for l in 0..d {
            let (f, v) = self.knots[l].eval_basis(eta[l], 0)?;
            let (_, dv) = self.knots[l].eval_basis(eta[l], 1)?;
            firsts[l] = f;
            shape[l] = v.len();
            vals[l] = v;
            ders[l] = dv;
        }
        for l in d..3 {
            vals[l] = vec![T::one()];
            ders[l] = vec![T::zero()];
        }
        let m: Vec<usize> = self.knots.iter().map(|k| k.num_basis()).collect();
        let mut x = [T::zero(); 3];
        let mut jac = [[T::zero(); 3]; 3];
        for c in 0..shape[2] {
            for b in 0..shape[1] {
                for a in 0..shape[0] {
                    let loc = [a, b, c];
                    let mut gi = 0;
                    for l in (0..d).rev() {
                        gi = gi * m[l] + firsts[l] + loc[l];
                    }
                    let cp = self.control[gi];
                    let v = vals[0][a] * vals[1][b] * vals[2][c];
                    let grad = [
                        ders[0][a] * vals[1][b] * vals[2][c],
                        vals[0][a] * ders[1][b] * vals[2][c],
                        vals[0][a] * vals[1][b] * ders[2][c],
                    ];
                    for i in 0..d {
                        x[i] += v * cp[i];
                        for j in 0..d {
                            jac[i][j] += grad[j] * cp[i];
                        }
                    }
                }
            }
        }
        Ok((x, jac))
    }
}

/// Determinant and inverse of the leading `d × d` block of `j`; `None` if singular.
pub fn invert_jacobian<T: Real>(j: &Jacobian<T>, d: usize) -> Option<(T, Jacobian<T>)> {
    let z = T::zero();
    let mut inv = [[z; 3]; 3];
    let det = match d {
        1 => {
            let det = j[0][0];
            if det == z {
                return None;
            }
            inv[0][0] = T::one() / det;
            det
        }
        2 => {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == z {
                return None;
            }
            inv[0][0] = j[1][1] / det;
            inv[0][1] = -j[0][1] / det;
            inv[1][0] = -j[1][0] / det;
            inv[1][1] = j[0][0] / det;
            det
        }
        3 => {
            let c = |r: usize, s: usize| {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
                j[r1][s1] * j[r2][s2] - j[r1][s2] * j[r2][s1]
            };
            let det = j[0][0] * c(0, 0) + j[0][1] * c(0, 1) + j[0][2] * c(0, 2);
            if det == z {
                return None;
            }
            for r in 0..3 {
                for s in 0..3 {
                    inv[s][r] = c(r, s) / det;
                }
            }
            det
        }
        _ => return None,
    };
    Some((det, inv))
}
