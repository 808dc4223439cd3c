//! Univariate B-spline spaces on open knot vectors, Cox-de Boor evaluation
//! and element-wise Gauss-Legendre quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Open knot vector on `[0, 1]` together with the spline degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector<T> {
    degree: usize,
    knots: Vec<T>,
}

impl<T: Real> KnotVector<T> {
    pub fn new(degree: usize, knots: Vec<T>) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidArgument("spline degree must be at least 1".into()));
        }
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidArgument(format!(
                "knot vector of degree {p} needs at least {} knots, got {}",
                2 * (p + 1),
                knots.len()
            )));
        }
        let len = knots.len();
        if knots[..=p].iter().any(|&k| k != T::zero()) || knots[len - p - 1..].iter().any(|&k| k != T::one()) {
            return Err(Error::InvalidArgument("knot vector is not open on [0, 1]".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("knots must be non-decreasing".into()));
        }
        // interior multiplicity <= p keeps the space continuous
        let mut run = 1;
        for i in p + 1..len - p - 1 {
            if knots[i] <= T::zero() || knots[i] >= T::one() {
                return Err(Error::InvalidArgument(format!("interior knot {} outside (0, 1)", knots[i])));
            }
            if i > p + 1 && knots[i] == knots[i - 1] {
                run += 1;
            } else {
                run = 1;
            }
            if run > p {
                return Err(Error::InvalidArgument(format!(
                    "interior knot {} has multiplicity above the degree",
                    knots[i]
                )));
            }
        }
        Ok(Self { degree, knots })
    }

    /// Uniform open knot vector with `n_el` spans and single interior knots.
    pub fn uniform(degree: usize, n_el: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidArgument("spline degree must be at least 1".into()));
        }
        if n_el < 1 {
            return Err(Error::InvalidArgument("number of elements must be at least 1".into()));
        }
        let mut knots = vec![T::zero(); degree + 1];
        let h = T::one() / T::of_usize(n_el);
        knots.extend((1..n_el).map(|i| T::of_usize(i) * h));
        knots.extend(std::iter::repeat_n(T::one(), degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Number of B-splines `m = len - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values, i.e. the element boundaries.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::new();
        for &k in &self.knots {
            if out.last().is_none_or(|&l| l != k) {
                out.push(k);
            }
        }
        out
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Indices `k` of the non-empty spans `[knots[k], knots[k+1])`.
    pub fn span_indices(&self) -> Vec<usize> {
        (self.degree..self.num_basis()).filter(|&k| self.knots[k + 1] > self.knots[k]).collect()
    }

    /// Largest knot span length.
    pub fn mesh_size(&self) -> T {
        self.knots.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), |a, b| a.max(b))
    }

    /// Span index `k` with `knots[k] <= x < knots[k+1]`; `x = 1` is assigned
    /// to the last non-empty span.
    pub fn find_span(&self, x: T) -> usize {
        let m = self.num_basis();
        let p = self.degree;
        if x >= self.knots[m] {
            return m - 1;
        }
        if x <= self.knots[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, m);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Values (`deriv_order = 0`) or first derivatives (`deriv_order = 1`) of
    /// the `p + 1` B-splines that do not vanish at `x`, starting at the
    /// returned global index.
    pub fn eval_basis(&self, x: T, deriv_order: usize) -> Result<(usize, Vec<T>)> {
        if !(x >= T::zero() && x <= T::one()) {
            return Err(Error::InvalidArgument(format!("evaluation point {x} outside [0, 1]")));
        }
        if deriv_order > 1 {
            return Err(Error::InvalidArgument("only derivative orders 0 and 1 are supported".into()));
        }
        let span = self.find_span(x);
        let (vals, ders) = self.basis_at_span(span, x);
        let first = span - self.degree;
        Ok((first, if deriv_order == 0 { vals } else { ders }))
    }

    /// Values and first derivatives at `x` for a known span index.
    pub(crate) fn basis_at_span(&self, span: usize, x: T) -> (Vec<T>, Vec<T>) {
        let p = self.degree;
        let u = &self.knots;
        // ndu: upper triangle holds basis values, lower triangle knot differences
        let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
        let mut left = vec![T::zero(); p + 1];
        let mut right = vec![T::zero(); p + 1];
        ndu[0][0] = T::one();
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = T::zero();
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = if ndu[j][r] == T::zero() { T::zero() } else { ndu[r][j - 1] / ndu[j][r] };
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let vals: Vec<T> = (0..=p).map(|r| ndu[r][p]).collect();
        let pf = T::of_usize(p);
        let ratio = |num: T, den: T| if den == T::zero() { T::zero() } else { num / den };
        let ders: Vec<T> = (0..=p)
            .map(|r| {
                let mut d = T::zero();
                if r >= 1 {
                    d += ratio(ndu[r - 1][p - 1], ndu[p][r - 1]);
                }
                if r < p {
                    d -= ratio(ndu[r][p - 1], ndu[p][r]);
                }
                pf * d
            })
            .collect();
        (vals, ders)
    }
}

/// Free-function form of [`KnotVector::uniform`].
pub fn make_uniform_open_knots<T: Real>(p: usize, n_el: usize) -> Result<KnotVector<T>> {
    KnotVector::uniform(p, n_el)
}

/// Spline space with optional elimination of the first and/or last basis
/// function (homogeneous boundary or initial conditions).
#[derive(Clone, Debug, PartialEq)]
pub struct SplineSpace1D<T> {
    knot_vector: KnotVector<T>,
    drop_first: bool,
    drop_last: bool,
    n: usize,
}

impl<T: Real> SplineSpace1D<T> {
    pub fn new(knot_vector: KnotVector<T>, drop_first: bool, drop_last: bool) -> Result<Self> {
        let m = knot_vector.num_basis();
        let dropped = usize::from(drop_first) + usize::from(drop_last);
        if m <= dropped {
            return Err(Error::InvalidArgument(format!(
                "space with {m} basis functions has no active function after dropping {dropped}"
            )));
        }
        Ok(Self { knot_vector, drop_first, drop_last, n: m - dropped })
    }

    /// Both end functions removed (homogeneous Dirichlet data).
    pub fn spatial(knot_vector: KnotVector<T>) -> Result<Self> {
        Self::new(knot_vector, true, true)
    }

    /// First function removed (homogeneous initial condition).
    pub fn temporal(knot_vector: KnotVector<T>) -> Result<Self> {
        Self::new(knot_vector, true, false)
    }

    pub fn knot_vector(&self) -> &KnotVector<T> {
        &self.knot_vector
    }

    pub fn degree(&self) -> usize {
        self.knot_vector.degree()
    }

    /// Number of active basis functions.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn drops_first(&self) -> bool {
        self.drop_first
    }

    pub fn drops_last(&self) -> bool {
        self.drop_last
    }

    /// Active index of global basis function `global`, if it is kept.
    #[inline]
    pub fn active_index(&self, global: usize) -> Option<usize> {
        let m = self.knot_vector.num_basis();
        if (self.drop_first && global == 0) || (self.drop_last && global + 1 == m) || global >= m {
            None
        } else {
            Some(global - usize::from(self.drop_first))
        }
    }

    /// Evaluates `Σ coeffs[i] b_i(x)` and its derivative over the active functions.
    pub fn eval_combination(&self, coeffs: &[T], x: T) -> Result<(T, T)> {
        crate::error::check_len(self.n, coeffs.len())?;
        let span = self.knot_vector.find_span(x.max(T::zero()).min(T::one()));
        let (vals, ders) = self.knot_vector.basis_at_span(span, x);
        let first = span - self.degree();
        let mut v = T::zero();
        let mut d = T::zero();
        for r in 0..=self.degree() {
            if let Some(i) = self.active_index(first + r) {
                v += coeffs[i] * vals[r];
                d += coeffs[i] * ders[r];
            }
        }
        Ok((v, d))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of_usize(n);
    let two = T::of(2.0);
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n
        let mut x = (T::PI() * (T::of_usize(i) + T::of(0.75)) / (nf + T::of(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::eps() * T::of(4.0) {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_and_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of_usize(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Element-wise Gauss-Legendre rule over the non-empty spans of a knot vector.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    points_per_element: usize,
    spans: Vec<usize>,
    bounds: Vec<(T, T)>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn points_per_element(&self) -> usize {
        self.points_per_element
    }

    pub fn num_elements(&self) -> usize {
        self.bounds.len()
    }

    pub fn num_points(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_bounds(&self, e: usize) -> (T, T) {
        self.bounds[e]
    }

    /// Knot span index of element `e`.
    pub fn span(&self, e: usize) -> usize {
        self.spans[e]
    }

    pub fn element_nodes(&self, e: usize) -> &[T] {
        let q = self.points_per_element;
        &self.nodes[e * q..(e + 1) * q]
    }

    pub fn element_weights(&self, e: usize) -> &[T] {
        let q = self.points_per_element;
        &self.weights[e * q..(e + 1) * q]
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integrates `f` over `[0, 1]`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss rule with `points_per_element` nodes on every non-empty span of `kv`.
pub fn gauss_rule<T: Real>(kv: &KnotVector<T>, points_per_element: usize) -> Result<QuadratureRule<T>> {
    if points_per_element < 1 {
        return Err(Error::InvalidArgument("quadrature needs at least one point per element".into()));
    }
    let (ref_nodes, ref_weights) = gauss_legendre::<T>(points_per_element);
    let spans = kv.span_indices();
    let half = T::of(0.5);
    let mut bounds = Vec::with_capacity(spans.len());
    let mut nodes = Vec::with_capacity(spans.len() * points_per_element);
    let mut weights = Vec::with_capacity(spans.len() * points_per_element);
    for &k in &spans {
        let (a, b) = (kv.knots()[k], kv.knots()[k + 1]);
        bounds.push((a, b));
        let (mid, rad) = ((a + b) * half, (b - a) * half);
        for (x, w) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + rad * *x);
            weights.push(rad * *w);
        }
    }
    Ok(QuadratureRule { points_per_element, spans, bounds, nodes, weights })
}

/// Basis values and derivatives tabulated at every node of a quadrature rule.
#[derive(Clone, Debug)]
pub struct BasisTable<T> {
    degree: usize,
    first: Vec<usize>,
    values: Vec<T>,
    derivs: Vec<T>,
}

impl<T: Real> BasisTable<T> {
    pub fn new(kv: &KnotVector<T>, quad: &QuadratureRule<T>) -> Self {
        let p = kv.degree();
        let npts = quad.num_points();
        let mut first = Vec::with_capacity(npts);
        let mut values = Vec::with_capacity(npts * (p + 1));
        let mut derivs = Vec::with_capacity(npts * (p + 1));
        for e in 0..quad.num_elements() {
            let span = quad.span(e);
            for &x in quad.element_nodes(e) {
                let (v, d) = kv.basis_at_span(span, x);
                first.push(span - p);
                values.extend(v);
                derivs.extend(d);
            }
        }
        Self { degree: p, first, values, derivs }
    }

    /// Global index of the first non-vanishing function at point `q`.
    #[inline]
    pub fn first(&self, q: usize) -> usize {
        self.first[q]
    }

    #[inline]
    pub fn values(&self, q: usize) -> &[T] {
        let n = self.degree + 1;
        &self.values[q * n..(q + 1) * n]
    }

    #[inline]
    pub fn derivs(&self, q: usize) -> &[T] {
        let n = self.degree + 1;
        &self.derivs[q * n..(q + 1) * n]
    }
}
