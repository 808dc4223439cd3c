//! Kronecker products, m-mode tensor products and matrix-free sums of
//! Kronecker products.
//!
//! Tensors are vectorized colexicographically: entry `(i_1, ..., i_k)` of a
//! tensor with shape `(n_1, ..., n_k)` lives at `i_1 + n_1 (i_2 + n_2 (...))`.
//! A factor list `[J_1, ..., J_k]` stands for `J_k ⊗ ... ⊗ J_1`.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::matrix::{BandedMatrix, CsrMatrix, DenseMatrix};
use crate::operator::LinearOperator;
use crate::scalar::Real;

/// A matrix usable as one factor of a Kronecker product.
pub trait KronFactor<T>: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn diagonal(&self) -> Vec<T>;

    /// Writes `x ×_mode self` into `out`, where `x` has shape `shape` and
    /// `out` has `shape[mode]` replaced by `self.nrows()`.
    fn mode_product_into(&self, x: &[T], shape: &[usize], mode: usize, out: &mut [T]);
}

/// Shared m-mode product kernel: `row(i)` yields the nonzeros of row `i`.
fn mode_product_rows<T, I, F>(nrows: usize, ncols: usize, x: &[T], shape: &[usize], mode: usize, out: &mut [T], row: F)
where
    T: Real,
    I: Iterator<Item = (usize, T)>,
    F: Fn(usize) -> I,
{
    assert_eq!(shape[mode], ncols, "mode-{mode} size does not match factor columns");
    let left: usize = shape[..mode].iter().product();
    let right: usize = shape[mode + 1..].iter().product();
    assert_eq!(x.len(), left * ncols * right, "tensor length does not match its shape");
    assert_eq!(out.len(), left * nrows * right, "output length mismatch");
    if left == 1 {
        for b in 0..right {
            let xs = &x[b * ncols..(b + 1) * ncols];
            let os = &mut out[b * nrows..(b + 1) * nrows];
            for (i, o) in os.iter_mut().enumerate() {
                *o = row(i).map(|(j, v)| v * xs[j]).sum();
            }
        }
    } else {
        out.iter_mut().for_each(|o| *o = T::zero());
        for b in 0..right {
            for i in 0..nrows {
                let o0 = (b * nrows + i) * left;
                let os = &mut out[o0..o0 + left];
                for (j, v) in row(i) {
                    let x0 = (b * ncols + j) * left;
                    for (o, &xv) in os.iter_mut().zip(&x[x0..x0 + left]) {
                        *o += v * xv;
                    }
                }
            }
        }
    }
}

impl<T: Real> KronFactor<T> for DenseMatrix<T> {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn diagonal(&self) -> Vec<T> {
        DenseMatrix::diagonal(self)
    }
    fn mode_product_into(&self, x: &[T], shape: &[usize], mode: usize, out: &mut [T]) {
        let (nr, nc) = (self.rows(), self.cols());
        assert_eq!(shape[mode], nc, "mode-{mode} size does not match factor columns");
        let left: usize = shape[..mode].iter().product();
        let right: usize = shape[mode + 1..].iter().product();
        assert_eq!(x.len(), left * nc * right, "tensor length does not match its shape");
        assert_eq!(out.len(), left * nr * right, "output length mismatch");
        let a = self.as_slice();
        if left == 1 {
            // rows of the unfolding times Aᵀ
            T::gemm((right, nc, nr), (x, nc, 1), (a, 1, nc), (out, nr, 1));
        } else {
            for (xb, ob) in x.chunks_exact(nc * left).zip(out.chunks_exact_mut(nr * left)) {
                T::gemm((nr, nc, left), (a, nc, 1), (xb, left, 1), (ob, left, 1));
            }
        }
    }
}

impl<T: Real> KronFactor<T> for BandedMatrix<T> {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn diagonal(&self) -> Vec<T> {
        BandedMatrix::diagonal(self)
    }
    fn mode_product_into(&self, x: &[T], shape: &[usize], mode: usize, out: &mut [T]) {
        mode_product_rows(self.dim(), self.dim(), x, shape, mode, out, |i| self.row_entries(i));
    }
}

impl<T: Real> KronFactor<T> for CsrMatrix<T> {
    fn nrows(&self) -> usize {
        CsrMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        CsrMatrix::ncols(self)
    }
    fn diagonal(&self) -> Vec<T> {
        CsrMatrix::diagonal(self)
    }
    fn mode_product_into(&self, x: &[T], shape: &[usize], mode: usize, out: &mut [T]) {
        mode_product_rows(CsrMatrix::nrows(self), CsrMatrix::ncols(self), x, shape, mode, out, |i| self.row_entries(i));
    }
}

/// Dense tensor stored in colexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid tensor shape {shape:?}")));
        }
        check_len(shape.iter().product(), data.len())?;
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![T::zero(); n] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Linear index of a multi-index.
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter().zip(&self.shape).rev().fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let k = self.linear_index(idx);
        self.data[k] = v;
    }

    /// `self ×_mode j`.
    pub fn mode_product(&self, j: &dyn KronFactor<T>, mode: usize) -> Result<Self> {
        mode_product(self, j, mode)
    }
}

/// Multi-index of linear position `k` for a colexicographic layout.
pub fn multi_index(mut k: usize, shape: &[usize]) -> Vec<usize> {
    shape
        .iter()
        .map(|&n| {
            let i = k % n;
            k /= n;
            i
        })
        .collect()
}

/// m-mode product `x ×_mode j` (0-based mode).
pub fn mode_product<T: Real>(x: &Tensor<T>, j: &dyn KronFactor<T>, mode: usize) -> Result<Tensor<T>> {
    if mode >= x.shape.len() {
        return Err(Error::InvalidArgument(format!("mode {mode} out of range for an order-{} tensor", x.shape.len())));
    }
    check_len(x.shape[mode], j.ncols())?;
    let mut shape = x.shape.clone();
    shape[mode] = j.nrows();
    let mut out = vec![T::zero(); shape.iter().product()];
    j.mode_product_into(&x.data, &x.shape, mode, &mut out);
    Ok(Tensor { shape, data: out })
}

/// `(J_k ⊗ ... ⊗ J_1) x` computed by successive mode products.
pub fn kron_matvec<T: Real>(factors: &[&dyn KronFactor<T>], x: &[T]) -> Result<Vec<T>> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument("no Kronecker factors given".into()));
    }
    let mut shape: Vec<usize> = factors.iter().map(|f| f.ncols()).collect();
    check_len(shape.iter().product(), x.len())?;
    let mut cur = x.to_vec();
    let mut buf = Vec::new();
    for (mode, f) in factors.iter().enumerate() {
        let mut next_shape = shape.clone();
        next_shape[mode] = f.nrows();
        buf.clear();
        buf.resize(next_shape.iter().product(), T::zero());
        f.mode_product_into(&cur, &shape, mode, &mut buf);
        std::mem::swap(&mut cur, &mut buf);
        shape = next_shape;
    }
    Ok(cur)
}

/// One term `coeff · (J_k ⊗ ... ⊗ J_1)` of a [`KronSumOperator`].
#[derive(Clone)]
pub struct KronTerm<T> {
    pub coeff: T,
    pub factors: Vec<Arc<dyn KronFactor<T>>>,
}

impl<T: Real> KronTerm<T> {
    pub fn new(coeff: T, factors: Vec<Arc<dyn KronFactor<T>>>) -> Self {
        Self { coeff, factors }
    }
}

/// Matrix-free `Σ_t c_t (J_{t,k} ⊗ ... ⊗ J_{t,1})` with square factors.
#[derive(Clone)]
pub struct KronSumOperator<T> {
    dims: Vec<usize>,
    terms: Vec<KronTerm<T>>,
}

impl<T: Real> KronSumOperator<T> {
    pub fn new(dims: Vec<usize>, terms: Vec<KronTerm<T>>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid mode sizes {dims:?}")));
        }
        for term in &terms {
            check_len(dims.len(), term.factors.len())?;
            for (f, &n) in term.factors.iter().zip(&dims) {
                check_len(n, f.nrows())?;
                check_len(n, f.ncols())?;
            }
        }
        Ok(Self { dims, terms })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[KronTerm<T>] {
        &self.terms
    }

    pub fn n_dof(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.n_dof(), x.len())?;
        let mut y = vec![T::zero(); x.len()];
        self.apply_add(x, &mut y);
        Ok(y)
    }

    fn apply_add(&self, x: &[T], y: &mut [T]) {
        let mut a = vec![T::zero(); x.len()];
        let mut b = vec![T::zero(); x.len()];
        for term in &self.terms {
            a.copy_from_slice(x);
            for (mode, f) in term.factors.iter().enumerate() {
                f.mode_product_into(&a, &self.dims, mode, &mut b);
                std::mem::swap(&mut a, &mut b);
            }
            for (yi, &ai) in y.iter_mut().zip(&a) {
                *yi += term.coeff * ai;
            }
        }
    }

    /// Diagonal of the operator from the factor diagonals.
    pub fn diagonal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_dof()];
        for term in &self.terms {
            let mut d = vec![term.coeff];
            for f in &term.factors {
                let fd = f.diagonal();
                let mut next = Vec::with_capacity(d.len() * fd.len());
                for &v in &fd {
                    next.extend(d.iter().map(|&a| a * v));
                }
                d = next;
            }
            for (o, v) in out.iter_mut().zip(d) {
                *o += v;
            }
        }
        out
    }

    /// Dense matrix of the operator, column by column. Small instances only.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.n_dof();
        let mut m = DenseMatrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.apply(&e).expect("length matches");
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = T::zero();
        }
        m
    }
}

impl<T: Real> LinearOperator<T> for KronSumOperator<T> {
    fn dim(&self) -> usize {
        self.n_dof()
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_dof());
        assert_eq!(y.len(), self.n_dof());
        y.iter_mut().for_each(|v| *v = T::zero());
        self.apply_add(x, y);
    }
}
