use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

/// Square matrix with nonzeros confined to `|i - j| <= half_bandwidth`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    bw: usize,
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        let bw = half_bandwidth;
        Self { n, bw, data: vec![T::zero(); n * (2 * bw + 1)] }
    }

    pub fn from_diagonal_entries(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), 0);
        for (i, &v) in diag.iter().enumerate() {
            m.add_to(i, i, v);
        }
        m
    }

    /// Banded copy of the band `|i - j| <= half_bandwidth` of a square dense matrix.
    pub fn from_dense(a: &DenseMatrix<T>, half_bandwidth: usize) -> Result<Self> {
        crate::error::check_len(a.rows(), a.cols())?;
        let mut m = Self::zeros(a.rows(), half_bandwidth);
        for i in 0..a.rows() {
            for j in m.row_range(i) {
                m.add_to(i, j, a[(i, j)]);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i.abs_diff(j) <= self.bw
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            T::zero()
        }
    }

    /// Adds `v` to entry `(i, j)`; panics outside the band.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band {}", self.bw);
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    /// Column range of the band in row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.bw)..(i + self.bw + 1).min(self.n)
    }

    /// Nonzero pattern of row `i` as `(column, value)` pairs.
    #[inline]
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.row_range(i).map(move |j| (j, self.data[self.offset(i, j)]))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row_entries(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, bw: self.bw, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.bw);
        for i in 0..self.n {
            for (j, v) in self.row_entries(i) {
                t.add_to(j, i, v);
            }
        }
        t
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Leading principal `k × k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        let mut b = Self::zeros(k, self.bw);
        for i in 0..k {
            for j in self.row_range(i).filter(|&j| j < k) {
                b.add_to(i, j, self.get(i, j));
            }
        }
        b
    }

    /// `max |a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row_entries(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

/// Cholesky factor `L` of a symmetric positive-definite banded matrix.
#[derive(Clone, Debug)]
pub struct BandedCholesky<T> {
    lower: BandedMatrix<T>,
}

impl<T: Real> BandedCholesky<T> {
    /// Factors using the lower triangle of `a`.
    pub fn factor(a: &BandedMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let bw = a.half_bandwidth();
        let mut l = BandedMatrix::zeros(n, bw);
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut d = a.get(j, j);
            for k in k0..j {
                let ljk = l.get(j, k);
                d -= ljk * ljk;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite(format!("banded matrix (pivot {j})")));
            }
            let djj = d.sqrt();
            l.add_to(j, j, djj);
            for i in j + 1..(j + bw + 1).min(n) {
                let mut s = a.get(i, j);
                for k in i.saturating_sub(bw).max(k0)..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.add_to(i, j, s / djj);
            }
        }
        Ok(Self { lower: l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lower.dim();
        let bw = self.lower.half_bandwidth();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.lower.get(i, k) * y[k];
            }
            y[i] = s / self.lower.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.lower.get(k, i) * y[k];
            }
            y[i] = s / self.lower.get(i, i);
        }
        y
    }
}
