//! Dense factorizations of the univariate pencils.
//!
//! Spatial pencils `(K, M)` are symmetric positive definite and are
//! diagonalized by `M`-orthonormal eigenvectors. The time pencil `(W_t, M_t)`
//! is not normal; it is reduced to an arrowhead matrix with a well-conditioned
//! `M_t`-orthonormal basis, kept in real 2×2-block form.

use nalgebra::{Cholesky, Complex, ComplexField, DMatrix, Dyn, Schur, SymmetricEigen, SVD};

use crate::error::{check_len, Error, Result};
use crate::matrix::{BandedCholesky, BandedMatrix, DenseMatrix};
use crate::scalar::Real;

/// `K U = M U Λ`, `Uᵀ M U = I`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen<T> {
    pub vectors: DenseMatrix<T>,
    pub values: Vec<T>,
}

fn check_square<T: Real>(a: &DenseMatrix<T>, n: usize) -> Result<()> {
    check_len(n, a.rows())?;
    check_len(n, a.cols())
}

fn cholesky<T: Real>(m: &DenseMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    let sym = m.to_nalgebra();
    let sym = (&sym + sym.transpose()) * T::of(0.5);
    Cholesky::new(sym)
        .map(|c| c.l())
        .ok_or_else(|| Error::NotPositiveDefinite(format!("{what} is not symmetric positive definite")))
}

/// `L⁻¹ A L⁻ᵀ` for lower-triangular `L`.
fn congruence<T: Real>(l: &DMatrix<T>, a: &DMatrix<T>) -> DMatrix<T> {
    let x = l.solve_lower_triangular(a).expect("Cholesky factor is nonsingular");
    l.solve_lower_triangular(&x.transpose()).expect("Cholesky factor is nonsingular").transpose()
}

/// `L⁻ᵀ Q`.
fn back_transform<T: Real>(l: &DMatrix<T>, q: &DMatrix<T>) -> DMatrix<T> {
    l.transpose().solve_upper_triangular(q).expect("Cholesky factor is nonsingular")
}

/// Generalized eigendecomposition of a symmetric/SPD pencil via Cholesky
/// reduction to a standard symmetric problem.
pub fn spd_generalized_eig<T: Real>(k: &DenseMatrix<T>, m: &DenseMatrix<T>) -> Result<GeneralizedEigen<T>> {
    let n = m.rows();
    check_square(m, n)?;
    check_square(k, n)?;
    let l = cholesky(m, "mass matrix")?;
    let c = congruence(&l, &k.to_nalgebra());
    let c = (&c + c.transpose()) * T::of(0.5);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let v = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let u = back_transform(&l, &v);
    Ok(GeneralizedEigen {
        vectors: DenseMatrix::from_nalgebra(&u),
        values: order.iter().map(|&j| eig.eigenvalues[j]).collect(),
    })
}

/// Eigenpairs `(U_l, Λ_l)` of every spatial direction.
#[derive(Clone, Debug)]
pub struct SpaceFactorization<T> {
    pub directions: Vec<GeneralizedEigen<T>>,
}

impl<T: Real> SpaceFactorization<T> {
    /// Factors each `(K_l, M_l)` pencil.
    pub fn new(pencils: &[(DenseMatrix<T>, DenseMatrix<T>)]) -> Result<Self> {
        if pencils.is_empty() {
            return Err(Error::InvalidArgument("at least one spatial direction is required".into()));
        }
        let directions = pencils.iter().map(|(k, m)| spd_generalized_eig(k, m)).collect::<Result<_>>()?;
        Ok(Self { directions })
    }

    pub fn from_banded(pencils: &[(BandedMatrix<T>, BandedMatrix<T>)]) -> Result<Self> {
        let dense: Vec<_> = pencils.iter().map(|(k, m)| (k.to_dense(), m.to_dense())).collect();
        Self::new(&dense)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.directions.iter().map(|e| e.values.len()).collect()
    }

    /// Kronecker sum `Λ_s = Σ_l I ⊗ ... ⊗ Λ_l ⊗ ... ⊗ I` in colexicographic order.
    pub fn lambda_s(&self) -> Vec<T> {
        let mut out = vec![T::zero()];
        for dir in &self.directions {
            let mut next = Vec::with_capacity(out.len() * dir.values.len());
            for &v in &dir.values {
                next.extend(out.iter().map(|&a| a + v));
            }
            out = next;
        }
        out
    }
}

/// Real block eigenbasis of a skew-symmetric/SPD pencil.
#[derive(Clone, Debug)]
pub struct SkewEigen<T> {
    /// `Ůᵀ M̊ Ů = I`; column pairs `(2j, 2j+1)` belong to `pairs[j]`, the
    /// optional zero mode is the last column.
    pub vectors: DenseMatrix<T>,
    /// Positive imaginary parts, ascending.
    pub pairs: Vec<T>,
    pub zero_count: usize,
}

/// Eigendecomposition of `(W̊, M̊)` with `W̊` skew-symmetric and `M̊` SPD, in
/// real 2×2-block form: `Ůᵀ W̊ Ů = blockdiag([[0, λ_j], [−λ_j, 0]], 0)`.
pub fn skew_pencil_eig<T: Real>(w: &DenseMatrix<T>, m: &DenseMatrix<T>) -> Result<SkewEigen<T>> {
    let n = m.rows();
    check_square(m, n)?;
    check_square(w, n)?;
    let scale = w.max_abs();
    let tol = T::of(1e-13) * scale;
    let asym = w.add(&w.transpose()).max_abs();
    if asym > tol {
        return Err(Error::NotSkewSymmetric { residual: asym.as_f64(), tolerance: tol.as_f64() });
    }
    let l = cholesky(m, "leading time mass block")?;
    let s = congruence(&l, &w.to_nalgebra());
    let s = (&s - s.transpose()) * T::of(0.5);
    // i S is Hermitian with eigenvalues ±λ_j (and 0 when n is odd)
    let h = DMatrix::from_fn(n, n, |i, j| Complex::new(T::zero(), s[(i, j)]));
    let eig = SymmetricEigen::new(h);
    let mut desc: Vec<usize> = (0..n).collect();
    desc.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).expect("finite eigenvalues"));
    let npairs = n / 2;
    let zero_count = n % 2;
    let mut q = DMatrix::<T>::zeros(n, n);
    let mut pairs = Vec::with_capacity(npairs);
    let sqrt2 = T::of(2.0).sqrt();
    for (j, &col) in desc[..npairs].iter().rev().enumerate() {
        let lam = eig.eigenvalues[col];
        if !(lam > T::zero()) {
            return Err(Error::EigenSolver(format!(
                "expected a positive eigenvalue pair, found {lam} (degenerate skew pencil)"
            )));
        }
        pairs.push(lam);
        for i in 0..n {
            let z = eig.eigenvectors[(i, col)];
            q[(i, 2 * j)] = sqrt2 * z.im;
            q[(i, 2 * j + 1)] = sqrt2 * z.re;
        }
    }
    if zero_count == 1 {
        let col = desc[npairs];
        let z = eig.eigenvectors.column(col);
        // rotate the phase so the vector becomes real
        let k = (0..n).max_by(|&a, &b| z[a].modulus().partial_cmp(&z[b].modulus()).expect("finite")).expect("n > 0");
        let phase = z[k].conj() / Complex::new(z[k].modulus(), T::zero());
        let mut v: Vec<T> = (0..n).map(|i| (z[i] * phase).re).collect();
        let nrm = v.iter().map(|&a| a * a).sum::<T>().sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
        for i in 0..n {
            q[(i, n - 1)] = v[i];
        }
    }
    let orth = (q.transpose() * &q - DMatrix::identity(n, n)).amax();
    if orth > T::of(1e-8).max(T::eps().sqrt()) {
        return Err(Error::EigenSolver(format!(
            "real block eigenbasis lost orthogonality ({orth:e}); eigenvalues are too clustered"
        )));
    }
    Ok(SkewEigen { vectors: DenseMatrix::from_nalgebra(&back_transform(&l, &q)), pairs, zero_count })
}

/// Stable factorization `U_tᵀ M_t U_t = I`, `U_tᵀ W_t U_t = Δ_t` with `Δ_t`
/// block-arrowhead.
#[derive(Clone, Debug)]
pub struct TimeFactorization<T> {
    /// `[[Ů, r], [0, ρ]]`.
    pub u_t: DenseMatrix<T>,
    pub pairs: Vec<T>,
    pub zero_count: usize,
    /// Last column of `Δ_t` above the diagonal, in the block layout of `Ů`.
    pub g: Vec<T>,
    pub sigma: T,
    pub r: Vec<T>,
    pub rho: T,
}

impl<T: Real> TimeFactorization<T> {
    pub fn dim(&self) -> usize {
        self.u_t.rows()
    }

    /// Dense arrowhead matrix `Δ_t`.
    pub fn delta(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut d = DenseMatrix::zeros(n, n);
        for (j, &lam) in self.pairs.iter().enumerate() {
            d[(2 * j, 2 * j + 1)] = lam;
            d[(2 * j + 1, 2 * j)] = -lam;
        }
        for (i, &gi) in self.g.iter().enumerate() {
            d[(i, n - 1)] = gi;
            d[(n - 1, i)] = -gi;
        }
        d[(n - 1, n - 1)] = self.sigma;
        d
    }
}

/// Builds the stable arrowhead factorization of the time pencil.
pub fn time_factorization<T: Real>(w_t: &BandedMatrix<T>, m_t: &BandedMatrix<T>) -> Result<TimeFactorization<T>> {
    let n = m_t.dim();
    check_len(n, w_t.dim())?;
    let nb = n - 1;
    let m_col: Vec<T> = (0..nb).map(|i| m_t.get(i, nb)).collect();
    if !(m_t.get(nb, nb) > T::zero()) {
        return Err(Error::NotPositiveDefinite("time mass matrix has a non-positive diagonal".into()));
    }
    let (skew, v) = if nb == 0 {
        (SkewEigen { vectors: DenseMatrix::zeros(0, 0), pairs: vec![], zero_count: 0 }, vec![])
    } else {
        let m_lead = m_t.leading_block(nb);
        let skew = skew_pencil_eig(&w_t.leading_block(nb).to_dense(), &m_lead.to_dense())?;
        let neg_m: Vec<T> = m_col.iter().map(|&a| -a).collect();
        let v = BandedCholesky::factor(&m_lead)?.solve(&neg_m);
        (skew, v)
    };
    // ‖(v; 1)‖²_{M_t}
    let mut ext = v.clone();
    ext.push(T::one());
    let mv = m_t.matvec(&ext);
    let norm2: T = ext.iter().zip(&mv).map(|(&a, &b)| a * b).sum();
    if !(norm2 > T::zero()) {
        return Err(Error::NotPositiveDefinite("time mass matrix is not positive definite".into()));
    }
    let nrm = norm2.sqrt();
    let r: Vec<T> = v.iter().map(|&a| a / nrm).collect();
    let rho = T::one() / nrm;
    let mut rr = r.clone();
    rr.push(rho);
    let wr = w_t.matvec(&rr);
    let sigma: T = rr.iter().zip(&wr).map(|(&a, &b)| a * b).sum();
    // W̊ r + w ρ equals the leading part of W_t (r; ρ)
    let g = if nb == 0 { vec![] } else { skew.vectors.transpose().matvec(&wr[..nb]) };
    let mut u_t = DenseMatrix::zeros(n, n);
    for i in 0..nb {
        for j in 0..nb {
            u_t[(i, j)] = skew.vectors[(i, j)];
        }
        u_t[(i, nb)] = r[i];
    }
    u_t[(nb, nb)] = rho;
    Ok(TimeFactorization { u_t, pairs: skew.pairs, zero_count: skew.zero_count, g, sigma, r, rho })
}

/// Naive generalized eigendecomposition of `(W_t, M_t)` with complex,
/// `M_t`-normalized eigenvectors. Diagnostic only.
#[derive(Clone, Debug)]
pub struct NaiveEigen<T: Real> {
    pub vectors: DMatrix<Complex<T>>,
    pub values: Vec<Complex<T>>,
}

pub fn naive_pencil_eig<T: Real>(w: &DenseMatrix<T>, m: &DenseMatrix<T>) -> Result<NaiveEigen<T>> {
    let n = m.rows();
    check_square(m, n)?;
    check_square(w, n)?;
    let l = cholesky(m, "time mass matrix")?;
    let c = congruence(&l, &w.to_nalgebra());
    let cc: DMatrix<Complex<T>> = c.map(|v| Complex::new(v, T::zero()));
    let schur = Schur::<Complex<T>, Dyn>::try_new(cc, T::eps(), 100 * n.max(10))
        .ok_or_else(|| Error::EigenSolver("complex Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let tnorm = t.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b));
    let guard = T::eps() * tnorm.max(T::one());
    // eigenvectors of the triangular factor by back substitution
    let mut v = DMatrix::<Complex<T>>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        v[(k, k)] = Complex::new(T::one(), T::zero());
        for i in (0..k).rev() {
            let s: Complex<T> = (i + 1..=k).map(|j| t[(i, j)] * v[(j, k)]).sum();
            let mut den = t[(i, i)] - lam;
            if den.modulus() < guard {
                den = Complex::new(guard, T::zero());
            }
            v[(i, k)] = -s / den;
        }
    }
    let mut y = q * v;
    for mut col in y.column_iter_mut() {
        let nrm = col.norm();
        col /= Complex::new(nrm, T::zero());
    }
    let lc: DMatrix<Complex<T>> = l.map(|v| Complex::new(v, T::zero()));
    let u =
        lc.adjoint().solve_upper_triangular(&y).ok_or_else(|| Error::EigenSolver("singular Cholesky factor".into()))?;
    Ok(NaiveEigen { vectors: u, values: (0..n).map(|k| t[(k, k)]).collect() })
}

fn singular_ratio<T: Real>(s: &nalgebra::DVector<T>) -> Result<T> {
    let smax = s.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let smin = s.iter().copied().fold(T::max_value().expect("bounded"), |a, b| a.min(b));
    if !(smin > smax * T::eps()) {
        return Err(Error::Singular("matrix is numerically singular".into()));
    }
    Ok(smax / smin)
}

/// Spectral condition number `σ_max / σ_min`.
pub fn cond2<T: Real>(a: &DenseMatrix<T>) -> Result<T> {
    check_len(a.rows(), a.cols())?;
    let svd = SVD::try_new(a.to_nalgebra(), false, false, T::eps(), 0)
        .ok_or_else(|| Error::EigenSolver("SVD did not converge".into()))?;
    singular_ratio(&svd.singular_values)
}

/// Spectral condition number of a complex matrix.
pub fn cond2_complex<T: Real>(a: &DMatrix<Complex<T>>) -> Result<T> {
    check_len(a.nrows(), a.ncols())?;
    let svd = SVD::try_new(a.clone(), false, false, T::eps(), 0)
        .ok_or_else(|| Error::EigenSolver("SVD did not converge".into()))?;
    singular_ratio(&svd.singular_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_time_matrices;

    fn dm(n: usize, v: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_row_major(n, n, v.to_vec()).unwrap()
    }

    #[test]
    fn scalar_spd_pencil() {
        let e = spd_generalized_eig(&dm(1, &[2.0]), &dm(1, &[1.0])).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-15);
        assert!((e.vectors[(0, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tridiagonal_pencil() {
        let e = spd_generalized_eig(&dm(2, &[2.0, -1.0, -1.0, 2.0]), &DenseMatrix::identity(2)).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        assert!(spd_generalized_eig(&DenseMatrix::identity(2), &dm(2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }

    #[test]
    fn canonical_skew_block() {
        let e = skew_pencil_eig(&dm(2, &[0.0, 3.0, -3.0, 0.0]), &DenseMatrix::identity(2)).unwrap();
        assert_eq!(e.zero_count, 0);
        assert!((e.pairs[0] - 3.0).abs() < 1e-14);
        let d = e.vectors.transpose().matmul(&dm(2, &[0.0, 3.0, -3.0, 0.0])).matmul(&e.vectors);
        assert!((d[(0, 1)] - 3.0).abs() < 1e-14 && (d[(1, 0)] + 3.0).abs() < 1e-14);
    }

    #[test]
    fn one_by_one_skew() {
        let e = skew_pencil_eig(&dm(1, &[0.0]), &dm(1, &[4.0])).unwrap();
        assert_eq!(e.zero_count, 1);
        assert!((e.vectors[(0, 0)].abs() - 0.5).abs() < 1e-15);
        assert!(matches!(
            skew_pencil_eig(&dm(2, &[0.0, 1.0, 1.0, 0.0]), &DenseMatrix::identity(2)),
            Err(Error::NotSkewSymmetric { .. })
        ));
    }

    #[test]
    fn single_time_element() {
        let (w, m) = assemble_time_matrices::<f64>(1, 1, 1.0).unwrap();
        let f = time_factorization(&w, &m).unwrap();
        assert!((f.rho - 3f64.sqrt()).abs() < 1e-14);
        assert!((f.sigma - 1.5).abs() < 1e-14);
        assert!(f.g.is_empty() && f.pairs.is_empty());
    }

    #[test]
    fn cond2_examples() {
        assert!((cond2(&DenseMatrix::<f64>::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((cond2(&DenseMatrix::<f64>::from_diagonal(&[1.0, 10.0])).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(cond2(&dm(2, &[1.0, 2.0, 2.0, 4.0])), Err(Error::Singular(_))));
    }
}
