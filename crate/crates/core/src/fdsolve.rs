//! Extended fast-diagonalization preconditioner.
//!
//! Solves `(γ W_t ⊗ M_s + ν M_t ⊗ K_s) x = r` for Kronecker-structured spatial
//! matrices by moving to the eigenbasis of the spatial pencils and the
//! arrowhead basis of the time pencil, where the system becomes
//! `γ Δ_t ⊗ I + ν I ⊗ Λ_s` and is solved by block elimination.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::kronop::{kron_matvec, KronFactor};
use crate::matrix::{BandedMatrix, DenseMatrix};
use crate::operator::LinearOperator;
use crate::pencil::{time_factorization, SpaceFactorization, TimeFactorization};
use crate::scalar::Real;

/// `γ Δ_t ⊗ I + ν I ⊗ Λ_s` with precomputed elimination data.
#[derive(Clone, Debug)]
pub struct ArrowheadSystem<T> {
    gamma: T,
    pairs: Vec<T>,
    zero_count: usize,
    g: Vec<T>,
    sigma: T,
    /// `ν Λ_s`.
    a: Vec<T>,
    /// `1 / (a² + (γ λ_k)²)`, pair-major.
    rinv: Vec<T>,
    schur_inv: Vec<T>,
}

impl<T: Real> ArrowheadSystem<T> {
    pub fn from_parts(
        gamma: T,
        nu: T,
        pairs: Vec<T>,
        zero_count: usize,
        g: Vec<T>,
        sigma: T,
        lambda_s: &[T],
    ) -> Result<Self> {
        if !(gamma > T::zero()) || !(nu > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "coefficients must be positive, got gamma = {gamma}, nu = {nu}"
            )));
        }
        if zero_count > 1 {
            return Err(Error::InvalidArgument("at most one zero time eigenvalue".into()));
        }
        check_len(2 * pairs.len() + zero_count, g.len())?;
        let a: Vec<T> = lambda_s.iter().map(|&l| nu * l).collect();
        if let Some(bad) = a.iter().find(|v| !(**v > T::zero())) {
            return Err(Error::Singular(format!("spatial eigenvalue product {bad} is not positive")));
        }
        let ns = a.len();
        let mut rinv = Vec::with_capacity(pairs.len() * ns);
        for &lam in &pairs {
            let c = gamma * lam;
            rinv.extend(a.iter().map(|&ai| T::one() / (ai * ai + c * c)));
        }
        let g2 = gamma * gamma;
        let mut schur_inv = Vec::with_capacity(ns);
        for (i, &ai) in a.iter().enumerate() {
            let mut s = gamma * sigma + ai;
            for k in 0..pairs.len() {
                let (g1, g2k) = (g[2 * k], g[2 * k + 1]);
                s += g2 * ai * rinv[k * ns + i] * (g1 * g1 + g2k * g2k);
            }
            if zero_count == 1 {
                let gz = g[2 * pairs.len()];
                s += g2 * gz * gz / ai;
            }
            if s == T::zero() || !s.is_finite() {
                return Err(Error::Singular(format!("Schur complement entry {i} is {s}")));
            }
            schur_inv.push(T::one() / s);
        }
        Ok(Self { gamma, pairs, zero_count, g, sigma, a, rinv, schur_inv })
    }

    pub fn from_factorizations(gamma: T, nu: T, time: &TimeFactorization<T>, lambda_s: &[T]) -> Result<Self> {
        Self::from_parts(gamma, nu, time.pairs.clone(), time.zero_count, time.g.clone(), time.sigma, lambda_s)
    }

    pub fn spatial_dim(&self) -> usize {
        self.a.len()
    }

    pub fn time_dim(&self) -> usize {
        self.g.len() + 1
    }

    /// Overwrites `s` (eigencoordinates, time slowest) with the solution.
    pub fn solve_in_place(&self, s: &mut [T]) -> Result<()> {
        let ns = self.spatial_dim();
        let nt = self.time_dim();
        check_len(ns * nt, s.len())?;
        let gamma = self.gamma;
        let (lead, last) = s.split_at_mut((nt - 1) * ns);
        // forward elimination into the last block
        for (k, &lam) in self.pairs.iter().enumerate() {
            let c = gamma * lam;
            let (g1, g2) = (self.g[2 * k], self.g[2 * k + 1]);
            let (s1, s2) = lead[2 * k * ns..(2 * k + 2) * ns].split_at(ns);
            let rinv = &self.rinv[k * ns..(k + 1) * ns];
            for i in 0..ns {
                let a = self.a[i];
                last[i] += gamma * rinv[i] * ((g1 * a + g2 * c) * s1[i] + (g2 * a - g1 * c) * s2[i]);
            }
        }
        if self.zero_count == 1 {
            let kz = 2 * self.pairs.len();
            let gz = self.g[kz];
            let sz = &lead[kz * ns..(kz + 1) * ns];
            for i in 0..ns {
                last[i] += gamma * gz * sz[i] / self.a[i];
            }
        }
        for (x, &si) in last.iter_mut().zip(&self.schur_inv) {
            *x *= si;
        }
        // back substitution
        for (k, &lam) in self.pairs.iter().enumerate() {
            let c = gamma * lam;
            let (g1, g2) = (gamma * self.g[2 * k], gamma * self.g[2 * k + 1]);
            let (s1, s2) = lead[2 * k * ns..(2 * k + 2) * ns].split_at_mut(ns);
            let rinv = &self.rinv[k * ns..(k + 1) * ns];
            for i in 0..ns {
                let a = self.a[i];
                let b1 = s1[i] - g1 * last[i];
                let b2 = s2[i] - g2 * last[i];
                s1[i] = rinv[i] * (a * b1 - c * b2);
                s2[i] = rinv[i] * (c * b1 + a * b2);
            }
        }
        if self.zero_count == 1 {
            let kz = 2 * self.pairs.len();
            let gz = gamma * self.g[kz];
            let sz = &mut lead[kz * ns..(kz + 1) * ns];
            for i in 0..ns {
                sz[i] = (sz[i] - gz * last[i]) / self.a[i];
            }
        }
        Ok(())
    }

    /// Dense `γ Δ_t ⊗ I + ν I ⊗ Λ_s`. Small instances only.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let ns = self.spatial_dim();
        let nt = self.time_dim();
        let mut delta = DenseMatrix::zeros(nt, nt);
        for (k, &lam) in self.pairs.iter().enumerate() {
            delta[(2 * k, 2 * k + 1)] = lam;
            delta[(2 * k + 1, 2 * k)] = -lam;
        }
        for (i, &gi) in self.g.iter().enumerate() {
            delta[(i, nt - 1)] = gi;
            delta[(nt - 1, i)] = -gi;
        }
        delta[(nt - 1, nt - 1)] = self.sigma;
        let mut m = delta.scale(self.gamma).kron(&DenseMatrix::identity(ns));
        for j in 0..nt {
            for i in 0..ns {
                m[(j * ns + i, j * ns + i)] += self.a[i];
            }
        }
        m
    }
}

/// Setup data and application of `Â⁻¹` (or `(D^{1/2} Ã D^{1/2})⁻¹` when a
/// scaling is supplied).
#[derive(Clone)]
pub struct ExtendedFdPreconditioner<T> {
    space: SpaceFactorization<T>,
    time: TimeFactorization<T>,
    arrow: ArrowheadSystem<T>,
    forward: Vec<Arc<dyn KronFactor<T>>>,
    backward: Vec<Arc<dyn KronFactor<T>>>,
    inv_sqrt_scaling: Option<Vec<T>>,
    n_dof: usize,
}

impl<T: Real> ExtendedFdPreconditioner<T> {
    /// `space_pencils[l] = (K_l, M_l)`; `scaling` is the diagonal `D`.
    pub fn setup(
        space_pencils: &[(BandedMatrix<T>, BandedMatrix<T>)],
        w_t: &BandedMatrix<T>,
        m_t: &BandedMatrix<T>,
        gamma: T,
        nu: T,
        scaling: Option<Vec<T>>,
    ) -> Result<Self> {
        if !(gamma > T::zero()) || !(nu > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "coefficients must be positive, got gamma = {gamma}, nu = {nu}"
            )));
        }
        let space = SpaceFactorization::from_banded(space_pencils)?;
        let time = time_factorization(w_t, m_t)?;
        let arrow = ArrowheadSystem::from_factorizations(gamma, nu, &time, &space.lambda_s())?;
        let n_dof = space.dims().iter().product::<usize>() * time.dim();
        let inv_sqrt_scaling = match scaling {
            None => None,
            Some(d) => {
                check_len(n_dof, d.len())?;
                if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
                    return Err(Error::Scaling(format!("scaling entry {i} is {v}, expected a positive value")));
                }
                Some(d.iter().map(|&v| T::one() / v.sqrt()).collect())
            }
        };
        let mut forward: Vec<Arc<dyn KronFactor<T>>> = Vec::new();
        let mut backward: Vec<Arc<dyn KronFactor<T>>> = Vec::new();
        for dir in &space.directions {
            forward.push(Arc::new(dir.vectors.transpose()));
            backward.push(Arc::new(dir.vectors.clone()));
        }
        forward.push(Arc::new(time.u_t.transpose()));
        backward.push(Arc::new(time.u_t.clone()));
        Ok(Self { space, time, arrow, forward, backward, inv_sqrt_scaling, n_dof })
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn space(&self) -> &SpaceFactorization<T> {
        &self.space
    }

    pub fn time(&self) -> &TimeFactorization<T> {
        &self.time
    }

    pub fn arrowhead(&self) -> &ArrowheadSystem<T> {
        &self.arrow
    }

    pub fn is_scaled(&self) -> bool {
        self.inv_sqrt_scaling.is_some()
    }

    pub fn apply(&self, r: &[T]) -> Result<Vec<T>> {
        check_len(self.n_dof, r.len())?;
        let mut x = r.to_vec();
        if let Some(s) = &self.inv_sqrt_scaling {
            x.iter_mut().zip(s).for_each(|(v, &d)| *v *= d);
        }
        let fw: Vec<&dyn KronFactor<T>> = self.forward.iter().map(|f| f.as_ref()).collect();
        let mut y = kron_matvec(&fw, &x)?;
        self.arrow.solve_in_place(&mut y)?;
        let bw: Vec<&dyn KronFactor<T>> = self.backward.iter().map(|f| f.as_ref()).collect();
        let mut z = kron_matvec(&bw, &y)?;
        if let Some(s) = &self.inv_sqrt_scaling {
            z.iter_mut().zip(s).for_each(|(v, &d)| *v *= d);
        }
        Ok(z)
    }
}

impl<T: Real> LinearOperator<T> for ExtendedFdPreconditioner<T> {
    fn dim(&self) -> usize {
        self.n_dof
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        let z = self.apply(x).expect("preconditioner input has the operator dimension");
        y.copy_from_slice(&z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_time_matrices;

    #[test]
    fn scalar_system() {
        let (w, m) = assemble_time_matrices::<f64>(1, 1, 1.0).unwrap();
        let k = BandedMatrix::from_diagonal_entries(&[4.0]);
        let ms = BandedMatrix::from_diagonal_entries(&[1.0 / 3.0]);
        let p = ExtendedFdPreconditioner::setup(&[(k, ms)], &w, &m, 1.0, 1.0, None).unwrap();
        // Â = W⊗M_s + M⊗K = 1/2 · 1/3 + 1/3 · 4
        let a = 0.5 / 3.0 + 4.0 / 3.0;
        let x = p.apply(&[2.0]).unwrap();
        assert!((x[0] - 2.0 / a).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let (w, m) = assemble_time_matrices::<f64>(1, 2, 1.0).unwrap();
        let k = BandedMatrix::from_diagonal_entries(&[4.0]);
        let ms = BandedMatrix::from_diagonal_entries(&[1.0 / 3.0]);
        let pencils = [(k, ms)];
        assert!(ExtendedFdPreconditioner::setup(&pencils, &w, &m, 0.0, 1.0, None).is_err());
        assert!(matches!(
            ExtendedFdPreconditioner::setup(&pencils, &w, &m, 1.0, 1.0, Some(vec![1.0, -1.0])),
            Err(Error::Scaling(_))
        ));
    }

    #[test]
    fn decoupled_blocks() {
        let sys = ArrowheadSystem::from_parts(1.0, 1.0, vec![2.0], 0, vec![0.0, 0.0], 1.0, &[1.0]).unwrap();
        let mut s: Vec<f64> = vec![1.0, 0.0, 2.0];
        sys.solve_in_place(&mut s).unwrap();
        // [[1,2],[-2,1]] x = (1,0) → x = (1,2)/5
        assert!((s[0] - 0.2).abs() < 1e-15 && (s[1] - 0.4).abs() < 1e-15);
        assert!((s[2] - 1.0).abs() < 1e-15);
    }
}
