use crate::error::{Error, Result};
use crate::kronop::{multi_index, Tensor};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 50;
const TOLERANCE: f64 = 1e-10;

/// Piecewise-constant rank-one factors of the sampled coefficient diagonal.
///
/// `phi[l]` approximates the mass entry `Π_l phi[l]`; the stiffness entry `l`
/// is approximated by `phi[1] ... big_phi[l] ... phi[d]`.
#[derive(Clone, Debug)]
pub struct SeparableCoefficients<T> {
    pub phi: Vec<Vec<T>>,
    pub big_phi: Vec<Vec<T>>,
    /// Relative Frobenius residuals: stiffness entries `1..=d`, then mass.
    pub residuals: Vec<T>,
    pub sweeps: usize,
    pub converged: bool,
}

fn slice_component<T: Real>(samples: &Tensor<T>, comp: usize) -> Vec<T> {
    let n: usize = samples.shape()[..samples.shape().len() - 1].iter().product();
    samples.data()[comp * n..(comp + 1) * n].to_vec()
}

fn rank_one<T: Real>(factors: &[Vec<T>], shape: &[usize]) -> Vec<T> {
    let n: usize = shape.iter().product();
    (0..n)
        .map(|k| {
            let idx = multi_index(k, shape);
            idx.iter().zip(factors).map(|(&i, f)| f[i]).fold(T::one(), |a, b| a * b)
        })
        .collect()
}

fn rel_residual<T: Real>(c: &[T], approx: &[T]) -> T {
    let num: T = c.iter().zip(approx).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let den: T = c.iter().map(|&a| a * a).sum();
    (num / den).sqrt()
}

/// Rank-one alternating least squares fit of a positive tensor.
fn als_rank_one<T: Real>(c: &[T], shape: &[usize]) -> (Vec<Vec<T>>, usize, bool) {
    let d = shape.len();
    let idx: Vec<Vec<usize>> = (0..c.len()).map(|k| multi_index(k, shape)).collect();
    let mut f: Vec<Vec<T>> = shape.iter().map(|&n| vec![T::one(); n]).collect();
    let tol = T::of(TOLERANCE);
    for sweep in 1..=MAX_SWEEPS {
        let mut change = T::zero();
        for l in 0..d {
            let mut num = vec![T::zero(); shape[l]];
            let mut den = vec![T::zero(); shape[l]];
            for (k, ix) in idx.iter().enumerate() {
                let other = (0..d).filter(|&m| m != l).fold(T::one(), |a, m| a * f[m][ix[m]]);
                num[ix[l]] += c[k] * other;
                den[ix[l]] += other * other;
            }
            let new: Vec<T> = num.iter().zip(&den).map(|(&a, &b)| a / b).collect();
            let diff: T = new.iter().zip(&f[l]).map(|(&a, &b)| (a - b) * (a - b)).sum();
            let norm: T = new.iter().map(|&a| a * a).sum();
            change = change.max((diff / norm).sqrt());
            f[l] = new;
        }
        normalize_gauge(&mut f);
        if change <= tol {
            return (f, sweep, true);
        }
    }
    (f, MAX_SWEEPS, false)
}

/// Unit geometric mean for every factor but the first, which absorbs the scale.
fn normalize_gauge<T: Real>(f: &mut [Vec<T>]) {
    for l in 1..f.len() {
        let n = T::of_usize(f[l].len());
        let gm = (f[l].iter().map(|v| v.ln()).sum::<T>() / n).exp();
        f[l].iter_mut().for_each(|v| *v /= gm);
        f[0].iter_mut().for_each(|v| *v *= gm);
    }
}

/// Separates the samples produced by
/// [`coefficient_diagonal_samples`](super::coefficient_diagonal_samples).
pub fn separate_variables<T: Real>(samples: &Tensor<T>) -> Result<SeparableCoefficients<T>> {
    let full = samples.shape();
    let d = full.len() - 1;
    if d == 0 || full[d] != d + 1 {
        return Err(Error::InvalidArgument(format!("sample tensor shape {full:?} does not end with d + 1 components")));
    }
    if let Some(v) = samples.data().iter().find(|v| !(**v > T::zero())) {
        return Err(Error::InvalidArgument(format!("coefficient samples must be positive, found {v}")));
    }
    let shape = &full[..d];
    let mass = slice_component(samples, d);
    let (phi, sweeps, converged) = als_rank_one(&mass, shape);
    if !converged {
        log::warn!("coefficient separation did not converge within {MAX_SWEEPS} sweeps; using the last iterate");
    }
    let mut residuals = Vec::with_capacity(d + 1);
    let mut big_phi = Vec::with_capacity(d);
    for l in 0..d {
        let c = slice_component(samples, l);
        let mut acc = vec![T::zero(); shape[l]];
        for (k, &v) in c.iter().enumerate() {
            let ix = multi_index(k, shape);
            let other = (0..d).filter(|&m| m != l).fold(T::one(), |a, m| a * phi[m][ix[m]]);
            acc[ix[l]] += v / other;
        }
        let count = T::of_usize(c.len() / shape[l]);
        let bl: Vec<T> = acc.into_iter().map(|v| v / count).collect();
        let mut factors = phi.clone();
        factors[l] = bl.clone();
        residuals.push(rel_residual(&c, &rank_one(&factors, shape)));
        big_phi.push(bl);
    }
    residuals.push(rel_residual(&mass, &rank_one(&phi, shape)));
    Ok(SeparableCoefficients { phi, big_phi, residuals, sweeps, converged })
}
