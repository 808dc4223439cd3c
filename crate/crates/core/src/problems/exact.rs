use crate::scalar::Real;

use super::ExactSolution;

/// `u = Π_l sin(π x_l) · sin(π t)`.
#[derive(Clone, Copy, Debug)]
pub struct SineProduct {
    pub d: usize,
}

impl<T: Real> ExactSolution<T> for SineProduct {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[T], t: T) -> T {
        let pi = T::PI();
        x.iter().map(|&xi| (pi * xi).sin()).fold((pi * t).sin(), |a, b| a * b)
    }

    fn gradient(&self, x: &[T], t: T) -> [T; 3] {
        let pi = T::PI();
        let mut g = [T::zero(); 3];
        for (l, gl) in g.iter_mut().enumerate().take(x.len()) {
            *gl = x
                .iter()
                .enumerate()
                .fold(pi * (pi * t).sin(), |a, (k, &xk)| a * if k == l { (pi * xk).cos() } else { (pi * xk).sin() });
        }
        g
    }

    fn time_derivative(&self, x: &[T], t: T) -> T {
        let pi = T::PI();
        x.iter().map(|&xi| (pi * xi).sin()).fold(pi * (pi * t).cos(), |a, b| a * b)
    }

    fn laplacian(&self, x: &[T], t: T) -> T {
        let pi = T::PI();
        -T::of_usize(x.len()) * pi * pi * self.value(x, t)
    }
}

/// `u = −(ρ − 1)(ρ − 4) x_1 x_2² sin t` with `ρ = x_1² + x_2²`; vanishes on the
/// quarter annulus with radii 1 and 2 in the first quadrant.
#[derive(Clone, Copy, Debug, Default)]
pub struct AnnulusPolynomial;

/// `(q, q', P)` with `q(ρ) = −(ρ − 1)(ρ − 4)`, `P = x_1 x_2²`.
fn radial_parts<T: Real>(x1: T, x2: T) -> (T, T, T, T) {
    let rho = x1 * x1 + x2 * x2;
    let q = -(rho - T::one()) * (rho - T::of(4.0));
    let dq = T::of(5.0) - T::of(2.0) * rho;
    (rho, q, dq, x1 * x2 * x2)
}

/// Planar value, gradient and Laplacian of `q(ρ) P`.
fn planar<T: Real>(x1: T, x2: T) -> (T, [T; 2], T) {
    let (rho, q, dq, p) = radial_parts(x1, x2);
    let two = T::of(2.0);
    let gp = [x2 * x2, two * x1 * x2];
    let g = [dq * two * x1 * p + q * gp[0], dq * two * x2 * p + q * gp[1]];
    // Δq = q''|∇ρ|² + q'Δρ with q'' = −2, |∇ρ|² = 4ρ, Δρ = 4; ∇q·∇P = 6 q' P; ΔP = 2 x_1
    let lap = p * (T::of(-8.0) * rho + T::of(4.0) * dq) + T::of(12.0) * dq * p + two * x1 * q;
    (q * p, g, lap)
}

impl<T: Real> ExactSolution<T> for AnnulusPolynomial {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[T], t: T) -> T {
        planar(x[0], x[1]).0 * t.sin()
    }

    fn gradient(&self, x: &[T], t: T) -> [T; 3] {
        let (_, g, _) = planar(x[0], x[1]);
        [g[0] * t.sin(), g[1] * t.sin(), T::zero()]
    }

    fn time_derivative(&self, x: &[T], t: T) -> T {
        planar(x[0], x[1]).0 * t.cos()
    }

    fn laplacian(&self, x: &[T], t: T) -> T {
        planar(x[0], x[1]).2 * t.sin()
    }
}

/// `u = −(ρ − 1)(ρ − 4) x_1 x_2² sin t sin x_3` on the revolved quarter annulus.
#[derive(Clone, Copy, Debug, Default)]
pub struct RevolvedAnnulusPolynomial;

impl<T: Real> ExactSolution<T> for RevolvedAnnulusPolynomial {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[T], t: T) -> T {
        planar(x[0], x[1]).0 * t.sin() * x[2].sin()
    }

    fn gradient(&self, x: &[T], t: T) -> [T; 3] {
        let (v, g, _) = planar(x[0], x[1]);
        let (st, s3, c3) = (t.sin(), x[2].sin(), x[2].cos());
        [g[0] * st * s3, g[1] * st * s3, v * st * c3]
    }

    fn time_derivative(&self, x: &[T], t: T) -> T {
        planar(x[0], x[1]).0 * t.cos() * x[2].sin()
    }

    fn laplacian(&self, x: &[T], t: T) -> T {
        let (v, _, lap) = planar(x[0], x[1]);
        (lap - v) * t.sin() * x[2].sin()
    }
}
