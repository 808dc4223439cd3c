//! Assembled space-time systems and their preconditioners.
//!
//! With `γ = γ_s γ_t` and `ν = ν_s ν_t`, dividing the equation by `γ_t` gives
//! the operator `W_t ⊗ M_s[γ_s] + M_t[ν_t/γ_t] ⊗ K_s[ν_s]` and forcing
//! `f / γ_t`. Constant coefficients stay outside the matrices, so the operator
//! reads `γ W_t ⊗ M_s + ν M_t ⊗ K_s`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{
    assemble_rhs, assemble_spatial_parametric, assemble_spatial_physical, assemble_time_matrices, assemble_univariate,
    coefficient_diagonal_samples, separate_variables, system_diagonal, SeparableCoefficients, SpatialIntegrator,
    Weight,
};
use crate::bspline::{gauss_rule, KnotVector, QuadratureRule, SplineSpace1D};
use crate::error::{Error, Result};
use crate::fdsolve::ExtendedFdPreconditioner;
use crate::gmres::{solve, GmresOptions, SolveReport};
use crate::kronop::{KronFactor, KronSumOperator, KronTerm};
use crate::matrix::{BandedMatrix, CsrMatrix};
use crate::operator::LinearOperator;
use crate::problems::{Coefficient, DiscreteSolution, ProblemSpec};
use crate::scalar::Real;

/// Preconditioner choice for the space-time solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PreconditionerKind {
    None,
    /// Parametric-domain fast diagonalization `Â`.
    Parametric,
    /// Geometry- and coefficient-informed variant with diagonal scaling `Â^G`.
    Geometric,
}

impl PreconditionerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Parametric => "Ahat",
            Self::Geometric => "AhatG",
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "Ahat" | "ahat" => Ok(Self::Parametric),
            "AhatG" | "ahatg" | "ahat_g" => Ok(Self::Geometric),
            _ => Err(Error::InvalidArgument(format!("unknown preconditioner '{s}' (none, Ahat, AhatG)"))),
        }
    }
}

/// Factor data of the geometry-informed preconditioner.
#[derive(Clone)]
pub struct GeometricData<T> {
    /// `(K̃_l, M̃_l)` per direction.
    pub pencils: Vec<(BandedMatrix<T>, BandedMatrix<T>)>,
    pub time_mass: BandedMatrix<T>,
    pub gamma: T,
    pub nu: T,
    pub separation: SeparableCoefficients<T>,
    /// `Ã` as a matrix-free operator.
    pub operator: KronSumOperator<T>,
    /// `D = diag(A) / diag(Ã)`.
    pub scaling: Vec<T>,
}

/// Result of a preconditioned solve.
pub struct SystemSolve<T> {
    pub solution: DiscreteSolution<T>,
    pub report: SolveReport<T>,
    /// Preconditioner setup seconds.
    pub setup_time: f64,
}

/// Galerkin system of a problem for degree `p` and `n_el` elements in every
/// direction of space and time.
pub struct SpaceTimeSystem<T> {
    pub problem: ProblemSpec<T>,
    pub degree: usize,
    pub n_el: usize,
    pub spaces: Vec<SplineSpace1D<T>>,
    pub quads: Vec<QuadratureRule<T>>,
    pub time_space: SplineSpace1D<T>,
    pub time_quad: QuadratureRule<T>,
    pub w_t: BandedMatrix<T>,
    /// `M_t` without coefficient.
    pub m_t: BandedMatrix<T>,
    /// `M_t[ν_t/γ_t]`; equals `m_t` for constant coefficients.
    pub m_t_weighted: BandedMatrix<T>,
    pub k_s: CsrMatrix<T>,
    pub m_s: CsrMatrix<T>,
    pub gamma: T,
    pub nu: T,
    pub operator: KronSumOperator<T>,
    pub rhs: Vec<T>,
}

fn time_ratio<T: Real>(gamma: &Coefficient<T>, nu: &Coefficient<T>, t: T) -> Result<T> {
    let gt = gamma.time_value(t);
    if !(gt > T::zero()) {
        return Err(Error::InvalidArgument(format!("time factor of the capacity is {gt} at t = {t}")));
    }
    Ok(nu.time_value(t) / gt)
}

impl<T: Real> SpaceTimeSystem<T> {
    pub fn assemble(problem: &ProblemSpec<T>, degree: usize, n_el: usize) -> Result<Self> {
        let d = problem.dim();
        let kv = KnotVector::uniform(degree, n_el)?;
        let spaces = (0..d).map(|_| SplineSpace1D::spatial(kv.clone())).collect::<Result<Vec<_>>>()?;
        let quads = spaces.iter().map(|s| gauss_rule(s.knot_vector(), degree + 1)).collect::<Result<Vec<_>>>()?;
        let time_space = SplineSpace1D::temporal(kv.clone())?;
        let time_quad = gauss_rule(&kv, degree + 1)?;
        let big_t = problem.final_time;
        let (w_t, m_t) = assemble_time_matrices(degree, n_el, big_t)?;
        let constant = problem.has_constant_coefficients();
        let (gamma, nu) = match (&problem.gamma, &problem.nu) {
            (Coefficient::Constant(g), Coefficient::Constant(n)) => (*g, *n),
            _ => (T::one(), T::one()),
        };
        if !(gamma > T::zero()) || !(nu > T::zero()) {
            return Err(Error::InvalidArgument("capacity and diffusion must be positive".into()));
        }
        let m_t_weighted = if constant {
            m_t.clone()
        } else {
            let (g, n) = (problem.gamma.clone(), problem.nu.clone());
            // validate once on the quadrature nodes, then integrate
            for &tau in time_quad.nodes() {
                time_ratio(&g, &n, tau * big_t)?;
            }
            let f = move |tau: T| time_ratio(&g, &n, tau * big_t).unwrap_or(T::zero());
            assemble_univariate(&time_space, &time_quad, 0, 0, Weight::Function(&f))?.scale(big_t)
        };
        let (k_s, m_s) = if constant {
            assemble_spatial_physical(&spaces, &quads, &problem.geometry, None, None)?
        } else {
            let (g, n) = (problem.gamma.clone(), problem.nu.clone());
            let nu_s = move |x: &[T]| n.space_value(x);
            let ga_s = move |x: &[T]| g.space_value(x);
            assemble_spatial_physical(&spaces, &quads, &problem.geometry, Some(&nu_s), Some(&ga_s))?
        };
        let n_s = k_s.nrows();
        let n_t = time_space.dim();
        let operator = KronSumOperator::new(
            vec![n_s, n_t],
            vec![
                KronTerm::new(gamma, vec![Arc::new(m_s.clone()), Arc::new(w_t.clone())]),
                KronTerm::new(nu, vec![Arc::new(k_s.clone()), Arc::new(m_t_weighted.clone())]),
            ],
        )?;
        let rhs = {
            let f = problem.rhs.clone();
            let g = problem.gamma.clone();
            let forcing = move |x: &[T], t: T| f(x, t) / g.time_value(t);
            assemble_rhs(&spaces, &quads, &time_space, &time_quad, big_t, &problem.geometry, &forcing)?
        };
        Ok(Self {
            problem: problem.clone(),
            degree,
            n_el,
            spaces,
            quads,
            time_space,
            time_quad,
            w_t,
            m_t,
            m_t_weighted,
            k_s,
            m_s,
            gamma,
            nu,
            operator,
            rhs,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.operator.n_dof()
    }

    /// `(n_1, ..., n_d, n_t)`.
    pub fn mode_dims(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.spaces.iter().map(|s| s.dim()).collect();
        v.push(self.time_space.dim());
        v
    }

    /// `(K̂_l, M̂_l)` per direction.
    pub fn parametric_pencils(&self) -> Result<Vec<(BandedMatrix<T>, BandedMatrix<T>)>> {
        assemble_spatial_parametric(&self.spaces, &self.quads)
    }

    /// Constants of `Â`: the given ones, or means over `Ω` (capacity) and
    /// `Ω × (0, T)` (diffusion) for variable coefficients.
    pub fn parametric_coefficients(&self) -> Result<(T, T)> {
        if self.problem.has_constant_coefficients() {
            return Ok((self.gamma, self.nu));
        }
        let integ = SpatialIntegrator::new(&self.spaces, &self.quads, &self.problem.geometry)?;
        let d = integ.dim();
        let (mut vol, mut g_int, mut n_int) = (T::zero(), T::zero(), T::zero());
        integ.for_each_element(|el| {
            for pt in &el.points {
                let x = &pt.x[..d];
                vol += pt.dvol;
                g_int += pt.dvol * self.problem.gamma.space_value(x);
                n_int += pt.dvol * self.problem.nu.space_value(x);
            }
            Ok(())
        })?;
        let big_t = self.problem.final_time;
        let mut t_int = T::zero();
        for (&tau, &w) in self.time_quad.nodes().iter().zip(self.time_quad.weights()) {
            t_int += w * time_ratio(&self.problem.gamma, &self.problem.nu, tau * big_t)?;
        }
        Ok((g_int / vol, n_int / vol * t_int))
    }

    /// `Â` as a matrix-free operator over the `d + 1` modes.
    pub fn parametric_operator(&self) -> Result<KronSumOperator<T>> {
        let (gamma, nu) = self.parametric_coefficients()?;
        kron_heat_operator(&self.parametric_pencils()?, &self.w_t, &self.m_t, gamma, nu)
    }

    pub fn parametric_preconditioner(&self) -> Result<ExtendedFdPreconditioner<T>> {
        let (gamma, nu) = self.parametric_coefficients()?;
        ExtendedFdPreconditioner::setup(&self.parametric_pencils()?, &self.w_t, &self.m_t, gamma, nu, None)
    }

    /// Separable approximation `Ã` of the system and its scaling `D`.
    pub fn geometric_data(&self) -> Result<GeometricData<T>> {
        let constant = self.problem.has_constant_coefficients();
        let breakpoints: Vec<Vec<T>> = self.spaces.iter().map(|s| s.knot_vector().breakpoints()).collect();
        let samples = if constant {
            coefficient_diagonal_samples(&breakpoints, &self.problem.geometry, None, None)?
        } else {
            let (g, n) = (self.problem.gamma.clone(), self.problem.nu.clone());
            let nu_s = move |x: &[T]| n.space_value(x);
            let ga_s = move |x: &[T]| g.space_value(x);
            coefficient_diagonal_samples(&breakpoints, &self.problem.geometry, Some(&nu_s), Some(&ga_s))?
        };
        let separation = separate_variables(&samples)?;
        let pencils = self
            .spaces
            .iter()
            .zip(&self.quads)
            .enumerate()
            .map(|(l, (s, q))| {
                Ok((
                    assemble_univariate(s, q, 1, 1, Weight::PerElement(&separation.big_phi[l]))?,
                    assemble_univariate(s, q, 0, 0, Weight::PerElement(&separation.phi[l]))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let operator = kron_heat_operator(&pencils, &self.w_t, &self.m_t_weighted, self.gamma, self.nu)?;
        let diag_a = system_diagonal(&self.operator);
        let diag_approx = system_diagonal(&operator);
        let scaling = diag_a
            .iter()
            .zip(&diag_approx)
            .enumerate()
            .map(|(i, (&a, &b))| {
                if a > T::zero() && b > T::zero() {
                    Ok(a / b)
                } else {
                    Err(Error::Scaling(format!("diagonal entry {i}: diag(A) = {a}, diag(Ã) = {b}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GeometricData {
            pencils,
            time_mass: self.m_t_weighted.clone(),
            gamma: self.gamma,
            nu: self.nu,
            separation,
            operator,
            scaling,
        })
    }

    pub fn geometric_preconditioner(&self) -> Result<(ExtendedFdPreconditioner<T>, SeparableCoefficients<T>)> {
        let data = self.geometric_data()?;
        let p = ExtendedFdPreconditioner::setup(
            &data.pencils,
            &self.w_t,
            &data.time_mass,
            data.gamma,
            data.nu,
            Some(data.scaling),
        )?;
        Ok((p, data.separation))
    }

    pub fn preconditioner(&self, kind: PreconditionerKind) -> Result<Option<ExtendedFdPreconditioner<T>>> {
        Ok(match kind {
            PreconditionerKind::None => None,
            PreconditionerKind::Parametric => Some(self.parametric_preconditioner()?),
            PreconditionerKind::Geometric => Some(self.geometric_preconditioner()?.0),
        })
    }

    /// Sets up the preconditioner and runs GMRES from the zero initial guess.
    pub fn solve(&self, kind: PreconditionerKind, opts: &GmresOptions<T>) -> Result<SystemSolve<T>> {
        let t0 = Instant::now();
        let prec = self.preconditioner(kind)?;
        let setup_time = t0.elapsed().as_secs_f64();
        let p = prec.as_ref().map(|p| p as &dyn LinearOperator<T>);
        let (x, report) = solve(&self.operator, p, &self.rhs, opts)?;
        let solution = DiscreteSolution::new(self.spaces.clone(), self.time_space.clone(), self.problem.final_time, x)?;
        Ok(SystemSolve { solution, report, setup_time })
    }
}

/// `γ W_t ⊗ M_s + ν M_t ⊗ K_s` with `K_s = Σ_l M_d ⊗ .. ⊗ K_l ⊗ .. ⊗ M_1`.
pub fn kron_heat_operator<T: Real>(
    pencils: &[(BandedMatrix<T>, BandedMatrix<T>)],
    w_t: &BandedMatrix<T>,
    m_t: &BandedMatrix<T>,
    gamma: T,
    nu: T,
) -> Result<KronSumOperator<T>> {
    let ks: Vec<Arc<dyn KronFactor<T>>> =
        pencils.iter().map(|(k, _)| Arc::new(k.clone()) as Arc<dyn KronFactor<T>>).collect();
    let ms: Vec<Arc<dyn KronFactor<T>>> =
        pencils.iter().map(|(_, m)| Arc::new(m.clone()) as Arc<dyn KronFactor<T>>).collect();
    let w: Arc<dyn KronFactor<T>> = Arc::new(w_t.clone());
    let m: Arc<dyn KronFactor<T>> = Arc::new(m_t.clone());
    let mut dims: Vec<usize> = pencils.iter().map(|(k, _)| k.dim()).collect();
    dims.push(w_t.dim());
    let mut mass_factors = ms.clone();
    mass_factors.push(w);
    let mut terms = vec![KronTerm::new(gamma, mass_factors)];
    for l in 0..pencils.len() {
        let mut f = ms.clone();
        f[l] = ks[l].clone();
        f.push(m.clone());
        terms.push(KronTerm::new(nu, f));
    }
    KronSumOperator::new(dims, terms)
}
