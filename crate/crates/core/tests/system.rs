use stfd::gmres::GmresOptions;
use stfd::problems::builtin_problem;
use stfd::{LinearOperator, PreconditionerKind, SpaceTimeSystem};

#[test]
fn parametric_preconditioner_is_exact_on_the_unit_square() {
    let pr = builtin_problem::<f64>("square").unwrap();
    let s = SpaceTimeSystem::assemble(&pr, 3, 6).unwrap();
    let out = s.solve(PreconditionerKind::Parametric, &GmresOptions::default()).unwrap();
    assert_eq!(out.report.iterations, 1);
    assert!(out.report.true_relative_residual < 1e-12);
    assert_eq!(s.mode_dims(), vec![7, 7, 8]);
}

#[test]
fn geometric_data_reduces_to_the_system_on_identity_geometry() {
    let pr = builtin_problem::<f64>("square").unwrap();
    let s = SpaceTimeSystem::assemble(&pr, 2, 4).unwrap();
    let g = s.geometric_data().unwrap();
    assert!(g.scaling.iter().all(|&v| (v - 1.0).abs() < 1e-13));
    let x: Vec<f64> = (0..s.n_dof()).map(|i| (i as f64 * 0.17).cos()).collect();
    let (a, b) = (s.operator.apply_vec(&x), g.operator.apply_vec(&x));
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
}

#[test]
fn variable_coefficient_means() {
    let pr = builtin_problem::<f64>("square_varcoef").unwrap();
    let s = SpaceTimeSystem::assemble(&pr, 2, 8).unwrap();
    let (gamma, nu) = s.parametric_coefficients().unwrap();
    assert!((gamma - 1.0).abs() < 1e-14);
    // midpoint-rule oracle of the space-time mean of ν
    let m = 400;
    let h = 1.0 / m as f64;
    let mut space_mean = 0.0;
    for i in 0..m {
        for j in 0..m {
            space_mean += pr.nu.space_value(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]) * h * h;
        }
    }
    let time_mean: f64 = (0..m).map(|k| pr.nu.time_value((k as f64 + 0.5) * h) * h).sum();
    let oracle = space_mean * time_mean;
    assert!((nu - oracle).abs() < 1e-3 * oracle, "{nu} vs {oracle}");
}

#[test]
fn geometric_preconditioner_needs_fewer_iterations_on_curved_domains() {
    let pr = builtin_problem::<f64>("annulus_varcoef").unwrap();
    let s = SpaceTimeSystem::assemble(&pr, 2, 6).unwrap();
    let opts = GmresOptions::default();
    let plain = s.solve(PreconditionerKind::None, &opts).unwrap().report;
    let a = s.solve(PreconditionerKind::Parametric, &opts).unwrap().report;
    let g = s.solve(PreconditionerKind::Geometric, &opts).unwrap().report;
    assert!(g.converged && a.converged);
    assert!(g.iterations < a.iterations);
    assert!(a.iterations < plain.iterations || !plain.converged);
}

#[test]
fn single_precision_solve() {
    let pr = builtin_problem::<f32>("annulus").unwrap();
    let s = SpaceTimeSystem::assemble(&pr, 2, 4).unwrap();
    let opts = GmresOptions { tol: 1e-5f32, ..GmresOptions::default() };
    let out = s.solve(PreconditionerKind::Geometric, &opts).unwrap();
    assert!(out.report.converged);
    assert!(out.report.true_relative_residual < 1e-4);
}

#[test]
fn preconditioner_names_round_trip() {
    for k in [PreconditionerKind::None, PreconditionerKind::Parametric, PreconditionerKind::Geometric] {
        assert_eq!(k.to_string().parse::<PreconditionerKind>().unwrap(), k);
    }
    assert!("ilu".parse::<PreconditionerKind>().is_err());
}
