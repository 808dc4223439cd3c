//! Study runners. Each `(p, n_el)` cell yields one CSV row plus timing data
//! for the manifest.

use std::time::Instant;

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use stfd::assembly::{assemble_spatial_parametric, assemble_time_matrices};
use stfd::bspline::{gauss_rule, KnotVector, SplineSpace1D};
use stfd::pencil::{cond2, cond2_complex, naive_pencil_eig, time_factorization, SpaceFactorization};
use stfd::problems::{builtin_problem, compute_errors, ProblemSpec};
use stfd::{GmresOptions, PreconditionerKind, SpaceTimeSystem};

use crate::config::{Study, StudyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoConverge,
    SkippedMemory,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NoConverge => "no_converge",
            Self::SkippedMemory => "skipped_memory",
        }
    }

    fn worst(self, other: Self) -> Self {
        match (self, other) {
            (Self::SkippedMemory, _) | (_, Self::SkippedMemory) => Self::SkippedMemory,
            (Self::NoConverge, _) | (_, Self::NoConverge) => Self::NoConverge,
            _ => Self::Ok,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub p: usize,
    pub n_el: usize,
    /// Study-specific columns, formatted.
    pub values: Vec<String>,
    /// Raw errors kept for observed-order columns.
    pub errors: Option<(f64, f64)>,
    pub status: Status,
    pub timings: Value,
}

#[derive(Debug)]
pub struct StudyOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub cells: Vec<CellResult>,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.6e}")
}

/// Unknowns of a space-time cell: `n_el + p − 2` per spatial direction and
/// `n_el + p − 1` in time.
pub fn space_time_dofs(dim: usize, p: usize, n_el: usize) -> usize {
    (n_el + p - 2).pow(dim as u32) * (n_el + p - 1)
}

fn study_header(cfg: &StudyConfig, kinds: &[PreconditionerKind]) -> Vec<String> {
    let mut h: Vec<String> = vec!["p".into(), "n_el".into()];
    match cfg.study {
        Study::CondSpace | Study::CondTimeStable | Study::CondTimeNaive => {
            h.extend(["n".into(), "kappa".into()]);
        }
        Study::Convergence => {
            h.extend(
                ["n_dof", "iterations", "err_l2l2", "err_x_upper", "order_l2l2", "order_x_upper"].map(String::from),
            );
        }
        Study::PrecondBench => {
            h.push("n_dof".into());
            for k in kinds {
                h.push(format!("iterations_{k}"));
                h.push(format!("true_residual_{k}"));
            }
        }
    }
    h.push("status".into());
    h
}

fn gmres_options(cfg: &StudyConfig) -> GmresOptions<f64> {
    GmresOptions { tol: cfg.tol, max_krylov: cfg.max_krylov, restart: cfg.restart }
}

fn cond_cell(cfg: &StudyConfig, p: usize, n_el: usize) -> Result<CellResult> {
    let n = match cfg.study {
        Study::CondSpace => n_el + p - 2,
        _ => n_el + p - 1,
    };
    if n.saturating_mul(n) > cfg.max_dofs {
        return Ok(skipped(p, n_el, vec![n.to_string(), String::new()]));
    }
    let t0 = Instant::now();
    let kappa = match cfg.study {
        Study::CondSpace => {
            let space = SplineSpace1D::spatial(KnotVector::<f64>::uniform(p, n_el)?)?;
            let quad = gauss_rule(space.knot_vector(), p + 1)?;
            let pencils = assemble_spatial_parametric(&[space], &[quad])?;
            let f = SpaceFactorization::from_banded(&pencils)?;
            cond2(&f.directions[0].vectors)?
        }
        Study::CondTimeStable => {
            let (w, m) = assemble_time_matrices::<f64>(p, n_el, 1.0)?;
            cond2(&time_factorization(&w, &m)?.u_t)?
        }
        Study::CondTimeNaive => {
            let (w, m) = assemble_time_matrices::<f64>(p, n_el, 1.0)?;
            cond2_complex(&naive_pencil_eig(&w.to_dense(), &m.to_dense())?.vectors)?
        }
        _ => unreachable!("not a conditioning study"),
    };
    Ok(CellResult {
        p,
        n_el,
        values: vec![n.to_string(), fmt_f(kappa)],
        errors: None,
        status: Status::Ok,
        timings: json!({ "p": p, "n_el": n_el, "seconds": t0.elapsed().as_secs_f64() }),
    })
}

fn skipped(p: usize, n_el: usize, mut values: Vec<String>) -> CellResult {
    values.iter_mut().skip(1).for_each(|v| v.clear());
    CellResult {
        p,
        n_el,
        values,
        errors: None,
        status: Status::SkippedMemory,
        timings: json!({ "p": p, "n_el": n_el }),
    }
}

fn solve_cell(
    cfg: &StudyConfig,
    problem: &ProblemSpec<f64>,
    kinds: &[PreconditionerKind],
    p: usize,
    n_el: usize,
) -> Result<CellResult> {
    let n_dof = space_time_dofs(cfg.dim, p, n_el);
    let width = match cfg.study {
        Study::Convergence => 6,
        _ => 1 + 2 * kinds.len(),
    };
    if n_dof > cfg.max_dofs {
        let mut values = vec![String::new(); width];
        values[0] = n_dof.to_string();
        return Ok(skipped(p, n_el, values));
    }
    let t0 = Instant::now();
    let system = SpaceTimeSystem::assemble(problem, p, n_el)?;
    let assemble_s = t0.elapsed().as_secs_f64();
    let opts = gmres_options(cfg);
    let mut status = Status::Ok;
    let mut values = vec![system.n_dof().to_string()];
    let mut runs = Vec::new();
    let mut errors = None;
    for &kind in kinds {
        let out = system.solve(kind, &opts)?;
        let r = &out.report;
        if !r.converged {
            status = status.worst(Status::NoConverge);
        }
        runs.push(json!({
            "precond": kind.as_str(),
            "setup_s": out.setup_time,
            "solve_s": r.wall_time,
            "precond_time_fraction": r.preconditioner_time_fraction,
            "iterations": r.iterations,
        }));
        match cfg.study {
            Study::Convergence => {
                let e = compute_errors(&out.solution, problem)?;
                values.extend([r.iterations.to_string(), fmt_f(e.l2l2), fmt_f(e.x_upper)]);
                errors = Some((e.l2l2, e.x_upper));
            }
            _ => values.extend([r.iterations.to_string(), fmt_f(r.true_relative_residual)]),
        }
    }
    Ok(CellResult {
        p,
        n_el,
        values,
        errors,
        status,
        timings: json!({ "p": p, "n_el": n_el, "assemble_s": assemble_s, "runs": runs }),
    })
}

/// `log(e_prev / e) / log(n / n_prev)` against the previous row of the same degree.
fn observed_orders(cells: &[CellResult]) -> Vec<(Option<f64>, Option<f64>)> {
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let prev = cells[..i].iter().rev().find(|q| q.p == c.p && q.errors.is_some());
            match (prev, c.errors) {
                (Some(q), Some((l2, x))) if q.n_el != c.n_el => {
                    let (ql2, qx) = q.errors.expect("filtered above");
                    let h = (c.n_el as f64 / q.n_el as f64).ln();
                    (Some((ql2 / l2).ln() / h), Some((qx / x).ln() / h))
                }
                _ => (None, None),
            }
        })
        .collect()
}

pub fn run(cfg: &StudyConfig) -> Result<StudyOutput> {
    let kinds = match cfg.study {
        Study::Convergence | Study::PrecondBench => cfg.preconditioners()?,
        _ => Vec::new(),
    };
    let problem = match cfg.study {
        Study::Convergence | Study::PrecondBench => Some(builtin_problem::<f64>(&cfg.problem).map_err(|e| anyhow!(e))?),
        _ => None,
    };
    let grid: Vec<(usize, usize)> = cfg.degrees.iter().flat_map(|&p| cfg.nels.iter().map(move |&n| (p, n))).collect();
    let cell = |&(p, n): &(usize, usize)| -> Result<CellResult> {
        match &problem {
            Some(pr) => solve_cell(cfg, pr, &kinds, p, n),
            None => cond_cell(cfg, p, n),
        }
    };
    if cfg.warmup {
        if let Some(first) = grid.iter().min_by_key(|&&(p, n)| (n, p)) {
            log::info!("warm-up run on p = {}, n_el = {}", first.0, first.1);
            cell(first)?;
        }
    }
    let cells: Vec<CellResult> = if cfg.parallel && !cfg.single_thread {
        grid.par_iter().map(cell).collect::<Result<_>>()?
    } else {
        grid.iter().map(cell).collect::<Result<_>>()?
    };
    let header = study_header(cfg, &kinds);
    let orders = observed_orders(&cells);
    let rows = cells
        .iter()
        .zip(&orders)
        .map(|(c, o)| {
            let mut row = vec![c.p.to_string(), c.n_el.to_string()];
            row.extend(c.values.iter().cloned());
            if cfg.study == Study::Convergence {
                let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
                row.extend([f(o.0), f(o.1)]);
            }
            row.push(c.status.as_str().to_string());
            row
        })
        .collect();
    Ok(StudyOutput { header, rows, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_count_matches_assembly() {
        let problem = builtin_problem::<f64>("square").unwrap();
        let s = SpaceTimeSystem::assemble(&problem, 2, 4).unwrap();
        assert_eq!(space_time_dofs(2, 2, 4), s.n_dof());
    }

    #[test]
    fn orders_use_previous_row_of_same_degree() {
        let mk = |p, n_el, e: f64| CellResult {
            p,
            n_el,
            values: vec![],
            errors: Some((e, 2.0 * e)),
            status: Status::Ok,
            timings: Value::Null,
        };
        let cells = vec![mk(1, 8, 1.0), mk(1, 16, 0.25), mk(2, 8, 1.0), mk(2, 16, 0.125)];
        let o = observed_orders(&cells);
        assert_eq!(o[0], (None, None));
        assert!((o[1].0.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(o[2], (None, None));
        assert!((o[3].1.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn status_ordering() {
        assert_eq!(Status::Ok.worst(Status::NoConverge), Status::NoConverge);
        assert_eq!(Status::NoConverge.worst(Status::SkippedMemory), Status::SkippedMemory);
        assert_eq!(Status::Ok.worst(Status::Ok), Status::Ok);
    }
}
