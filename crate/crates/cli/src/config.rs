//! Study configuration: flat `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use serde::Serialize;
use stfd::PreconditionerKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Study {
    CondSpace,
    CondTimeNaive,
    CondTimeStable,
    Convergence,
    PrecondBench,
}

impl Study {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CondSpace => "cond_space",
            Self::CondTimeNaive => "cond_time_naive",
            Self::CondTimeStable => "cond_time_stable",
            Self::Convergence => "convergence",
            Self::PrecondBench => "precond_bench",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Study {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, false).map_err(|e| anyhow!(e))
    }
}

/// Command-line flags. Every flag is optional so a config file can supply it.
#[derive(Parser, Debug, Default)]
#[command(name = "stfd", version, about = "Condition-number tables, convergence studies and preconditioner benchmarks")]
pub struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub study: Option<Study>,
    /// Comma-separated degrees or inclusive ranges, e.g. `2..5`.
    #[arg(long)]
    pub degrees: Option<String>,
    /// Comma-separated element counts per direction.
    #[arg(long)]
    pub nels: Option<String>,
    /// Spatial dimension; selects the default problem.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub problem: Option<String>,
    /// `none`, `Ahat` or `AhatG`; a comma list for `precond_bench`.
    #[arg(long)]
    pub precond: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-krylov")]
    pub max_krylov: Option<usize>,
    /// Number of GMRES cycles of `max-krylov` iterations each.
    #[arg(long)]
    pub restart: Option<usize>,
    /// CSV path; the manifest is written next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "single-thread")]
    pub single_thread: bool,
    /// Run independent cells concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// Cells above this many unknowns are reported as `skipped_memory`.
    #[arg(long = "max-dofs")]
    pub max_dofs: Option<usize>,
    /// Skip the untimed warm-up run.
    #[arg(long = "no-warmup")]
    pub no_warmup: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyConfig {
    pub study: Study,
    pub degrees: Vec<usize>,
    pub nels: Vec<usize>,
    pub dim: usize,
    pub problem: String,
    pub precond: Vec<String>,
    pub tol: f64,
    pub max_krylov: usize,
    pub restart: Option<usize>,
    pub out: PathBuf,
    pub single_thread: bool,
    pub parallel: bool,
    pub max_dofs: usize,
    pub warmup: bool,
}

impl StudyConfig {
    pub fn preconditioners(&self) -> Result<Vec<PreconditionerKind>> {
        self.precond.iter().map(|s| s.parse::<PreconditionerKind>().map_err(|e| anyhow!(e))).collect()
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.out.with_extension("json")
    }
}

/// Parses `1,2,3`, `2..5` (inclusive) or a mix of both.
pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().with_context(|| format!("bad range start in '{part}'"))?;
            let b: usize =
                b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in '{part}'"))?;
            if b < a {
                bail!("empty range '{part}'");
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().with_context(|| format!("'{part}' is not a non-negative integer"))?);
        }
    }
    if out.is_empty() {
        bail!("list '{s}' is empty");
    }
    Ok(out)
}

/// Reads `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected 'key = value', found '{raw}'", lineno + 1))?;
        let key = k.trim().replace('-', "_");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("line {}: duplicate key '{key}'", lineno + 1);
        }
    }
    Ok(map)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("{key}: expected a boolean, found '{v}'"),
    }
}

fn parse_num<N: FromStr>(key: &str, v: &str) -> Result<N>
where
    N::Err: std::error::Error + Send + Sync + 'static,
{
    v.parse::<N>().with_context(|| format!("{key}: cannot parse '{v}'"))
}

const KNOWN_KEYS: [&str; 14] = [
    "study",
    "degrees",
    "nels",
    "dim",
    "problem",
    "precond",
    "tol",
    "max_krylov",
    "restart",
    "out",
    "single_thread",
    "parallel",
    "max_dofs",
    "warmup",
];

pub const DEFAULT_MAX_DOFS: usize = 4_000_000;

fn default_problem(dim: usize) -> Result<&'static str> {
    Ok(match dim {
        1 => "line",
        2 => "square",
        3 => "cube",
        _ => bail!("dim must be 1, 2 or 3, got {dim}"),
    })
}

/// Merges file values with flags (flags win) and validates the result.
pub fn resolve(cli: &Cli) -> Result<StudyConfig> {
    let file = match &cli.config {
        Some(p) => load_file(p)?,
        None => BTreeMap::new(),
    };
    if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        bail!("unknown config key '{k}'");
    }
    let get = |k: &str| file.get(k).map(String::as_str);

    let study = match cli.study {
        Some(s) => s,
        None => get("study").ok_or_else(|| anyhow!("no study given (--study or 'study' key)"))?.parse()?,
    };
    let degrees = match cli.degrees.as_deref().or(get("degrees")) {
        Some(s) => parse_list(s)?,
        None => match study {
            Study::CondSpace | Study::CondTimeNaive | Study::CondTimeStable => (2..=8).collect(),
            _ => vec![1, 2, 3],
        },
    };
    let nels = match cli.nels.as_deref().or(get("nels")) {
        Some(s) => parse_list(s)?,
        None => match study {
            Study::CondSpace | Study::CondTimeStable => vec![32, 64, 128],
            Study::CondTimeNaive => vec![32, 64, 128, 256],
            _ => vec![8, 16, 32],
        },
    };
    let problem_given = cli.problem.clone().or_else(|| get("problem").map(String::from));
    let dim = match cli.dim.or(get("dim").map(|v| parse_num("dim", v)).transpose()?) {
        Some(d) => d,
        None => match &problem_given {
            Some(name) => stfd::problems::builtin_problem::<f64>(name).map_err(|e| anyhow!(e))?.dim(),
            None => 2,
        },
    };
    let problem = match problem_given {
        Some(p) => p,
        None => default_problem(dim)?.to_string(),
    };
    let precond_default = match study {
        Study::PrecondBench => "Ahat,AhatG",
        _ => "AhatG",
    };
    let precond: Vec<String> = cli
        .precond
        .as_deref()
        .or(get("precond"))
        .unwrap_or(precond_default)
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let tol = match cli.tol {
        Some(t) => t,
        None => get("tol").map(|v| parse_num("tol", v)).transpose()?.unwrap_or(1e-8),
    };
    let max_krylov = match cli.max_krylov {
        Some(m) => m,
        None => get("max_krylov").map(|v| parse_num("max_krylov", v)).transpose()?.unwrap_or(100),
    };
    let restart = match cli.restart {
        Some(r) => Some(r),
        None => get("restart").map(|v| parse_num("restart", v)).transpose()?,
    };
    let out = match &cli.out {
        Some(p) => p.clone(),
        None => get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(format!("{study}.csv"))),
    };
    let single_thread =
        cli.single_thread || get("single_thread").map(|v| parse_bool("single_thread", v)).transpose()?.unwrap_or(false);
    let parallel = cli.parallel || get("parallel").map(|v| parse_bool("parallel", v)).transpose()?.unwrap_or(false);
    let max_dofs = match cli.max_dofs {
        Some(m) => m,
        None => get("max_dofs").map(|v| parse_num("max_dofs", v)).transpose()?.unwrap_or(DEFAULT_MAX_DOFS),
    };
    let warmup = !cli.no_warmup && get("warmup").map(|v| parse_bool("warmup", v)).transpose()?.unwrap_or(true);

    let cfg = StudyConfig {
        study,
        degrees,
        nels,
        dim,
        problem,
        precond,
        tol,
        max_krylov,
        restart,
        out,
        single_thread,
        parallel,
        max_dofs,
        warmup,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn load_file(p: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
    parse_config_text(&text).with_context(|| format!("in config {}", p.display()))
}

fn validate(cfg: &StudyConfig) -> Result<()> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        bail!("tol must be positive, got {}", cfg.tol);
    }
    if cfg.max_krylov == 0 {
        bail!("max_krylov must be at least 1");
    }
    if cfg.restart == Some(0) {
        bail!("restart must be at least 1");
    }
    if cfg.nels.contains(&0) {
        bail!("element counts must be positive");
    }
    if cfg.degrees.contains(&0) {
        bail!("degrees must be at least 1");
    }
    if cfg.precond.is_empty() {
        bail!("no preconditioner given");
    }
    cfg.preconditioners()?;
    if matches!(cfg.study, Study::Convergence) && cfg.precond.len() != 1 {
        bail!("convergence study takes a single preconditioner");
    }
    if matches!(cfg.study, Study::Convergence | Study::PrecondBench) {
        let problem = stfd::problems::builtin_problem::<f64>(&cfg.problem).map_err(|e| anyhow!(e))?;
        if problem.dim() != cfg.dim {
            bail!("problem '{}' is {}-dimensional but dim = {}", cfg.problem, problem.dim(), cfg.dim);
        }
        if matches!(cfg.study, Study::Convergence) && problem.exact.is_none() {
            bail!("problem '{}' has no exact solution for a convergence study", cfg.problem);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_list("8, 16,32").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_list("1,3..4").unwrap(), vec![1, 3, 4]);
        assert!(parse_list("").is_err());
        assert!(parse_list("5..2").is_err());
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn config_text() {
        let m = parse_config_text("# header\nstudy = convergence\nmax-krylov=50 # inline\n\n").unwrap();
        assert_eq!(m["study"], "convergence");
        assert_eq!(m["max_krylov"], "50");
        assert!(parse_config_text("oops").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
    }

    #[test]
    fn flags_override_defaults() {
        let cli = Cli { study: Some(Study::Convergence), tol: Some(1e-6), ..Cli::default() };
        let cfg = resolve(&cli).unwrap();
        assert_eq!(cfg.problem, "square");
        assert_eq!(cfg.tol, 1e-6);
        assert_eq!(cfg.max_krylov, 100);
        assert_eq!(cfg.nels, vec![8, 16, 32]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_tol = Cli { study: Some(Study::Convergence), tol: Some(0.0), ..Cli::default() };
        assert!(resolve(&bad_tol).is_err());
        let bad_dim =
            Cli { study: Some(Study::Convergence), problem: Some("annulus".into()), dim: Some(3), ..Cli::default() };
        assert!(resolve(&bad_dim).is_err());
        let bad_prec = Cli { study: Some(Study::PrecondBench), precond: Some("ilu".into()), ..Cli::default() };
        assert!(resolve(&bad_prec).is_err());
        assert!(resolve(&Cli::default()).is_err());
    }
}
