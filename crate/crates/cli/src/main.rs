mod config;
mod studies;

use std::fs::File;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;

use config::{Cli, StudyConfig};
use studies::{Status, StudyOutput};

fn write_csv(path: &Path, out: &StudyOutput) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    w.write_record(&out.header)?;
    for row in &out.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_manifest(cfg: &StudyConfig, out: &StudyOutput, total_s: f64, threads: usize) -> Result<()> {
    let count = |s: Status| out.cells.iter().filter(|c| c.status == s).count();
    let manifest = json!({
        "config": cfg,
        "versions": {
            "stfd_cli": env!("CARGO_PKG_VERSION"),
            "stfd_core": stfd::VERSION,
        },
        "csv": cfg.out,
        "started_unix_s": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "threads": threads,
        "warmup_excluded": cfg.warmup,
        "total_s": total_s,
        "status_counts": {
            "ok": count(Status::Ok),
            "no_converge": count(Status::NoConverge),
            "skipped_memory": count(Status::SkippedMemory),
        },
        "cells": out.cells.iter().map(|c| &c.timings).collect::<Vec<_>>(),
    });
    let path = cfg.manifest_path();
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(f, &manifest)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config::resolve(cli)?;
    if cfg.single_thread {
        rayon::ThreadPoolBuilder::new().num_threads(1).build_global().ok();
    }
    let threads = rayon::current_num_threads();
    log::info!("running {} over {} cells", cfg.study, cfg.degrees.len() * cfg.nels.len());
    let t0 = Instant::now();
    let out = studies::run(&cfg)?;
    let total = t0.elapsed().as_secs_f64();
    write_csv(&cfg.out, &out)?;
    write_manifest(&cfg, &out, total, threads)?;
    for c in out.cells.iter().filter(|c| c.status != Status::Ok) {
        log::warn!("p = {}, n_el = {}: {}", c.p, c.n_el, c.status.as_str());
    }
    println!(
        "{} -> {} ({} rows), manifest {}",
        cfg.study,
        cfg.out.display(),
        out.rows.len(),
        cfg.manifest_path().display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
