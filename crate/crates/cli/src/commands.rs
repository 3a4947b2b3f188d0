use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fsge_core::simulation::{run, Mode, SimulationError, StepRecord};
use fsge_core::verify::{run_suite, OracleReport, SuiteOptions};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output;

/// Gains of the default sweep.
pub const DEFAULT_GAINS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

pub fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building the worker pool")
}

/// Steps of a run plus the failure that stopped it, if any.
pub struct RunOutcome {
    pub records: Vec<StepRecord>,
    pub error: Option<SimulationError>,
}

pub fn execute(cfg: &RunConfig) -> RunOutcome {
    match run(&cfg.scenario) {
        Ok(records) => RunOutcome { records, error: None },
        Err(mut e) => RunOutcome {
            records: std::mem::take(&mut e.records),
            error: Some(e),
        },
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    mode: &'a str,
    gain_ratio: f64,
    t: usize,
    iterations: usize,
    error: String,
}

/// Writes everything a run produced into `dir`.
pub fn write_outputs(dir: &Path, cfg: &RunConfig, out: &RunOutcome) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if cfg.export.csv {
        for r in &out.records {
            output::write_step(dir, r)?;
        }
        let failed_log = out.error.as_ref().map(|e| e.log.as_slice()).unwrap_or(&[]);
        output::write_convergence(dir, &out.records, failed_log)?;
        output::write_summary(dir, &out.records)?;
    }
    if cfg.export.vtk {
        if let Some(last) = out.records.last() {
            output::write_wall_vtk(&dir.join("wall.vtk"), last, &cfg.scenario.mixture)?;
            output::write_flow_vtk(&dir.join("flow.vtk"), last)?;
        }
    }
    if let Some(e) = &out.error {
        let rec = ErrorRecord {
            mode: cfg.scenario.mode.label(),
            gain_ratio: cfg.scenario.gain_ratio,
            t: e.t,
            iterations: e.iterations,
            error: e.source.to_string(),
        };
        std::fs::write(dir.join("error.json"), serde_json::to_string_pretty(&rec)?)?;
    }
    Ok(())
}

/// `fsge run`: exit code 0 on success, 2 when the simulation failed.
pub fn cmd_run(cfg: &RunConfig) -> Result<i32> {
    let out = pool(cfg.workers)?.install(|| execute(cfg));
    write_outputs(&cfg.output_dir, cfg, &out)?;
    match &out.error {
        None => {
            log::info!("{} steps written to {}", out.records.len(), cfg.output_dir.display());
            Ok(0)
        }
        Some(e) => {
            eprintln!(
                "{{\"error\": {}, \"t\": {}, \"iterations\": {}}}",
                serde_json::to_string(&e.source.to_string())?,
                e.t,
                e.iterations
            );
            Ok(2)
        }
    }
}

/// Gains in first-seen order without repeats.
pub fn dedup_gains(gains: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &g in gains {
        if out.iter().any(|x| x.to_bits() == g.to_bits()) {
            log::warn!("duplicate gain {g} dropped");
            eprintln!("warning: duplicate gain {g} dropped");
        } else {
            out.push(g);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gain: f64,
    pub mode: Mode,
    pub mean_iterations: f64,
    pub peak_a_h: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub status: String,
}

pub fn row_dir(root: &Path, gain: f64, mode: Mode) -> PathBuf {
    root.join(format!("gain_{gain}_{}", mode.label()))
}

/// Runs every gain in both modes; rows come back in (gain, mode) order.
pub fn sweep(cfg: &RunConfig, gains: &[f64]) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(f64, Mode)> = gains.iter().flat_map(|&g| [(g, Mode::Gr), (g, Mode::Fsge)]).collect();
    pool(cfg.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(gain, mode)| {
                let mut row_cfg = cfg.clone();
                row_cfg.scenario.gain_ratio = gain;
                row_cfg.scenario.mode = mode;
                row_cfg.output_dir = row_dir(&cfg.output_dir, gain, mode);
                row_cfg.validate()?;
                let out = execute(&row_cfg);
                write_outputs(&row_cfg.output_dir, &row_cfg, &out)?;
                let last = out.records.last();
                let (min_h, max_h) = last.map_or((f64::NAN, f64::NAN), |r| r.thickness_range());
                Ok(SweepRow {
                    gain,
                    mode,
                    mean_iterations: output::mean_iterations(&out.records),
                    peak_a_h: last.map_or(f64::NAN, |r| r.peak_radius()),
                    min_h,
                    max_h,
                    status: match &out.error {
                        None => "ok".into(),
                        Some(e) => format!("failed at t={}: {}", e.t, e.source),
                    },
                })
            })
            .collect()
    })
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["gain", "mode", "mean_iters_steps_2_10", "peak_a_h", "min_h", "max_h", "status"])?;
    for r in rows {
        w.write_record([
            output::num(r.gain),
            r.mode.label().to_string(),
            output::num(r.mean_iterations),
            output::num(r.peak_a_h),
            output::num(r.min_h),
            output::num(r.max_h),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `fsge sweep`: exit code 0 iff every row succeeded.
pub fn cmd_sweep(cfg: &RunConfig, gains: &[f64]) -> Result<i32> {
    anyhow::ensure!(!gains.is_empty(), "no gains given");
    let gains = dedup_gains(gains);
    let rows = sweep(cfg, &gains)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    write_sweep(&cfg.output_dir.join("sweep.csv"), &rows)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep rows failed", rows.len());
        return Ok(1);
    }
    Ok(0)
}

pub fn format_report(r: &OracleReport) -> String {
    format!(
        "{} {} (rel err {:.3e}, tol {:.1e})",
        if r.pass { "PASS" } else { "FAIL" },
        r.name,
        r.rel_error,
        r.tolerance
    )
}

/// `fsge verify`: exit code 0 iff every oracle passes.
pub fn cmd_verify(opts: &SuiteOptions, out: Option<&Path>) -> Result<i32> {
    let reports = run_suite(opts)?;
    for r in &reports {
        println!("{}", format_report(r));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&reports)?)?;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{} of {} oracles passed", reports.len() - failed, reports.len());
    Ok(i32::from(failed > 0))
}
