//! Sweeps over η (or ε for the baseline) and the single-scale run.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::RClassMap;

use super::config::{Mode, PipelineConfig};
use super::nontrivial::approximate_nontrivial;
use super::report::{PipelineReport, ReportRow};
use super::smooth::{input_map, mollify_and_project, smooth_row};

/// One row at scale η, or ε when kp ≥ m.
pub fn run_scale(u: &RClassMap, scale: f64, cfg: &PipelineConfig) -> Result<ReportRow> {
    if cfg.kp() >= cfg.m as f64 {
        return mollify_and_project(u, scale, cfg);
    }
    match cfg.mode {
        Mode::Nontrivial => approximate_nontrivial(u, scale, cfg).map(|r| r.row),
        Mode::Smooth => smooth_row(u, scale, cfg),
    }
}

fn scales(cfg: &PipelineConfig) -> &[f64] {
    if cfg.kp() >= cfg.m as f64 {
        &cfg.eps
    } else {
        &cfg.etas
    }
}

/// The finest configured scale; errors propagate unchanged.
pub fn approximate_once(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let u = input_map(cfg)?;
    let scale = *scales(cfg).last().ok_or_else(|| Error::Config("no scale configured".into()))?;
    let mut report = PipelineReport::default();
    report.push(run_scale(&u, scale, cfg)?);
    Ok(report)
}

/// One row per scale, run in parallel; a failing scale yields a flagged row instead of aborting.
pub fn convergence_study(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let list = scales(cfg);
    if list.len() < 3 {
        return Err(Error::Config(format!("a study needs at least 3 scales, got {}", list.len())));
    }
    if list.windows(2).any(|w| (w[0] / w[1] - 2.0).abs() > 1e-9) {
        return Err(Error::Config(format!("study scales must be dyadic, got {list:?}")));
    }
    let u = input_map(cfg)?;
    let rows: Vec<ReportRow> = list
        .par_iter()
        .map(|&s| run_scale(&u, s, cfg).unwrap_or_else(|e| ReportRow::failed(&mode_name(cfg), s, &e.to_string())))
        .collect();
    let mut report = PipelineReport::default();
    for r in rows {
        report.push(r);
    }
    report.notes.push("derivative bounds of the construction maps are checked with β = jp".into());
    Ok(report)
}

fn mode_name(cfg: &PipelineConfig) -> String {
    if cfg.kp() >= cfg.m as f64 {
        return "baseline".into();
    }
    match cfg.mode {
        Mode::Nontrivial => "nontrivial".into(),
        Mode::Smooth => "smooth".into(),
    }
}
