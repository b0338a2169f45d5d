//! Removal of the dual-skeleton singularities (extension + shrinking), the smooth
//! density pipeline, the mollify-and-project baseline for kp ≥ m, and the obstruction demo.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{
    derivative_norms, make_r_class_example, sample_field, sobolev_distance, weighted_norm, BallRule, ExampleKind,
    GridField, RClassMap, Smoothed,
};
use crate::geometry::Cubication;
use crate::jet::{Scalar, MAX_DIM};
use crate::manifold::{null_homotopy_extension, smooth_extension, SmoothExtension};
use crate::map::{Compose, GenericMap, Mapping};
use crate::smoothmap::shrinking::shrinking_global_map;
use crate::smoothmap::{Aabb, SmoothMap};

use super::config::{Auto, PipelineConfig};
use super::nontrivial::{approximate_nontrivial, max_residual, measurement_grid, project_field, sample_off_support, tube_check};
use super::report::{PipelineReport, ReportRow};

const EXTENSION_RETRIES: usize = 4;

#[derive(Clone)]
pub struct SmoothRun {
    pub extended: GridField,
    pub output: GridField,
    pub tau: f64,
    pub shrinking: Option<SmoothMap>,
    pub err_ex: f64,
    pub err_sh: f64,
}

/// Σ_{i ≤ k} (μη)^{i−k} ‖D^i w‖_{L^p} restricted to nodes with dist(x, T)/η ≤ r.
fn masked_terms(w: &GridField, ext: &SmoothExtension, r: f64, k: usize, p: f64, mu_eta: f64, only_top: bool) -> Result<f64> {
    let mut wt = w.spec.weights(None)?;
    for (i, v) in wt.iter_mut().enumerate() {
        if ext.scaled_dist(&w.spec.node(i)) > r {
            *v = 0.0;
        }
    }
    let d = derivative_norms(w, k)?;
    if only_top {
        return Ok(weighted_norm(&d[k], &wt, p));
    }
    Ok((1..=k).map(|i| mu_eta.powi(i as i32 - k as i32) * weighted_norm(&d[i], &wt, p)).sum())
}

/// Largest τ ≤ 1/4 with τ^{(ℓ+1−kp)/p} · (v^ex term) ≤ (v term).
pub fn tau_rule(non_tau: f64, tau_term: f64, l: usize, kp: f64, p: f64) -> f64 {
    if !(tau_term > 0.0) {
        return 0.25;
    }
    let e = (l as f64 + 1.0 - kp) / p;
    (non_tau / tau_term).powf(1.0 / e).min(0.25)
}

/// v ↦ v^sh: smooth extension across the dual skeleton of `cells`, then composition with the shrinking map.
pub fn smooth_from_rclass(
    v: &RClassMap,
    v_grid: &GridField,
    cub: &Cubication,
    cells: &[[i64; MAX_DIM]],
    cfg: &PipelineConfig,
) -> Result<SmoothRun> {
    let m = cub.m;
    let l = cfg.ell();
    let kp = cfg.kp();
    let target = cfg.target_manifold()?;
    if !target.homotopy_trivial(l) {
        return Err(Error::Config(format!(
            "topological obstruction: π_{l}({}) is not trivial, so the singularities cannot be removed",
            target.name()
        )));
    }
    if !(l as f64 + 1.0 > kp) {
        return Err(Error::Config(format!("need ℓ + 1 > kp, got ℓ = {l}, kp = {kp}")));
    }
    if v.singular.is_empty() || cells.is_empty() {
        return Ok(SmoothRun { extended: v_grid.clone(), output: v_grid.clone(), tau: 0.0, shrinking: None, err_ex: 0.0, err_sh: 0.0 });
    }
    let mu = cfg.mu;
    let f = null_homotopy_extension(v.map.clone(), cub, &target, l)?;
    let scope = (l + 1 == m).then_some(cells);
    let mut base = smooth_extension(v.map.clone(), Arc::new(f), cub, &target, l, mu, scope)?;
    let dual = match scope {
        Some(c) => cub.dual_faces_of_cells(c, l)?,
        None => cub.dual_skeleton(l)?.faces,
    };
    let ext_support: Vec<Aabb> = dual.iter().map(|f| Aabb::face_nbhd(f, mu * cub.eta)).collect();
    // the kernel radius is halved until the mollified blend stays in the tube at every node
    let mut attempt = 0;
    let (ext, extended) = loop {
        let ext = Arc::new(base.clone());
        match sample_off_support(ext.clone(), v_grid, &ext_support) {
            Ok(g) => break (ext, g),
            Err(Error::TubeViolation { .. }) if attempt < EXTENSION_RETRIES => {
                attempt += 1;
                base.width_factor *= 0.5;
            }
            Err(e) => return Err(e),
        }
    };

    let (k, p) = (cfg.k, cfg.p);
    let tau = match cfg.tau {
        Auto::Value(t) => t,
        Auto::Auto => {
            let non_tau = masked_terms(v_grid, &ext, 2.0 * mu, k, p, mu * cub.eta, true)?;
            let tau_term = masked_terms(&extended, &ext, mu, k, p, mu * cub.eta, false)?;
            tau_rule(non_tau, tau_term, l, kp, p)
        }
    };
    let sh = shrinking_global_map(cub, l, mu, tau, scope)?;
    let v_sh: Arc<dyn Mapping> = Arc::new(Compose::new(ext, Arc::new(sh.clone())));
    let output = sample_off_support(v_sh, v_grid, &sh.support)?;
    let res = max_residual(&output, &target);
    if res > 1e-9 {
        return Err(Error::Numeric { message: "smoothed output left the target".into(), residual: res });
    }
    let err_ex = sobolev_distance(&extended, v_grid, k, p)?;
    let err_sh = sobolev_distance(&output, &extended, k, p)?;
    Ok(SmoothRun { extended, output, tau, shrinking: Some(sh), err_ex, err_sh })
}

/// Constant width ε.
#[derive(Clone, Copy, Debug)]
struct Width(usize, f64);

impl GenericMap for Width {
    fn dims(&self) -> (usize, usize) {
        (self.0, 1)
    }
    fn apply<S: Scalar>(&self, _x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut o = [S::cst(0.0); MAX_DIM];
        o[0] = S::cst(self.1);
        Ok(o)
    }
}

/// Π(φ_ε ∗ u) on the measurement grid; fails with a tube violation rather than projecting blindly.
pub fn mollify_and_project(u: &RClassMap, eps: f64, cfg: &PipelineConfig) -> Result<ReportRow> {
    let target = cfg.target_manifold()?;
    let grid = measurement_grid(cfg);
    let input = sample_field(u.map.clone(), &grid)?;
    let m = cfg.m;
    let moll: Arc<dyn Mapping> = Arc::new(Smoothed {
        inner: u.map.clone(),
        psi: Arc::new(Width(m, eps)),
        rule: Arc::new(BallRule::standard(m)),
    });
    let smoothed = sample_field(moll, &grid)?;
    let cub = crate::geometry::build_cubication(m, &[0.0; MAX_DIM], cfg.domain_half_width(), cfg.domain_half_width())?;
    let tube = tube_check(&smoothed, &target, &cub)?;
    let output = project_field(&smoothed, &target);
    let mut row = ReportRow::empty("baseline", eps);
    row.error = sobolev_distance(&output, &input, cfg.k, cfg.p)?;
    row.err_sm = sobolev_distance(&smoothed, &input, cfg.k, cfg.p)?;
    row.tube = tube;
    row.max_residual = max_residual(&output, &target);
    row.s = eps;
    Ok(row)
}

pub fn input_map(cfg: &PipelineConfig) -> Result<RClassMap> {
    make_r_class_example(ExampleKind::by_name(&cfg.input)?, cfg.m, &cfg.target_manifold()?, cfg.degree)
}

/// One η of the smooth construction: the R-class approximation followed by singularity removal.
pub fn smooth_row(u: &RClassMap, eta: f64, cfg: &PipelineConfig) -> Result<ReportRow> {
    let run = approximate_nontrivial(u, eta, cfg)?;
    let sm = smooth_from_rclass(&run.output, &run.grids.output, &run.cubication, &run.classification.enlarged, cfg)?;
    let mut row = run.row;
    row.mode = "smooth".into();
    row.error = sobolev_distance(&sm.output, &run.grids.input, cfg.k, cfg.p)?;
    row.err_ex = sm.err_ex;
    row.err_sh = sm.err_sh;
    row.max_residual = max_residual(&sm.output, &cfg.target_manifold()?);
    row.mu = cfg.mu;
    row.tau = sm.tau;
    row.singular_points = 0;
    Ok(row)
}

/// Smooth approximations: per η when kp < m (which needs π_ℓ(N) = 0), per ε by mollify-and-project when kp ≥ m.
pub fn approximate_smooth(u: &RClassMap, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let target = cfg.target_manifold()?;
    let mut report = PipelineReport::default();
    if cfg.kp() >= cfg.m as f64 {
        for &e in &cfg.eps {
            report.push(mollify_and_project(u, e, cfg)?);
        }
        return Ok(report);
    }
    let l = cfg.ell();
    if !target.homotopy_trivial(l) {
        return Err(Error::Config(format!(
            "topological obstruction: π_{l}({}) is not trivial, so smooth maps are not dense for kp = {}",
            target.name(),
            cfg.kp()
        )));
    }
    for &eta in &cfg.etas {
        report.push(smooth_row(u, eta, cfg)?);
    }
    Ok(report)
}

/// Forces mollify-and-project onto the configured pair; an obstructed pair must end in a tube violation.
pub fn demo_obstruction(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let u = input_map(cfg)?;
    let mut report = PipelineReport::default();
    for &e in &cfg.eps {
        report.push(mollify_and_project(&u, e, cfg)?);
    }
    Err(Error::Numeric {
        message: format!(
            "mollify-and-project stayed inside the tube for {} into {}; no obstruction observed",
            cfg.input, cfg.target
        ),
        residual: report.rows.iter().map(|r| r.tube).fold(0.0, f64::max),
    })
}
