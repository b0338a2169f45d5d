//! Opening → adaptive smoothing → thickening → projection for kp < m.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::examples::fit_r_class_constants;
use crate::field::{sample_field, sobolev_distance, BallRule, GridField, GridSpec, RClassMap, Smoothed};
use crate::geometry::{build_cubication, Cubication};
use crate::jet::{Jet2, Point, MAX_DIM};
use crate::manifold::{Projector, TargetManifold};
use crate::map::{Compose, Mapping};
use crate::smoothmap::opening::{opening_global_map, subskeleton_of_cells, OpeningOptions};
use crate::smoothmap::thickening::thickening_global_map;
use crate::smoothmap::{Aabb, SmoothMap};

use super::classify::{classify_cubes, union_measure, CubeClassification};
use super::config::{Auto, PipelineConfig};
use super::modulation::{build_modulation, psi_slope, Modulation};
use super::report::ReportRow;

/// Grid samples of every stage.
#[derive(Clone, Debug)]
pub struct StageGrids {
    pub input: GridField,
    pub opened: GridField,
    pub smoothed: GridField,
    pub thickened: GridField,
    pub output: GridField,
}

#[derive(Clone)]
pub struct NontrivialRun {
    pub output: RClassMap,
    pub row: ReportRow,
    pub classification: CubeClassification,
    pub cubication: Cubication,
    pub modulation: Modulation,
    pub opening: SmoothMap,
    pub thickening: SmoothMap,
    pub grids: StageGrids,
}

/// The measurement grid on Q_1 with nodes off every lattice hyperplane.
pub fn measurement_grid(cfg: &PipelineConfig) -> GridSpec {
    GridSpec::cube(cfg.m, 1.0, cfg.resolution, true)
}

/// Samples `map`, copying `prev` at nodes outside `support` where the map agrees with it.
pub fn sample_off_support(map: Arc<dyn Mapping>, prev: &GridField, support: &[Aabb]) -> Result<GridField> {
    let spec = &prev.spec;
    let nu = map.dim_out();
    let rows: Vec<Result<Point>> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let x = spec.node(idx);
            if support.iter().any(|b| b.contains(&x)) {
                map.eval(&x)
            } else {
                let mut y = [0.0; MAX_DIM];
                y[..nu].copy_from_slice(prev.value(idx));
                Ok(y)
            }
        })
        .collect();
    let mut data = Vec::with_capacity(spec.len() * nu);
    for (idx, r) in rows.into_iter().enumerate() {
        let y = r.map_err(|e| match e {
            Error::TubeViolation { .. } => e,
            e => Error::Sampling(format!("node {:?}: {e}", &spec.node(idx)[..spec.m])),
        })?;
        data.extend_from_slice(&y[..nu]);
    }
    Ok(GridField { spec: spec.clone(), nu, data, source: Some(map) })
}

/// Max distance to N over the samples; a value outside the tube fails with the offending cell.
pub fn tube_check(f: &GridField, target: &TargetManifold, cub: &Cubication) -> Result<f64> {
    let mut worst = 0.0f64;
    for idx in 0..f.spec.len() {
        let mut y = [0.0; MAX_DIM];
        y[..f.nu].copy_from_slice(f.value(idx));
        let d = target.dist(&y);
        if !(d < target.iota) {
            let x = f.spec.node(idx);
            return Err(Error::TubeViolation {
                distance: d,
                location: x[..f.spec.m].to_vec(),
                cell: cub.cell_of(&x).map(|k| k[..cub.m].to_vec()),
            });
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Pointwise nearest-point projection of grid values, with the analytic source Π ∘ source.
pub fn project_field(f: &GridField, target: &TargetManifold) -> GridField {
    let nu = f.nu;
    let mut data = f.data.clone();
    for chunk in data.chunks_mut(nu) {
        let mut y = [0.0; MAX_DIM];
        y[..nu].copy_from_slice(chunk);
        chunk.copy_from_slice(&target.project_raw(&y)[..nu]);
    }
    let source = f
        .source
        .as_ref()
        .map(|s| Arc::new(Compose::new(Arc::new(Projector { target: target.clone() }), s.clone())) as Arc<dyn Mapping>);
    GridField { spec: f.spec.clone(), nu, data, source }
}

pub fn max_residual(f: &GridField, target: &TargetManifold) -> f64 {
    f.data
        .chunks(f.nu)
        .map(|c| {
            let mut y = [0.0; MAX_DIM];
            y[..f.nu].copy_from_slice(c);
            target.residual(&y)
        })
        .fold(0.0, f64::max)
}

/// Seeded uniform samples in Q_r^m.
pub fn random_points(m: usize, count: usize, r: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| std::array::from_fn(|i| if i < m { rng.gen_range(-r..r) } else { 0.0 }))
        .collect()
}

/// sup over v = ±e_a of Σ_{1 ≤ j ≤ k} ‖D^j w(· + ψ v) − D^j w‖_{L^p}, from jets on `grid`.
pub fn translation_modulus(w: &dyn Mapping, psi: &dyn Mapping, grid: &GridSpec, k: usize, p: f64) -> Result<f64> {
    let m = grid.m;
    let weights = grid.weights(None)?;
    let jets = |x: &Point| -> Option<[Jet2; MAX_DIM]> { w.eval_jet(&Jet2::seed(x)).ok() };
    let base: Vec<Option<[Jet2; MAX_DIM]>> = (0..grid.len()).into_par_iter().map(|i| jets(&grid.node(i))).collect();
    let nu = w.dim_out();
    let mut best = 0.0f64;
    for a in 0..m {
        for sign in [-1.0, 1.0] {
            let sums: (f64, f64) = (0..grid.len())
                .into_par_iter()
                .map(|i| -> (f64, f64) {
                    let x = grid.node(i);
                    let (Some(b), Ok(r)) = (&base[i], psi.eval(&x)) else { return (0.0, 0.0) };
                    let mut y = x;
                    y[a] += sign * r[0];
                    let Some(t) = jets(&y) else { return (0.0, 0.0) };
                    let (mut d1, mut d2) = (0.0, 0.0);
                    for c in 0..nu {
                        for i1 in 0..m {
                            d1 += (t[c].g[i1] - b[c].g[i1]).powi(2);
                            for i2 in 0..m {
                                d2 += (t[c].h[i1][i2] - b[c].h[i1][i2]).powi(2);
                            }
                        }
                    }
                    (weights[i] * d1.sqrt().powf(p), weights[i] * d2.sqrt().powf(p))
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold((0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
            let mut v = sums.0.powf(1.0 / p);
            if k >= 2 {
                v += sums.1.powf(1.0 / p);
            }
            best = best.max(v);
        }
    }
    Ok(best)
}

/// One η of the density construction for kp < m: returns an R_{m−ℓ−1} map singular on the dual faces of U.
pub fn approximate_nontrivial(u: &RClassMap, eta: f64, cfg: &PipelineConfig) -> Result<NontrivialRun> {
    let m = cfg.m;
    let l = cfg.ell();
    let kp = cfg.kp();
    if !(kp < m as f64) {
        return Err(Error::Config(format!("the singular construction needs kp < m, got kp = {kp}, m = {m}")));
    }
    if u.m != m {
        return Err(Error::Config(format!("input map has dimension {}, configuration has m = {m}", u.m)));
    }
    let target = cfg.target_manifold()?;
    crate::manifold::check_dims(&target, u.nu)?;
    let cub = build_cubication(m, &[0.0; MAX_DIM], cfg.domain_half_width(), eta)?;
    let class = classify_cubes(u, &cub, kp, cfg.rho, cfg.c_prime, target.iota)?;
    let grid = measurement_grid(cfg);
    let input = sample_field(u.map.clone(), &grid)?;

    let faces = subskeleton_of_cells(&cub, &class.enlarged, l);
    let opts = OpeningOptions {
        u: cfg.score_opening.then(|| u.map.clone()),
        k: cfg.k,
        p: cfg.p,
        per_axis: cfg.candidates,
        measure_half_width: Some(1.0),
    };
    let opening = opening_global_map(&cub, &faces, l, cfg.rho, &opts)?;
    let u_op: Arc<dyn Mapping> = Arc::new(Compose::new(u.map.clone(), Arc::new(opening.clone())));
    let opened = sample_off_support(u_op.clone(), &input, &opening.support)?;

    let s = match cfg.s {
        Auto::Auto => None,
        Auto::Value(v) => Some(v),
    };
    let md = build_modulation(&cub, &class.bad, cfg.k, cfg.rho, cfg.rho_lo, cfg.kappa, s, &grid)?;
    let slope = psi_slope(md.psi.as_ref(), &grid)?;
    let u_sm: Arc<dyn Mapping> = Arc::new(Smoothed {
        inner: u_op.clone(),
        psi: md.psi.clone(),
        rule: Arc::new(BallRule::standard(m)),
    });
    let smoothed = sample_field(u_sm.clone(), &grid)?;

    let thickening = thickening_global_map(&cub, &class.enlarged, l, cfg.rho_lo)?;
    let u_th: Arc<dyn Mapping> = Arc::new(Compose::new(u_sm, Arc::new(thickening.clone())));
    let thickened = sample_off_support(u_th, &smoothed, &thickening.support)?;
    let tube = tube_check(&thickened, &target, &cub)?;
    let output = project_field(&thickened, &target);
    let out_map = output.source.clone().ok_or_else(|| Error::Numeric { message: "output lost its source".into(), residual: 0.0 })?;

    let singular = thickening.singular.clone();
    let samples = random_points(m, cfg.samples, 1.0, cfg.seed);
    let constants = fit_r_class_constants(out_map.as_ref(), &singular, &samples)?;

    let (k, p) = (cfg.k, cfg.p);
    let mut row = ReportRow::empty("nontrivial", eta);
    row.error = sobolev_distance(&output, &input, k, p)?;
    row.err_op = sobolev_distance(&opened, &input, k, p)?;
    row.err_sm = sobolev_distance(&smoothed, &opened, k, p)?;
    row.err_th = sobolev_distance(&thickened, &smoothed, k, p)?;
    row.tube = tube;
    row.max_residual = max_residual(&output, &target);
    row.bad = class.bad.len();
    row.enlarged = class.enlarged.len();
    let boxes: Vec<Aabb> = class
        .enlarged
        .iter()
        .map(|c| Aabb::around(m, &cub.cell_center(c), &vec![(1.0 + 2.0 * cfg.rho) * eta; m]))
        .collect();
    row.measure_ratio = union_measure(&boxes) / eta.powf(kp);
    row.c1 = constants[0];
    row.c2 = constants[1];
    let coarse = GridSpec::cube(m, 1.0, cfg.resolution.min(64), true);
    row.translation = translation_modulus(u_op.as_ref(), md.psi.as_ref(), &coarse, k, p)?;
    row.t = md.t;
    row.s = md.s;
    row.slope = slope;
    row.singular_points = singular.len();

    let output_rc = RClassMap { map: out_map, m, nu: u.nu, singular, constants };
    Ok(NontrivialRun {
        output: output_rc,
        row,
        classification: class,
        cubication: cub,
        modulation: md,
        opening,
        thickening,
        grids: StageGrids { input, opened, smoothed, thickened, output },
    })
}
