//! Seeded property checks per module, run by `check --suite NAME`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::quadrature::graded_integral;
use crate::field::{make_r_class_example, sample_field, sobolev_distance, ExampleKind, GridSpec};
use crate::geometry::build_cubication;
use crate::jet::{Point, MAX_DIM};
use crate::manifold::{homotopy_retraction, TargetManifold};
use crate::map::Mapping;
use crate::pipeline::classify::classify_cubes;
use crate::pipeline::modulation::build_modulation;
use crate::pipeline::PipelineConfig;
use crate::smoothmap::opening::opening_face_map;
use crate::smoothmap::shrinking::build_shrinking;
use crate::smoothmap::thickening::build_thickening;
use crate::smoothmap::Aabb;

pub const SUITES: [&str; 6] = ["geometry", "smoothmap", "manifold", "field", "pipeline", "all"];

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn point(rng: &mut ChaCha8Rng, m: usize, r: f64) -> Point {
    std::array::from_fn(|i| if i < m { rng.gen_range(-r..r) } else { 0.0 })
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn geometry(rng: &mut ChaCha8Rng) -> Result<Vec<(&'static str, bool, String)>> {
    let mut out = vec![];
    let mut ok = true;
    for m in 1..=3 {
        let c = build_cubication(m, &[0.0; MAX_DIM], 1.0, 0.25)?;
        for l in 0..=m {
            let got = c.skeleton_faces(l)?.len();
            let want = binom(m, l) * c.n.pow(l as u32) * (c.n + 1).pow((m - l) as u32);
            ok &= got == want;
        }
    }
    out.push(("face counts", ok, "C(m,l) n^l (n+1)^(m-l) faces of dimension l".into()));
    let c = build_cubication(3, &[0.0; MAX_DIM], 1.0, 0.25)?;
    let mut ok = true;
    for _ in 0..500 {
        let x = point(rng, 3, 1.0);
        ok &= c.cell_of(&x).is_some_and(|k| Aabb::around(3, &c.cell_center(&k), &[0.25 + 1e-12; 3]).contains(&x));
        for l in 0..3 {
            ok &= c.dist_to_primal(&x, l) >= 0.0 && c.dist_to_dual(&x, l) >= 0.0;
        }
    }
    out.push(("cell location", ok, "random points lie in the cell reported for them".into()));
    Ok(out)
}

fn smoothmap(rng: &mut ChaCha8Rng) -> Result<Vec<(&'static str, bool, String)>> {
    let mut out = vec![];
    let op = opening_face_map(2, 0, 0.25, 0.1, 0.2, &[0.004, -0.002])?;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = point(rng, 2, 0.1 * 0.25);
        let y = op.eval(&x)?;
        let y0 = op.eval(&[0.0; MAX_DIM])?;
        worst = worst.max((y[0] - y0[0]).abs().max((y[1] - y0[1]).abs()));
    }
    out.push(("opening constancy", worst <= 1e-12, format!("max fiber spread {worst:.3e}")));
    let c = build_cubication(2, &[0.0; MAX_DIM], 1.0, 0.25)?;
    let th = build_thickening(&c, &c.cells(), 1, 0.1)?;
    let mut ok = true;
    for _ in 0..200 {
        let x = point(rng, 2, 1.0);
        if let Ok(j) = th.jacobian(&x) {
            ok &= j > 0.0;
        }
    }
    out.push(("thickening orientation", ok, "Jacobian positive off the singular set".into()));
    let sh = build_shrinking(&c, 1, 0.2, 0.1, None)?;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let y = point(rng, 2, 1.0);
        let x = sh.inverse(&y)?;
        let back = sh.eval(&x)?;
        worst = worst.max((0..2).map(|a| (back[a] - y[a]).abs()).fold(0.0, f64::max));
    }
    out.push(("shrinking inverse", worst < 1e-9, format!("max residual {worst:.3e}")));
    Ok(out)
}

fn manifold(rng: &mut ChaCha8Rng) -> Result<Vec<(&'static str, bool, String)>> {
    let mut out = vec![];
    let mut worst = 0.0f64;
    for t in [TargetManifold::circle(), TargetManifold::sphere(), TargetManifold::torus(1.0, 1.0)] {
        for _ in 0..200 {
            let mut y = t.base_point();
            for v in y.iter_mut().take(t.nu) {
                *v += rng.gen_range(-0.2..0.2);
            }
            let p = t.project(&y)?;
            let pp = t.project(&p)?;
            worst = worst.max(t.residual(&p)).max((0..t.nu).map(|i| (p[i] - pp[i]).abs()).fold(0.0, f64::max));
        }
    }
    out.push(("projection idempotent", worst < 1e-12, format!("max defect {worst:.3e}")));
    let c = build_cubication(2, &[0.0; MAX_DIM], 1.0, 0.25)?;
    let h = homotopy_retraction(&c, 1)?;
    let mut ok = true;
    for _ in 0..300 {
        let x = point(rng, 2, 1.0);
        match h.retract(&x) {
            Ok(y) => ok &= c.dist_to_primal(&y, 1) < 1e-9 && h.eval(0.0, &x)? == x,
            Err(Error::Singular { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    out.push(("retraction lands on the skeleton", ok, "H(1, x) in K^1, H(0, x) = x".into()));
    Ok(out)
}

fn field(_rng: &mut ChaCha8Rng) -> Result<Vec<(&'static str, bool, String)>> {
    let mut out = vec![];
    let region = Aabb::around(2, &[0.0; MAX_DIM], &[1.0, 1.0]);
    let flags = vec![Aabb::around(2, &[0.0; MAX_DIM], &[0.0, 0.0])];
    let f = |x: &Point| -> Result<f64> { Ok(1.0 / (x[0] * x[0] + x[1] * x[1]).sqrt()) };
    let got = graded_integral(&region, &flags, &f, 4, 1e-6, 60)?;
    let want = 8.0 * (1.0 + 2f64.sqrt()).ln();
    out.push(("graded quadrature", (got - want).abs() < 1e-4 * want, format!("∫ 1/|x| = {got:.8}, exact {want:.8}")));
    let u = make_r_class_example(ExampleKind::SmoothCircle, 2, &TargetManifold::circle(), 1)?;
    let g = sample_field(u.map.clone(), &GridSpec::cube(2, 1.0, 32, true))?;
    let d = sobolev_distance(&g, &g, 2, 2.0)?;
    out.push(("distance to itself", d == 0.0, format!("d(u, u) = {d}")));
    Ok(out)
}

fn pipeline(_rng: &mut ChaCha8Rng) -> Result<Vec<(&'static str, bool, String)>> {
    let mut out = vec![];
    let cfg = PipelineConfig::default();
    let back = PipelineConfig::parse(&cfg.to_text())?;
    out.push(("config round trip", back == cfg, "to_text then parse".into()));
    let u = make_r_class_example(ExampleKind::Constant, 2, &TargetManifold::circle(), 1)?;
    let c = build_cubication(2, &[0.0; MAX_DIM], 1.5, 0.25)?;
    let cl = classify_cubes(&u, &c, 1.5, 0.2, 1.0, 0.5)?;
    out.push(("constant map is good", cl.bad.is_empty(), format!("{} bad cubes", cl.bad.len())));
    let grid = GridSpec::cube(2, 1.0, 64, true);
    let md = build_modulation(&c, &[[2, 2, 0, 0]], 1, 0.2, 0.1, 0.5, None, &grid)?;
    let psi: Arc<dyn Mapping> = md.psi.clone();
    let mut ok = true;
    for i in 0..grid.len() {
        let v = psi.eval(&grid.node(i))?[0];
        ok &= v >= md.s - 1e-15 && v <= md.t + 1e-15;
    }
    let slope = crate::pipeline::modulation::psi_slope(psi.as_ref(), &grid)?;
    out.push(("modulation range", ok && slope <= 0.5, format!("s = {:.3e}, t = {:.3e}, slope {slope:.3e}", md.s, md.t)));
    Ok(out)
}

/// Runs one suite (or `all`) with the given seed.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    type Suite = fn(&mut ChaCha8Rng) -> Result<Vec<(&'static str, bool, String)>>;
    let table: [(&'static str, Suite); 5] =
        [("geometry", geometry), ("smoothmap", smoothmap), ("manifold", manifold), ("field", field), ("pipeline", pipeline)];
    if !SUITES.contains(&name) {
        return Err(Error::Config(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", "))));
    }
    let mut out = vec![];
    for (suite, f) in table {
        if name == "all" || name == suite {
            for (n, passed, detail) in f(&mut rng)? {
                out.push(CheckResult { suite, name: n, passed, detail });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        let r = run_suite("all", 7).unwrap();
        assert!(r.len() >= 10);
        for c in &r {
            assert!(c.passed, "{c:?}");
        }
        assert!(run_suite("nope", 0).is_err());
    }
}
