//! The singular model maps and smooth test inputs.

use std::sync::Arc;

use crate::error::{arg, Result};
use crate::jet::{norm, Point, Scalar, MAX_DIM};
use crate::manifold::{TargetKind, TargetManifold};
use crate::map::{GenericMap, Mapping};
use crate::smoothmap::Aabb;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExampleKind {
    /// x / |x| into S^{m−1}
    Hedgehog,
    /// (x / |x|, 0) into the equator of S², m = 2
    EquatorialHedgehog,
    /// f(x'/|x'|) with x' = (x_1, x_2) and f of the given degree onto a great circle
    Angular,
    Constant,
    /// (cos θ, sin θ) with θ = x_1 + 0.5 x_2 + 0.3 x_1 x_2 (into a great circle for S²)
    SmoothCircle,
    /// inverse stereographic image of x / 2 into S²
    SmoothSphere,
}

impl ExampleKind {
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "hedgehog" => ExampleKind::Hedgehog,
            "equatorial-hedgehog" => ExampleKind::EquatorialHedgehog,
            "angular" => ExampleKind::Angular,
            "constant" => ExampleKind::Constant,
            "smooth-circle" => ExampleKind::SmoothCircle,
            "smooth-sphere" => ExampleKind::SmoothSphere,
            _ => return Err(crate::error::Error::Config(format!("unknown input map {name:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExampleMap {
    pub kind: ExampleKind,
    pub m: usize,
    pub nu: usize,
    pub degree: i32,
    pub target: TargetKind,
}

fn circle_power<S: Scalar>(c: S, s: S, d: i32) -> (S, S) {
    let (mut re, mut im) = (S::cst(1.0), S::cst(0.0));
    let (bc, bs) = if d >= 0 { (c, s) } else { (c, -s) };
    for _ in 0..d.unsigned_abs() {
        let r = re * bc - im * bs;
        im = re * bs + im * bc;
        re = r;
    }
    (re, im)
}

impl GenericMap for ExampleMap {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.nu)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut y = [S::cst(0.0); MAX_DIM];
        match self.kind {
            ExampleKind::Hedgehog | ExampleKind::EquatorialHedgehog => {
                let r = norm(&x[..self.m]);
                if r.value() == 0.0 {
                    return Err(crate::error::Error::Singular { distance: 0.0 });
                }
                for i in 0..self.m {
                    y[i] = x[i] / r;
                }
            }
            ExampleKind::Angular => {
                let r = norm(&x[..2]);
                if r.value() == 0.0 {
                    return Err(crate::error::Error::Singular { distance: 0.0 });
                }
                let (re, im) = circle_power(x[0] / r, x[1] / r, self.degree);
                y[0] = re;
                y[1] = im;
            }
            ExampleKind::Constant => {
                y[0] = S::cst(1.0);
                if self.target == TargetKind::Torus {
                    y[2] = S::cst(1.0);
                }
            }
            ExampleKind::SmoothCircle => {
                let mut th = x[0];
                if self.m >= 2 {
                    th = th + x[1] * 0.5 + x[0] * x[1] * 0.3;
                }
                y[0] = th.cos();
                y[1] = th.sin();
            }
            ExampleKind::SmoothSphere => {
                let mut w2 = S::cst(0.0);
                for i in 0..self.m.min(2) {
                    w2 = w2 + x[i] * x[i] * 0.25;
                }
                let den = (w2 + 1.0).recip();
                y[0] = x[0] * den;
                if self.m >= 2 {
                    y[1] = x[1] * den;
                }
                y[2] = (-w2 + 1.0) * den;
            }
        }
        Ok(y)
    }
}

/// A map smooth off a finite union of planes with |D^j u| ≤ C_j / dist(x, T)^j.
#[derive(Clone)]
pub struct RClassMap {
    pub map: Arc<dyn Mapping>,
    pub m: usize,
    pub nu: usize,
    pub singular: Vec<Aabb>,
    /// fitted C_1, C_2
    pub constants: Vec<f64>,
}

impl RClassMap {
    pub fn dist(&self, x: &Point) -> f64 {
        self.singular.iter().map(|b| b.dist(x)).fold(f64::INFINITY, f64::min)
    }
}

/// max over samples of |D^j u(x)| dist(x, T)^j for j = 1, 2; samples hitting a singularity are skipped.
pub fn fit_r_class_constants(map: &dyn Mapping, singular: &[Aabb], samples: &[Point]) -> Result<Vec<f64>> {
    let mut c = vec![0.0f64; 2];
    for x in samples {
        let d = singular.iter().map(|b| b.dist(x)).fold(f64::INFINITY, f64::min);
        if d == 0.0 {
            continue;
        }
        let w = if d.is_finite() { d } else { 1.0 };
        let (_, d1, d2) = match crate::field::jet_norms(map, x) {
            Ok(v) => v,
            Err(crate::error::Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        };
        c[0] = c[0].max(d1 * w);
        c[1] = c[1].max(d2 * w * w);
    }
    Ok(c)
}

/// Halton points in the cube Q_r^m.
pub fn halton(m: usize, count: usize, r: f64, skip: usize) -> Vec<Point> {
    const PRIMES: [u64; MAX_DIM] = [2, 3, 5, 7];
    (0..count)
        .map(|i| {
            let mut p = [0.0; MAX_DIM];
            for (a, pa) in p.iter_mut().enumerate().take(m) {
                let b = PRIMES[a];
                let (mut f, mut v, mut k) = (1.0, 0.0, (i + skip + 1) as u64);
                while k > 0 {
                    f /= b as f64;
                    v += f * (k % b) as f64;
                    k /= b;
                }
                *pa = r * (2.0 * v - 1.0);
            }
            p
        })
        .collect()
}

pub fn make_r_class_example(kind: ExampleKind, m: usize, target: &TargetManifold, degree: i32) -> Result<RClassMap> {
    if m == 0 || m > MAX_DIM {
        return arg(format!("dimension {m} out of range"));
    }
    let nu = target.nu;
    let mut singular = vec![];
    match kind {
        ExampleKind::Hedgehog => {
            if nu != m || target.kind == TargetKind::Torus {
                return arg(format!("hedgehog in dimension {m} needs the sphere S^{} ⊂ R^{m}", m - 1));
            }
            singular.push(Aabb::around(m, &[0.0; MAX_DIM], &vec![0.0; m]));
        }
        ExampleKind::EquatorialHedgehog => {
            if m != 2 || target.kind != TargetKind::Sphere {
                return arg("equatorial hedgehog needs m = 2 and the target S²");
            }
            singular.push(Aabb::around(m, &[0.0; MAX_DIM], &[0.0, 0.0]));
        }
        ExampleKind::Angular => {
            if m < 2 || target.kind == TargetKind::Torus {
                return arg("angular maps need m >= 2 and a sphere target");
            }
            let mut half = vec![0.0; m];
            for h in half.iter_mut().skip(2) {
                *h = f64::INFINITY;
            }
            singular.push(Aabb::around(m, &[0.0; MAX_DIM], &half));
        }
        ExampleKind::SmoothCircle => {
            if target.kind == TargetKind::Torus {
                return arg("smooth circle map needs a sphere target");
            }
        }
        ExampleKind::SmoothSphere => {
            if target.kind != TargetKind::Sphere {
                return arg("smooth sphere map needs the target S²");
            }
        }
        ExampleKind::Constant => {}
    }
    let map: Arc<dyn Mapping> = Arc::new(ExampleMap { kind, m, nu, degree, target: target.kind });
    let samples = halton(m, 2000, 1.0, 0);
    let constants = fit_r_class_constants(map.as_ref(), &singular, &samples)?;
    Ok(RClassMap { map, m, nu, singular, constants })
}

/// Degree of the first two components around the square loop of radius r about `center` in the (x_1, x_2) plane.
pub fn winding_number(map: &dyn Mapping, center: &Point, r: f64, n: usize) -> Result<i64> {
    let mut pts = Vec::with_capacity(4 * n);
    for side in 0..4 {
        for i in 0..n {
            let t = -r + 2.0 * r * i as f64 / n as f64;
            let (dx, dy) = match side {
                0 => (t, -r),
                1 => (r, t),
                2 => (-t, r),
                _ => (-r, -t),
            };
            let mut p = *center;
            p[0] += dx;
            p[1] += dy;
            pts.push(p);
        }
    }
    let mut total = 0.0;
    let mut prev = map.eval(&pts[pts.len() - 1])?;
    for p in &pts {
        let v = map.eval(p)?;
        let a0 = prev[1].atan2(prev[0]);
        let a1 = v[1].atan2(v[0]);
        let mut d = a1 - a0;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
        prev = v;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_field, GridSpec};

    #[test]
    fn constant_example_has_no_singularity() {
        let r = make_r_class_example(ExampleKind::Constant, 2, &TargetManifold::circle(), 0).unwrap();
        assert!(r.singular.is_empty());
        assert!(r.constants.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn hedgehog_gradient_constant_is_one() {
        let r = make_r_class_example(ExampleKind::Hedgehog, 2, &TargetManifold::circle(), 0).unwrap();
        assert!((r.constants[0] - 1.0).abs() < 0.02, "{}", r.constants[0]);
        assert!(r.constants[0] <= 1.0 + 1e-12);
        assert!(make_r_class_example(ExampleKind::Hedgehog, 3, &TargetManifold::circle(), 0).is_err());
    }

    #[test]
    fn angular_degree_is_detected() {
        let r = make_r_class_example(ExampleKind::Angular, 2, &TargetManifold::circle(), 2).unwrap();
        assert_eq!(winding_number(r.map.as_ref(), &[0.0; 4], 0.3, 64).unwrap(), 2);
        let h = make_r_class_example(ExampleKind::Hedgehog, 2, &TargetManifold::circle(), 0).unwrap();
        assert_eq!(winding_number(h.map.as_ref(), &[0.0; 4], 0.3, 64).unwrap(), 1);
        assert_eq!(winding_number(h.map.as_ref(), &[0.6, 0.6, 0.0, 0.0], 0.3, 64).unwrap(), 0);
    }

    #[test]
    fn hedgehog_is_zero_homogeneous() {
        let h = make_r_class_example(ExampleKind::Hedgehog, 2, &TargetManifold::circle(), 0).unwrap();
        for x in halton(2, 50, 1.0, 7) {
            let y = h.map.eval(&x).unwrap();
            let z = h.map.eval(&[2.0 * x[0], 2.0 * x[1], 0.0, 0.0]).unwrap();
            assert!((y[0] - z[0]).abs() < 1e-15 && (y[1] - z[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_node_needs_offset_grid() {
        let h = make_r_class_example(ExampleKind::Hedgehog, 2, &TargetManifold::circle(), 0).unwrap();
        let e = sample_field(h.map.clone(), &GridSpec::cube(2, 1.0, 4, false));
        assert!(matches!(e, Err(crate::error::Error::Sampling(_))));
        assert!(sample_field(h.map.clone(), &GridSpec::cube(2, 1.0, 4, true)).is_ok());
    }

    #[test]
    fn smooth_examples_land_on_targets() {
        let s2 = TargetManifold::sphere();
        let r = make_r_class_example(ExampleKind::SmoothSphere, 2, &s2, 0).unwrap();
        for x in halton(2, 100, 1.0, 0) {
            assert!(s2.residual(&r.map.eval(&x).unwrap()) < 1e-14);
        }
        let s1 = TargetManifold::circle();
        let c = make_r_class_example(ExampleKind::SmoothCircle, 2, &s1, 0).unwrap();
        for x in halton(2, 100, 1.0, 0) {
            assert!(s1.residual(&c.map.eval(&x).unwrap()) < 1e-14);
        }
    }
}
