//! Embedded targets, nearest-point projection, the retraction H_ℓ, the contraction G_ℓ,
//! continuous fillings and the smooth extension across the dual skeleton.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, RwLock};

use crate::error::{arg, Error, Result};
use crate::field::BallRule;
use crate::geometry::Cubication;
use crate::jet::{norm, Jet2, Point, Scalar, MAX_DIM};
use crate::map::{GenericMap, Mapping};
use crate::smoothmap::{make_plateau_cutoff, PlateauCutoff};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    Circle,
    Sphere,
    Torus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetManifold {
    pub kind: TargetKind,
    pub n: usize,
    pub nu: usize,
    pub iota: f64,
    /// circle radii of the torus factors
    pub radii: [f64; 2],
}

impl TargetManifold {
    pub fn circle() -> Self {
        TargetManifold { kind: TargetKind::Circle, n: 1, nu: 2, iota: 0.5, radii: [1.0, 1.0] }
    }

    pub fn sphere() -> Self {
        TargetManifold { kind: TargetKind::Sphere, n: 2, nu: 3, iota: 0.5, radii: [1.0, 1.0] }
    }

    pub fn torus(r1: f64, r2: f64) -> Self {
        TargetManifold { kind: TargetKind::Torus, n: 2, nu: 4, iota: 0.5 * r1.min(r2), radii: [r1, r2] }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "s1" => Ok(Self::circle()),
            "s2" => Ok(Self::sphere()),
            "torus" => Ok(Self::torus(1.0, 1.0)),
            _ => Err(Error::Config(format!("unknown target {name:?}; expected s1, s2 or torus"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TargetKind::Circle => "s1",
            TargetKind::Sphere => "s2",
            TargetKind::Torus => "torus",
        }
    }

    /// Whether π_ℓ(N) is trivial.
    pub fn homotopy_trivial(&self, l: usize) -> bool {
        match self.kind {
            TargetKind::Circle => l != 1,
            TargetKind::Sphere => l <= 1,
            TargetKind::Torus => l != 1,
        }
    }

    pub fn dist(&self, x: &Point) -> f64 {
        match self.kind {
            TargetKind::Circle => (norm(&x[..2]) - 1.0).abs(),
            TargetKind::Sphere => (norm(&x[..3]) - 1.0).abs(),
            TargetKind::Torus => {
                let d1 = norm(&x[..2]) - self.radii[0];
                let d2 = norm(&x[2..4]) - self.radii[1];
                (d1 * d1 + d2 * d2).sqrt()
            }
        }
    }

    /// Nearest point, without the tube check; works on jets.
    pub fn project_raw<S: Scalar>(&self, x: &[S; MAX_DIM]) -> [S; MAX_DIM] {
        let mut y = [S::cst(0.0); MAX_DIM];
        match self.kind {
            TargetKind::Circle | TargetKind::Sphere => {
                let k = self.nu;
                let r = norm(&x[..k]);
                for i in 0..k {
                    y[i] = x[i] / r;
                }
            }
            TargetKind::Torus => {
                for (p, &rad) in self.radii.iter().enumerate() {
                    let r = norm(&x[2 * p..2 * p + 2]);
                    for i in 2 * p..2 * p + 2 {
                        y[i] = x[i] / r * rad;
                    }
                }
            }
        }
        y
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        let d = self.dist(x);
        if !(d < self.iota) {
            return Err(Error::TubeViolation { distance: d, location: x[..self.nu].to_vec(), cell: None });
        }
        Ok(self.project_raw(x))
    }

    /// Residual of the defining equations.
    pub fn residual(&self, x: &Point) -> f64 {
        match self.kind {
            TargetKind::Circle => (x[0] * x[0] + x[1] * x[1] - 1.0).abs(),
            TargetKind::Sphere => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0).abs(),
            TargetKind::Torus => (x[0] * x[0] + x[1] * x[1] - self.radii[0].powi(2))
                .abs()
                .max((x[2] * x[2] + x[3] * x[3] - self.radii[1].powi(2)).abs()),
        }
    }

    /// A base point of N.
    pub fn base_point(&self) -> Point {
        match self.kind {
            TargetKind::Circle | TargetKind::Sphere => [1.0, 0.0, 0.0, 0.0],
            TargetKind::Torus => [self.radii[0], 0.0, self.radii[1], 0.0],
        }
    }
}

pub fn project_nearest(n: &TargetManifold, x: &Point) -> Result<Point> {
    n.project(x)
}

pub fn dist_to_manifold(n: &TargetManifold, x: &Point) -> f64 {
    n.dist(x)
}

/// Π as a map ℝ^ν → N, failing with a tube violation outside the tubular neighborhood.
#[derive(Clone, Debug)]
pub struct Projector {
    pub target: TargetManifold,
}

impl GenericMap for Projector {
    fn dims(&self) -> (usize, usize) {
        (self.target.nu, self.target.nu)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let v = crate::jet::values(x);
        let d = self.target.dist(&v);
        if !(d < self.target.iota) {
            return Err(Error::TubeViolation {
                distance: d,
                location: v[..self.target.nu].to_vec(),
                cell: None,
            });
        }
        Ok(self.target.project_raw(x))
    }
}

pub(crate) fn check_dims(n: &TargetManifold, nu: usize) -> Result<()> {
    if n.nu != nu {
        return arg(format!("field has {nu} components but the target lives in R^{}", n.nu));
    }
    Ok(())
}

fn slerp(a: &[f64], b: &[f64], t: f64, out: &mut [f64]) {
    let k = a.len();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0);
    let th = dot.acos();
    if th < 1e-12 {
        out.copy_from_slice(a);
        return;
    }
    if std::f64::consts::PI - th < 1e-9 {
        // antipodal endpoints: turn through a fixed perpendicular direction
        let mut p = vec![0.0; k];
        if k == 2 {
            p[0] = -a[1];
            p[1] = a[0];
        } else {
            let i = (0..k).min_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).unwrap_or(0);
            p[i] = 1.0;
            let d: f64 = (0..k).map(|j| p[j] * a[j]).sum();
            for j in 0..k {
                p[j] -= d * a[j];
            }
            let n = norm(&p);
            for v in p.iter_mut() {
                *v /= n;
            }
        }
        let ang = t * std::f64::consts::PI;
        for j in 0..k {
            out[j] = ang.cos() * a[j] + ang.sin() * p[j];
        }
        return;
    }
    let (s0, s1) = (((1.0 - t) * th).sin() / th.sin(), (t * th).sin() / th.sin());
    for j in 0..k {
        out[j] = s0 * a[j] + s1 * b[j];
    }
}

impl TargetManifold {
    /// Minimizing geodesic from `a` to `b` on N at parameter t, both endpoints on N.
    pub fn geodesic(&self, a: &Point, b: &Point, t: f64) -> Point {
        let mut y = [0.0; MAX_DIM];
        match self.kind {
            TargetKind::Circle | TargetKind::Sphere => {
                let k = self.nu;
                slerp(&a[..k], &b[..k], t, &mut y[..k]);
            }
            TargetKind::Torus => {
                for (p, &rad) in self.radii.iter().enumerate() {
                    let r = 2 * p..2 * p + 2;
                    let ua: Vec<f64> = a[r.clone()].iter().map(|v| v / rad).collect();
                    let ub: Vec<f64> = b[r.clone()].iter().map(|v| v / rad).collect();
                    slerp(&ua, &ub, t, &mut y[r.clone()]);
                    for v in &mut y[r] {
                        *v *= rad;
                    }
                }
            }
        }
        y
    }
}

/// Nearly uniform directions on S² along the Fibonacci spiral.
pub fn fibonacci_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * i as f64;
            [r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Stereographic projection from q ∈ S² onto the plane q^⊥.
pub fn stereo(q: &[f64; 3], p: &[f64]) -> [f64; 3] {
    let d = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    std::array::from_fn(|i| (p[i] - d * q[i]) / (1.0 - d))
}

pub fn stereo_inv(q: &[f64; 3], w: &[f64; 3]) -> [f64; 3] {
    let n2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    std::array::from_fn(|i| (2.0 * w[i] + (n2 - 1.0) * q[i]) / (n2 + 1.0))
}

const SNAP: f64 = 1e-10;

fn snap_even(t: f64) -> Option<f64> {
    let e = 2.0 * (t / 2.0).round();
    ((t - e).abs() <= SNAP).then_some(e)
}

/// Axes of the minimal primal face through a lattice point, with near-even coordinates snapped.
fn minimal_face(m: usize, u: &mut Point) -> [bool; MAX_DIM] {
    let mut spanned = [false; MAX_DIM];
    for i in 0..m {
        match snap_even(u[i]) {
            Some(e) => u[i] = e,
            None => spanned[i] = true,
        }
    }
    spanned
}

fn odd_center(t: f64) -> f64 {
    2.0 * (t / 2.0).floor() + 1.0
}

/// The deformation retraction H_ℓ of K^m ∖ T^{ℓ*} onto K^ℓ: radial sup-norm projections
/// from face centers, one dimension at a time, traversed linearly in t.
#[derive(Clone, Debug)]
pub struct HomotopyRetraction {
    pub cub: Cubication,
    pub l: usize,
}

pub fn homotopy_retraction(c: &Cubication, l: usize) -> Result<HomotopyRetraction> {
    if l >= c.m {
        return arg(format!("retraction onto K^{l} needs l <= m - 1 = {}", c.m - 1));
    }
    Ok(HomotopyRetraction { cub: c.clone(), l })
}

impl HomotopyRetraction {
    /// Path nodes in lattice units, `None` when x already lies on K^ℓ.
    fn nodes(&self, x: &Point) -> Result<Option<Vec<Point>>> {
        let m = self.cub.m;
        let mut y = self.cub.to_lattice_units(x);
        let start = minimal_face(m, &mut y.clone());
        if start.iter().filter(|&&s| s).count() <= self.l {
            return Ok(None);
        }
        let mut out = vec![y];
        for j in 0..m - self.l {
            let spanned = minimal_face(m, &mut y);
            if spanned.iter().filter(|&&s| s).count() >= m - j {
                let mut s = 0.0f64;
                for i in (0..m).filter(|&i| spanned[i]) {
                    s = s.max((y[i] - odd_center(y[i])).abs());
                }
                if s < 1e-12 {
                    return Err(Error::Singular { distance: self.cub.dist_to_dual(x, self.l) });
                }
                for i in (0..m).filter(|&i| spanned[i]) {
                    let o = odd_center(y[i]);
                    let t = (y[i] - o) / s;
                    y[i] = if t.abs() >= 1.0 - 1e-12 { o + t.signum() } else { o + t };
                }
            }
            out.push(y);
        }
        Ok(Some(out))
    }

    pub fn eval(&self, t: f64, x: &Point) -> Result<Point> {
        let Some(nodes) = self.nodes(x)? else {
            return Ok(*x);
        };
        if t <= 0.0 {
            return Ok(*x);
        }
        let k = nodes.len() - 1;
        let s = t.min(1.0) * k as f64;
        let seg = (s.floor() as usize).min(k - 1);
        let r = s - seg as f64;
        let (a, b) = (&nodes[seg], &nodes[seg + 1]);
        let y = std::array::from_fn(|i| a[i] + r * (b[i] - a[i]));
        Ok(self.cub.lattice_units_to_point(&y))
    }

    pub fn retract(&self, x: &Point) -> Result<Point> {
        self.eval(1.0, x)
    }
}

/// G_ℓ: moves one coordinate at a time along a straight line to the first vertex of the
/// cube, so K^ℓ is contracted inside K^{ℓ+1}.
pub fn contract_to_vertex(c: &Cubication, t: f64, x: &Point) -> Point {
    let a = c.lattice_to_point(&[0; MAX_DIM]);
    let m = c.m;
    let mut y = *x;
    for i in 0..m {
        let s = (t * m as f64 - i as f64).clamp(0.0, 1.0);
        y[i] = x[i] + s * (a[i] - x[i]);
    }
    y
}

#[derive(Clone, Copy, Debug)]
struct Puncture {
    q: [f64; 3],
    apex: [f64; 3],
}

/// A continuous extension to K^m of a map given on K^ℓ: cell fillings on K^{ℓ+1}, then the
/// one-dimension-loss construction x ↦ v(G_ℓ(φ(x), H_ℓ(1, x))) with φ = d_K / (d_K + d_T).
pub struct ContinuousExtension {
    pub cub: Cubication,
    pub l: usize,
    pub target: TargetManifold,
    pub u: Arc<dyn Mapping>,
    /// samples per side of a 2-face boundary when locating a puncture
    pub boundary_samples: usize,
    pub directions: usize,
    retraction: HomotopyRetraction,
    punctures: RwLock<HashMap<[i64; MAX_DIM], Puncture>>,
}

pub fn null_homotopy_extension(u: Arc<dyn Mapping>, c: &Cubication, target: &TargetManifold, l: usize) -> Result<ContinuousExtension> {
    check_dims(target, u.dim_out())?;
    if u.dim_in() != c.m {
        return arg(format!("map has {} inputs, cubication has dimension {}", u.dim_in(), c.m));
    }
    let retraction = homotopy_retraction(c, l)?;
    match (target.kind, l) {
        (_, 0) => {}
        (TargetKind::Sphere, 1) => {}
        (TargetKind::Circle, 1) => {
            return Err(Error::Filling("pi_1(S^1) is not trivial; loops on 2-face boundaries need not extend".into()))
        }
        _ => {
            return Err(Error::Filling(format!("no cell filler for target {} with l = {l}", target.name())));
        }
    }
    Ok(ContinuousExtension {
        cub: c.clone(),
        l,
        target: target.clone(),
        u,
        boundary_samples: 64,
        directions: 2000,
        retraction,
        punctures: RwLock::new(HashMap::new()),
    })
}

impl ContinuousExtension {
    fn eval_lattice(&self, y: &Point) -> Result<Point> {
        self.u.eval(&self.cub.lattice_units_to_point(y))
    }

    /// The filled map v on K^{ℓ+1} at a point of the domain.
    pub fn fill(&self, x: &Point) -> Result<Point> {
        let m = self.cub.m;
        let mut y = self.cub.to_lattice_units(x);
        let spanned = minimal_face(m, &mut y);
        let d = spanned.iter().filter(|&&s| s).count();
        if d <= self.l {
            return self.u.eval(x);
        }
        if d > self.l + 1 {
            return arg(format!("point {:?} lies outside K^{}", &y[..m], self.l + 1));
        }
        let axes: Vec<usize> = (0..m).filter(|&i| spanned[i]).collect();
        let mut key = [0i64; MAX_DIM];
        for i in 0..m {
            key[i] = if spanned[i] { odd_center(y[i]) as i64 } else { y[i] as i64 };
        }
        if self.l == 0 {
            let a = axes[0];
            let (mut e0, mut e1) = (y, y);
            e0[a] = key[a] as f64 - 1.0;
            e1[a] = key[a] as f64 + 1.0;
            let t = (y[a] - e0[a]) / 2.0;
            let (v0, v1) = (self.eval_lattice(&e0)?, self.eval_lattice(&e1)?);
            return Ok(self.target.geodesic(&v0, &v1, t));
        }
        let p = self.puncture(&key, &axes)?;
        let (i, j) = (axes[0], axes[1]);
        let (di, dj) = (y[i] - key[i] as f64, y[j] - key[j] as f64);
        let r = di.abs().max(dj.abs());
        let w = if r < 1e-14 {
            p.apex
        } else {
            let mut b = y;
            b[i] = key[i] as f64 + di / r;
            b[j] = key[j] as f64 + dj / r;
            if (b[i] - key[i] as f64).abs() >= 1.0 - 1e-12 {
                b[i] = key[i] as f64 + di.signum();
            }
            if (b[j] - key[j] as f64).abs() >= 1.0 - 1e-12 {
                b[j] = key[j] as f64 + dj.signum();
            }
            let s = stereo(&p.q, &self.eval_lattice(&b)?);
            std::array::from_fn(|c| p.apex[c] + r * (s[c] - p.apex[c]))
        };
        let z = stereo_inv(&p.q, &w);
        Ok([z[0], z[1], z[2], 0.0])
    }

    fn puncture(&self, key: &[i64; MAX_DIM], axes: &[usize]) -> Result<Puncture> {
        if let Some(p) = self.punctures.read().map_err(|_| poisoned())?.get(key) {
            return Ok(*p);
        }
        let (i, j) = (axes[0], axes[1]);
        let n = self.boundary_samples;
        let base: Point = std::array::from_fn(|c| key[c] as f64);
        let mut vals = Vec::with_capacity(4 * n);
        for side in 0..4 {
            for s in 0..n {
                let t = -1.0 + 2.0 * s as f64 / n as f64;
                let (a, b) = match side {
                    0 => (t, -1.0),
                    1 => (1.0, t),
                    2 => (-t, 1.0),
                    _ => (-1.0, -t),
                };
                let mut y = base;
                y[i] += a;
                y[j] += b;
                vals.push(self.eval_lattice(&y)?);
            }
        }
        let dirs = fibonacci_directions(self.directions);
        let mut best = (f64::NEG_INFINITY, [0.0; 3]);
        for q in &dirs {
            let closest = vals.iter().map(|v| q[0] * v[0] + q[1] * v[1] + q[2] * v[2]).fold(f64::NEG_INFINITY, f64::max);
            let gap = closest.clamp(-1.0, 1.0).acos();
            if gap > best.0 {
                best = (gap, *q);
            }
        }
        let threshold = 2.0 * (4.0 * std::f64::consts::PI / self.directions as f64).sqrt();
        if best.0 < threshold {
            return Err(Error::Filling(format!(
                "boundary image of the 2-face at lattice {:?} covers S^2 at sampling resolution (largest gap {:.3} rad)",
                &key[..self.cub.m],
                best.0
            )));
        }
        let mut corner = base;
        corner[i] -= 1.0;
        corner[j] -= 1.0;
        let p = Puncture { q: best.1, apex: stereo(&best.1, &self.eval_lattice(&corner)?) };
        self.punctures.write().map_err(|_| poisoned())?.insert(*key, p);
        Ok(p)
    }

    pub fn value(&self, x: &Point) -> Result<Point> {
        let c = &self.cub;
        if c.m == self.l + 1 {
            return self.fill(x);
        }
        let dt = c.dist_to_dual(x, self.l);
        if dt <= 1e-12 * c.eta {
            return self.fill(&c.lattice_to_point(&[0; MAX_DIM]));
        }
        let dk = c.dist_to_primal(x, self.l);
        let phi = dk / (dk + dt);
        let y = self.retraction.retract(x)?;
        let z = contract_to_vertex(c, phi, &y);
        self.fill(&z)
    }
}

fn poisoned() -> Error {
    Error::Numeric { message: "puncture cache lock poisoned".into(), residual: 0.0 }
}

fn no_jets() -> Error {
    Error::Numeric { message: "continuous blend has no closed-form derivatives; sample it on a grid".into(), residual: 0.0 }
}

impl Mapping for ContinuousExtension {
    fn dim_in(&self) -> usize {
        self.cub.m
    }
    fn dim_out(&self) -> usize {
        self.target.nu
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        self.value(x)
    }
    fn eval_jet(&self, _x: &[Jet2; MAX_DIM]) -> Result<[Jet2; MAX_DIM]> {
        Err(no_jets())
    }
}

/// v = Π(φ_ψ ∗ w) with w the blend of u and f ∘ H_ℓ near the dual skeleton; v = u wherever ψ = 0.
#[derive(Clone)]
pub struct SmoothExtension {
    pub cub: Cubication,
    pub l: usize,
    pub mu: f64,
    pub target: TargetManifold,
    pub u: Arc<dyn Mapping>,
    pub f: Arc<dyn Mapping>,
    /// lattice keys of the dual faces treated; all of T^{ℓ*} when `None`
    pub scope: Option<HashSet<[i64; MAX_DIM]>>,
    /// kernel radius near T, in units of μη
    pub width_factor: f64,
    pub rule: BallRule,
    retraction: HomotopyRetraction,
    kernel: PlateauCutoff,
}

pub fn smooth_extension(
    u: Arc<dyn Mapping>,
    f: Arc<dyn Mapping>,
    c: &Cubication,
    target: &TargetManifold,
    l: usize,
    mu: f64,
    scope: Option<&[[i64; MAX_DIM]]>,
) -> Result<SmoothExtension> {
    if !(mu > 0.0 && mu < 1.0) {
        return arg(format!("extension width mu = {mu} must lie in (0, 1)"));
    }
    check_dims(target, u.dim_out())?;
    check_dims(target, f.dim_out())?;
    let scope = match scope {
        Some(cells) => Some(c.dual_faces_of_cells(cells, l)?.into_iter().map(|f| f.lattice).collect()),
        None => None,
    };
    Ok(SmoothExtension {
        cub: c.clone(),
        l,
        mu,
        target: target.clone(),
        u,
        f,
        scope,
        width_factor: 0.1,
        rule: BallRule::new(c.m, 9),
        retraction: homotopy_retraction(c, l)?,
        kernel: make_plateau_cutoff(0.7 * mu, 0.9 * mu)?,
    })
}

impl SmoothExtension {
    /// dist(x, T) / η for the treated part of the dual skeleton.
    pub fn scaled_dist(&self, x: &Point) -> f64 {
        let c = &self.cub;
        match &self.scope {
            None => c.dist_to_dual(x, self.l) / c.eta,
            Some(keys) => c.nearest_dual_face(x, self.l, |k| keys.contains(k)).map_or(f64::INFINITY, |b| b.1 / c.eta),
        }
    }

    /// Mollification radius ψ(x).
    pub fn width(&self, x: &Point) -> f64 {
        let d = self.scaled_dist(x);
        if d >= 0.9 * self.mu {
            return 0.0;
        }
        self.width_factor * self.mu * self.cub.eta * self.kernel.value(d)
    }

    /// The continuous blend w.
    pub fn blend(&self, x: &Point) -> Result<Point> {
        let mu = self.mu;
        let (lo, mid, hi) = (0.2 * mu, 0.4 * mu, 0.6 * mu);
        let d = self.scaled_dist(x);
        if d >= hi {
            return self.u.eval(x);
        }
        if d <= lo {
            return self.f.eval(x);
        }
        let phi = if d >= mid { (hi - d) / (hi - mid) } else { (d - lo) / (mid - lo) };
        let z = self.retraction.eval(phi, x)?;
        if d >= mid {
            self.u.eval(&z)
        } else {
            self.f.eval(&z)
        }
    }

    pub fn value(&self, x: &Point) -> Result<Point> {
        let s = self.width(x);
        if s == 0.0 {
            return self.u.eval(x);
        }
        let m = self.cub.m;
        let mut acc = [0.0; MAX_DIM];
        for (z, w) in &self.rule.nodes {
            let mut y = *x;
            for a in 0..m {
                y[a] += s * z[a];
            }
            let v = self.blend(&y)?;
            for c in 0..MAX_DIM {
                acc[c] += w * v[c];
            }
        }
        let d = self.target.dist(&acc);
        if !(d < self.target.iota) {
            return Err(Error::TubeViolation {
                distance: d,
                location: x[..m].to_vec(),
                cell: self.cub.cell_of(x).map(|k| k[..m].to_vec()),
            });
        }
        Ok(self.target.project_raw(&acc))
    }
}

impl Mapping for SmoothExtension {
    fn dim_in(&self) -> usize {
        self.cub.m
    }
    fn dim_out(&self) -> usize {
        self.target.nu
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        self.value(x)
    }
    fn eval_jet(&self, x: &[Jet2; MAX_DIM]) -> Result<[Jet2; MAX_DIM]> {
        if self.width(&crate::jet::values(x)) == 0.0 {
            return self.u.eval_jet(x);
        }
        Err(no_jets())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::examples::{halton, ExampleKind, ExampleMap};
    use crate::geometry::build_cubication;

    fn p(v: &[f64]) -> Point {
        let mut x = [0.0; MAX_DIM];
        x[..v.len()].copy_from_slice(v);
        x
    }

    #[test]
    fn projection_examples() {
        let s2 = TargetManifold::sphere();
        assert_eq!(s2.project(&p(&[2.0, 0.0, 0.0])), Err(Error::TubeViolation { distance: 1.0, location: vec![2.0, 0.0, 0.0], cell: None }));
        assert_eq!(s2.project(&p(&[1.2, 0.0, 0.0])).unwrap(), p(&[1.0, 0.0, 0.0]));
        assert_eq!(s2.project_raw(&p(&[2.0, 0.0, 0.0])), p(&[1.0, 0.0, 0.0]));
        let s1 = TargetManifold::circle();
        assert_eq!(s1.project(&p(&[0.6, 0.8])).unwrap(), p(&[0.6, 0.8]));
        assert_eq!(dist_to_manifold(&s1, &p(&[0.0, 0.0])), 1.0);
        assert_eq!(dist_to_manifold(&s2, &p(&[0.0, 0.0, 3.0])), 2.0);
        let t = TargetManifold::torus(1.0, 1.0);
        let y = t.project_raw(&p(&[0.9, 0.1, 0.0, 1.2]));
        let r = (0.82f64).sqrt();
        assert!((y[0] - 0.9 / r).abs() < 1e-15 && (y[1] - 0.1 / r).abs() < 1e-15);
        assert_eq!((y[2], y[3]), (0.0, 1.0));
        assert!(t.residual(&y) < 1e-12);
    }

    #[test]
    fn retraction_fact_properties() {
        for m in 2..=3 {
            let c = build_cubication(m, &[0.0; 3], 1.0, 0.25).unwrap();
            for l in 0..m {
                let h = homotopy_retraction(&c, l).unwrap();
                for x in halton(m, 500, 0.99, 7) {
                    assert_eq!(h.eval(0.0, &x).unwrap(), x);
                    let y = h.retract(&x).unwrap();
                    assert!(c.dist_to_primal(&y, l) < 1e-9, "m={m} l={l} x={x:?} y={y:?}");
                    assert_eq!(h.retract(&y).unwrap(), y);
                    for k in 1..8 {
                        let z = h.eval(k as f64 / 8.0, &x).unwrap();
                        assert!(c.dist_to_dual(&z, l) > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn retraction_singular_on_dual_skeleton() {
        let c = build_cubication(2, &[0.0; 2], 1.0, 0.25).unwrap();
        let h = homotopy_retraction(&c, 1).unwrap();
        assert!(matches!(h.retract(&p(&[0.25, 0.25])), Err(Error::Singular { .. })));
        let h0 = homotopy_retraction(&c, 0).unwrap();
        assert!(matches!(h0.retract(&p(&[0.25, 0.4])), Err(Error::Singular { .. })));
        assert!(homotopy_retraction(&c, 2).is_err());
    }

    #[test]
    fn contraction_reaches_vertex_through_skeleton() {
        let c = build_cubication(3, &[0.0; 3], 1.0, 0.25).unwrap();
        let x = p(&[0.5, -0.25, 0.0]);
        assert_eq!(contract_to_vertex(&c, 0.0, &x), x);
        assert_eq!(contract_to_vertex(&c, 1.0, &x), p(&[-1.0, -1.0, -1.0]));
        for k in 0..=30 {
            let y = contract_to_vertex(&c, k as f64 / 30.0, &x);
            assert!(c.dist_to_primal(&y, 2) < 1e-12);
        }
    }

    #[test]
    fn constant_extension_is_constant() {
        let s2 = TargetManifold::sphere();
        let c = build_cubication(3, &[0.0; 3], 1.0, 0.5).unwrap();
        let u: Arc<dyn Mapping> = Arc::new(ExampleMap { kind: ExampleKind::Constant, m: 3, nu: 3, degree: 1, target: TargetKind::Sphere });
        let f = null_homotopy_extension(u, &c, &s2, 1).unwrap();
        for x in halton(3, 200, 0.99, 3) {
            let v = f.eval(&x).unwrap();
            assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn sphere_filling_keeps_boundary_loop() {
        let s2 = TargetManifold::sphere();
        let c = build_cubication(2, &[0.0; 2], 0.6, 0.2).unwrap();
        let u: Arc<dyn Mapping> =
            Arc::new(ExampleMap { kind: ExampleKind::EquatorialHedgehog, m: 2, nu: 3, degree: 1, target: TargetKind::Sphere });
        let f = null_homotopy_extension(u.clone(), &c, &s2, 1).unwrap();
        for k in 0..40 {
            let t = -0.2 + 0.4 * k as f64 / 40.0;
            for b in [p(&[t, -0.2]), p(&[0.2, t]), p(&[t, 0.2]), p(&[-0.2, t])] {
                assert_eq!(f.eval(&b).unwrap(), u.eval(&b).unwrap());
            }
        }
        for x in halton(2, 300, 0.2, 1) {
            assert!(s2.residual(&f.eval(&x).unwrap()) < 1e-9);
        }
        assert!(s2.residual(&f.eval(&p(&[0.0, 0.0])).unwrap()) < 1e-12);
        // continuity across the cone
        let a = f.eval(&p(&[1e-7, 0.0])).unwrap();
        let b = f.eval(&p(&[0.0, 0.0])).unwrap();
        assert!(norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]) < 1e-5);
    }

    #[test]
    fn path_filling_agrees_on_vertices() {
        let s1 = TargetManifold::circle();
        let c = build_cubication(2, &[0.0; 2], 1.0, 0.5).unwrap();
        let u: Arc<dyn Mapping> = Arc::new(ExampleMap { kind: ExampleKind::SmoothCircle, m: 2, nu: 2, degree: 1, target: TargetKind::Circle });
        let f = null_homotopy_extension(u.clone(), &c, &s1, 0).unwrap();
        for v in c.skeleton_faces(0).unwrap() {
            assert_eq!(f.eval(&v.center).unwrap(), u.eval(&v.center).unwrap());
        }
        for x in halton(2, 300, 1.0, 0) {
            assert!(s1.residual(&f.eval(&x).unwrap()) < 1e-12);
        }
        assert!(matches!(null_homotopy_extension(u, &c, &s1, 1), Err(Error::Filling(_))));
    }

    #[test]
    fn smooth_extension_removes_point_singularity() {
        let s2 = TargetManifold::sphere();
        let c = build_cubication(2, &[0.0; 2], 0.6, 0.2).unwrap();
        let u: Arc<dyn Mapping> =
            Arc::new(ExampleMap { kind: ExampleKind::EquatorialHedgehog, m: 2, nu: 3, degree: 1, target: TargetKind::Sphere });
        let f: Arc<dyn Mapping> = Arc::new(null_homotopy_extension(u.clone(), &c, &s2, 1).unwrap());
        let mu = 0.3;
        let v = smooth_extension(u.clone(), f, &c, &s2, 1, mu, Some(&[[1, 1, 0, 0]])).unwrap();
        assert!(v.eval(&p(&[0.0, 0.0])).is_ok());
        for x in halton(2, 1000, 0.6, 0) {
            let y = v.eval(&x).unwrap();
            assert!(s2.residual(&y) < 1e-9);
            if x[0].abs().max(x[1].abs()) >= mu * 0.2 {
                assert_eq!(y, u.eval(&x).unwrap());
            }
        }
    }
}
