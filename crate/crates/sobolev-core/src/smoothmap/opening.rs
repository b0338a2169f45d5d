//! Opening maps: per-face maps constant on the normal plateau, and their
//! composition over a subskeleton with a radius ladder.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{Aabb, PlateauCutoff, SmoothMap};
use crate::error::{arg, Error, Result};
use crate::field::{derivative_norms, weighted_norm, GridField, GridSpec};
use crate::geometry::{lattice_box, Cubication, Face};
use crate::jet::{values, Point, Scalar, MAX_DIM};
use crate::map::{dispatch, GenericMap, Mapping};

/// ρ̂ for a pair ρ̲ < ρ̄.
pub fn rho_hat(rho_lo: f64, rho_hi: f64) -> f64 {
    0.25 * (rho_hi - rho_lo)
}

fn check_radii(rho_lo: f64, rho_hi: f64) -> Result<()> {
    if !(rho_lo > 0.0 && rho_lo < rho_hi) {
        return arg(format!("opening radii need 0 < rho_lo < rho_hi, got {rho_lo} and {rho_hi}"));
    }
    Ok(())
}

fn face_cutoff(eta: f64, rho_lo: f64, rho_hi: f64) -> PlateauCutoff {
    let h = rho_hat(rho_lo, rho_hi);
    PlateauCutoff { a: (rho_lo + h) * eta, b: (rho_hi - h) * eta }
}

/// y'' ↦ c + ξ(y'' − c + z) − z on the normal axes, ξ(w) = (1 − φ(w)) w.
fn open_face<S: Scalar>(y: &mut [S; MAX_DIM], m: usize, normal: &[bool; MAX_DIM], center: &Point, z: &Point, cut: &PlateauCutoff) {
    let mut w = [S::cst(0.0); MAX_DIM];
    let mut phi = S::cst(1.0);
    for k in 0..m {
        if normal[k] {
            w[k] = y[k] - center[k] + z[k];
            phi = phi * cut.eval(w[k]);
            if phi.value() == 0.0 {
                return;
            }
        }
    }
    let s = -phi + 1.0;
    for k in 0..m {
        if normal[k] {
            y[k] = s * w[k] + center[k] - z[k];
        }
    }
}

/// Single-face opening map with the face spanning the first ℓ axes at the origin.
#[derive(Clone, Debug)]
pub struct OpeningFace {
    pub m: usize,
    pub normal: [bool; MAX_DIM],
    pub center: Point,
    pub z: Point,
    pub cut: PlateauCutoff,
}

impl GenericMap for OpeningFace {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.m)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut y = *x;
        open_face(&mut y, self.m, &self.normal, &self.center, &self.z, &self.cut);
        Ok(y)
    }
}

pub fn opening_face_map(m: usize, l: usize, eta: f64, rho_lo: f64, rho_hi: f64, z: &[f64]) -> Result<SmoothMap> {
    check_radii(rho_lo, rho_hi)?;
    if l > m || m > MAX_DIM || z.len() != m - l {
        return arg(format!("face of dimension {l} in R^{m} needs {} translation components, got {}", m.saturating_sub(l), z.len()));
    }
    let h = rho_hat(rho_lo, rho_hi) * eta;
    let zn = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if zn > h * (1.0 + 1e-12) {
        return arg(format!("translation |z| = {zn} exceeds rho_hat * eta = {h}"));
    }
    let mut normal = [false; MAX_DIM];
    let mut zz = [0.0; MAX_DIM];
    for k in l..m {
        normal[k] = true;
        zz[k] = z[k - l];
    }
    let map = OpeningFace { m, normal, center: [0.0; MAX_DIM], z: zz, cut: face_cutoff(eta, rho_lo, rho_hi) };
    let mut half = [f64::INFINITY; MAX_DIM];
    for k in l..m {
        half[k] = rho_hi * eta;
    }
    Ok(SmoothMap {
        name: "opening-face".into(),
        m,
        map: Arc::new(map),
        support: vec![Aabb::around(m, &[0.0; MAX_DIM], &half[..m])],
        singular: vec![],
        params: vec![
            ("l".into(), l as f64),
            ("eta".into(), eta),
            ("rho_lo".into(), rho_lo),
            ("rho_hi".into(), rho_hi),
            ("rho_hat".into(), rho_hat(rho_lo, rho_hi)),
        ],
    })
}

/// Lattice of admissible translations: `per_axis` values per normal axis, symmetric, never 0.
pub fn translation_candidates(dim: usize, rho_hat_eta: f64, per_axis: usize) -> Vec<Point> {
    let c = per_axis.max(1);
    let vals: Vec<f64> = (0..c).map(|k| rho_hat_eta * (2 * k + 1) as f64 / c as f64 - rho_hat_eta).collect();
    let hi: [i64; MAX_DIM] = std::array::from_fn(|i| if i < dim { c as i64 - 1 } else { 0 });
    lattice_box(dim, [0; MAX_DIM], hi)
        .into_iter()
        .map(|ix| std::array::from_fn(|i| if i < dim { vals[ix[i] as usize] } else { 0.0 }))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationChoice {
    pub index: usize,
    pub score: f64,
    pub mean: f64,
}

/// Argmin of `score` over the candidates; non-finite scores count as +∞ and ties keep the first.
pub fn choose_translation(candidates: &[Point], score: impl Fn(&Point) -> f64 + Sync) -> Result<TranslationChoice> {
    if candidates.is_empty() {
        return arg("no translation candidates");
    }
    if candidates.len() == 1 {
        return Ok(TranslationChoice { index: 0, score: score(&candidates[0]), mean: f64::NAN });
    }
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|z| {
            let s = score(z);
            if s.is_finite() {
                s
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[index] {
            index = i;
        }
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(TranslationChoice { index, score: scores[index], mean })
}

/// Σ_{j=1..k} η^j ‖D^j w‖_{L^p(block)} through finite differences on an offset grid
/// with spacing about `spacing`; +∞ when w fails anywhere on the grid.
pub fn translation_functional(w: &dyn Mapping, block: &Aabb, eta: f64, k: usize, p: f64, spacing: f64) -> f64 {
    let m = block.m;
    let mut spec = GridSpec::from_box(block, 4, true);
    for a in 0..m {
        let len = block.hi[a] - block.lo[a];
        spec.res[a] = ((len / spacing).ceil() as usize).max(k + 2);
    }
    let nu = w.dim_out();
    let mut data = Vec::with_capacity(spec.len() * nu);
    for idx in 0..spec.len() {
        match w.eval(&spec.node(idx)) {
            Ok(y) if y[..nu].iter().all(|v| v.is_finite()) => data.extend_from_slice(&y[..nu]),
            _ => return f64::INFINITY,
        }
    }
    let Ok(field) = GridField::from_data(spec, nu, data) else {
        return f64::INFINITY;
    };
    let (Ok(d), Ok(wt)) = (derivative_norms(&field, k), field.spec.weights(None)) else {
        return f64::INFINITY;
    };
    (1..=k).map(|j| eta.powi(j as i32) * weighted_norm(&d[j], &wt, p)).sum()
}

#[derive(Clone, Debug)]
struct Level {
    dim: usize,
    rho_hi: f64,
    cut: PlateauCutoff,
    /// face lattice key ↦ translation on the normal axes
    faces: HashMap<[i64; MAX_DIM], Point>,
}

/// Composite opening Φ = Φ^ℓ; level ℓ is applied first, dimension 0 last.
#[derive(Clone, Debug)]
pub struct OpeningMap {
    pub cub: Cubication,
    pub l: usize,
    pub rho: f64,
    levels: Vec<Level>,
}

/// ρ_i = ρ(1 + (ℓ − i)/(ℓ + 1)) for i = −1..=ℓ.
pub fn opening_ladder(rho: f64, l: usize, i: i64) -> f64 {
    rho * (1.0 + (l as f64 - i as f64) / (l as f64 + 1.0))
}

impl OpeningMap {
    fn find(&self, level: &Level, t: &Point) -> Option<([i64; MAX_DIM], [bool; MAX_DIM])> {
        let m = self.cub.m;
        let r = level.rho_hi;
        let mut normal = [None; MAX_DIM];
        let mut spanned: [Vec<i64>; MAX_DIM] = Default::default();
        for k in 0..m {
            let e = 2.0 * (0.5 * t[k]).round();
            if (t[k] - e).abs() <= r {
                normal[k] = Some(e as i64);
            }
            let o = 2.0 * ((t[k] - 1.0) * 0.5).floor() + 1.0;
            for c in [o, o + 2.0] {
                if (t[k] - c).abs() <= 1.0 + r {
                    spanned[k].push(c as i64);
                }
            }
        }
        let mut key = [0i64; MAX_DIM];
        let mut mask = [false; MAX_DIM];
        self.search(level, 0, 0, &normal, &spanned, &mut key, &mut mask)
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        level: &Level,
        axis: usize,
        used: usize,
        normal: &[Option<i64>; MAX_DIM],
        spanned: &[Vec<i64>; MAX_DIM],
        key: &mut [i64; MAX_DIM],
        mask: &mut [bool; MAX_DIM],
    ) -> Option<([i64; MAX_DIM], [bool; MAX_DIM])> {
        let m = self.cub.m;
        if axis == m {
            return (used == level.dim && level.faces.contains_key(key)).then_some((*key, *mask));
        }
        if used + (m - axis) < level.dim {
            return None;
        }
        if let Some(e) = normal[axis] {
            key[axis] = e;
            mask[axis] = true;
            if let Some(f) = self.search(level, axis + 1, used, normal, spanned, key, mask) {
                return Some(f);
            }
        }
        if used < level.dim {
            for &o in &spanned[axis] {
                key[axis] = o;
                mask[axis] = false;
                if let Some(f) = self.search(level, axis + 1, used + 1, normal, spanned, key, mask) {
                    return Some(f);
                }
            }
        }
        None
    }

    fn apply_level<S: Scalar>(&self, level: &Level, y: &mut [S; MAX_DIM]) {
        let t = self.cub.to_lattice_units(&values(y));
        if let Some((key, normal)) = self.find(level, &t) {
            let center = self.cub.lattice_to_point(&key);
            open_face(y, self.cub.m, &normal, &center, &level.faces[&key], &level.cut);
        }
    }

    /// Face boxes σ + Q_{ρ̄η} of every level.
    pub fn support_boxes(&self) -> Vec<Aabb> {
        let mut out = Vec::new();
        for level in &self.levels {
            for key in level.faces.keys() {
                let f = self.cub.face_from_lattice(*key, (0..self.cub.m).filter(|&a| key[a].rem_euclid(2) == 1).collect());
                out.push(Aabb::face_nbhd(&f, level.rho_hi * self.cub.eta));
            }
        }
        out
    }

    /// Translation chosen for a face, if the face belongs to the map.
    pub fn translation(&self, f: &Face) -> Option<Point> {
        self.levels.get(f.dim())?.faces.get(&f.lattice).copied()
    }
}

impl GenericMap for OpeningMap {
    fn dims(&self) -> (usize, usize) {
        (self.cub.m, self.cub.m)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut y = *x;
        for level in self.levels.iter().rev() {
            self.apply_level(level, &mut y);
        }
        Ok(y)
    }
}

/// How translations are picked while building a global opening.
#[derive(Clone)]
pub struct OpeningOptions {
    /// map whose opened derivatives are minimized; `None` keeps the first candidate everywhere
    pub u: Option<Arc<dyn Mapping>>,
    pub k: usize,
    pub p: f64,
    pub per_axis: usize,
    /// scored faces are restricted to those affecting Q_r about the cubication center
    pub measure_half_width: Option<f64>,
}

impl OpeningOptions {
    pub fn unscored(per_axis: usize) -> Self {
        OpeningOptions { u: None, k: 1, p: 1.0, per_axis, measure_half_width: None }
    }
}

/// Faces of dimension 0..=ℓ of the given cells.
pub fn subskeleton_of_cells(c: &Cubication, cells: &[[i64; MAX_DIM]], l: usize) -> Vec<Face> {
    (0..=l.min(c.m)).flat_map(|i| c.faces_of_cells(cells, i)).collect()
}

fn check_face(c: &Cubication, f: &Face) -> Result<()> {
    let m = c.m;
    let axes: Vec<usize> = (0..m).filter(|&a| f.lattice[a].rem_euclid(2) == 1).collect();
    let p = c.lattice_to_point(&f.lattice);
    let same = f.m == m
        && axes == f.axes
        && (f.radius - c.eta).abs() <= 1e-12 * c.eta
        && (0..m).all(|a| (p[a] - f.center[a]).abs() <= 1e-9 * c.eta);
    if !same {
        return arg(format!("face at {:?} is not a face of the cubication with eta = {}", &f.center[..m], c.eta));
    }
    Ok(())
}

/// Global opening over the subskeleton `faces` (all faces of dimension ≤ ℓ that are to be opened).
pub fn opening_global_map(c: &Cubication, faces: &[Face], l: usize, rho: f64, opts: &OpeningOptions) -> Result<SmoothMap> {
    let om = build_opening(c, faces, l, rho, opts)?;
    let support = om.support_boxes();
    Ok(SmoothMap {
        name: "opening".into(),
        m: c.m,
        map: Arc::new(om),
        support,
        singular: vec![],
        params: vec![("l".into(), l as f64), ("eta".into(), c.eta), ("rho".into(), rho)],
    })
}

pub fn build_opening(c: &Cubication, faces: &[Face], l: usize, rho: f64, opts: &OpeningOptions) -> Result<OpeningMap> {
    if !(rho > 0.0 && rho < 0.5) {
        return arg(format!("opening radius rho = {rho} must lie in (0, 1/2)"));
    }
    if l >= c.m {
        return arg(format!("opening dimension l = {l} must be below m = {}", c.m));
    }
    for f in faces {
        check_face(c, f)?;
        if f.dim() > l {
            return arg(format!("face of dimension {} exceeds l = {l}", f.dim()));
        }
    }
    let eta = c.eta;
    let m = c.m;
    let mut om = OpeningMap { cub: c.clone(), l, rho, levels: Vec::new() };
    // ROI radii r_i: a level-i face matters on Q_{r_ℓ} only if its box meets Q_{r_i}
    let mut roi = vec![f64::INFINITY; l + 1];
    if let Some(r) = opts.measure_half_width {
        roi[l] = r + rho * eta;
        for i in (0..l).rev() {
            roi[i] = roi[i + 1] + 2.0 * eta + 4.0 * rho * eta;
        }
    }
    for i in 0..=l {
        let rho_lo = opening_ladder(rho, l, i as i64);
        let rho_hi = opening_ladder(rho, l, i as i64 - 1);
        let cut = face_cutoff(eta, rho_lo, rho_hi);
        let h = rho_hat(rho_lo, rho_hi) * eta;
        let level_faces: Vec<&Face> = faces.iter().filter(|f| f.dim() == i).collect();
        let cands = translation_candidates(m - i, h, opts.per_axis);
        let prefix = Arc::new(om.clone());
        let choose = |f: &Face| -> Result<Point> {
            let normal: [bool; MAX_DIM] = std::array::from_fn(|a| a < m && !f.spans(a));
            let embed = |zc: &Point| -> Point {
                let mut z = [0.0; MAX_DIM];
                let mut j = 0;
                for a in 0..m {
                    if normal[a] {
                        z[a] = zc[j];
                        j += 1;
                    }
                }
                z
            };
            let block = Aabb::face_nbhd(f, rho_hi * eta);
            let reach = Aabb::face_nbhd(f, 2.0 * rho * eta);
            let gap = (0..m)
                .map(|a| (reach.lo[a] - c.center[a]).max(c.center[a] - reach.hi[a]).max(0.0))
                .fold(0.0f64, f64::max);
            let scored = opts.u.is_some() && gap <= roi[i];
            if !scored {
                return Ok(embed(&cands[0]));
            }
            let u = opts.u.as_ref().ok_or(Error::Argument("missing map".into()))?;
            let score = |zc: &Point| {
                let face = OpeningFace { m, normal, center: f.center, z: embed(zc), cut };
                let w = Chain { u: u.clone(), prefix: prefix.clone(), face };
                translation_functional(&w, &block, eta, opts.k, opts.p, rho_hi * eta / 4.0)
            };
            let pick = choose_translation(&cands, score)?;
            Ok(embed(&cands[pick.index]))
        };
        let chosen: Vec<Result<Point>> = level_faces.par_iter().map(|f| choose(f)).collect();
        let mut map = HashMap::new();
        for (f, z) in level_faces.iter().zip(chosen) {
            map.insert(f.lattice, z?);
        }
        om.levels.push(Level { dim: i, rho_hi, cut, faces: map });
    }
    Ok(om)
}

/// u ∘ Φ^{i−1} ∘ Φ_σ used while scoring translations.
struct Chain {
    u: Arc<dyn Mapping>,
    prefix: Arc<OpeningMap>,
    face: OpeningFace,
}

impl GenericMap for Chain {
    fn dims(&self) -> (usize, usize) {
        (self.face.m, self.u.dim_out())
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let y = self.face.apply(x)?;
        dispatch(self.u.as_ref(), &self.prefix.apply(&y)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_cubication;

    #[test]
    fn face_map_formula() {
        let phi = opening_face_map(1, 0, 1.0, 0.2, 0.45, &[0.0]).unwrap();
        let x = 0.3;
        let cut = PlateauCutoff { a: 0.2 + 0.0625, b: 0.45 - 0.0625 };
        let expected = (1.0 - cut.value(x)) * x;
        assert!((phi.eval(&[x, 0.0, 0.0, 0.0]).unwrap()[0] - expected).abs() < 1e-15);
        assert_eq!(phi.eval(&[0.1, 0.0, 0.0, 0.0]).unwrap()[0], 0.0);
        assert_eq!(phi.eval(&[0.5, 0.0, 0.0, 0.0]).unwrap()[0], 0.5);
        assert!(opening_face_map(1, 0, 1.0, 0.2, 0.45, &[0.07]).is_err());
    }

    #[test]
    fn face_map_constant_on_plateau() {
        let phi = opening_face_map(3, 1, 0.5, 0.1, 0.2, &[0.01, -0.005]).unwrap();
        let a = phi.eval(&[0.3, 0.04, -0.03, 0.0]).unwrap();
        let b = phi.eval(&[0.3, -0.045, 0.02, 0.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], 0.3);
        assert_eq!(&a[1..3], &[-0.01, 0.005]);
    }

    #[test]
    fn candidates_exclude_zero() {
        let c = translation_candidates(2, 0.1, 4);
        assert_eq!(c.len(), 16);
        assert!(c.iter().all(|z| z[0] != 0.0 && z[1] != 0.0 && z[0].abs() <= 0.1));
    }

    #[test]
    fn choice_rules() {
        let cands = translation_candidates(1, 1.0, 4);
        let one = choose_translation(&cands[..1], |_| f64::NAN).unwrap();
        assert_eq!(one.index, 0);
        assert_eq!(choose_translation(&cands, |_| 0.0).unwrap().index, 0);
        let pick = choose_translation(&cands, |z| if z[0] < 0.0 { f64::NAN } else { (z[0] - 0.7).abs() }).unwrap();
        assert_eq!(pick.index, 3);
        assert!(choose_translation(&[], |_| 0.0).is_err());
    }

    #[test]
    fn global_vertex_plateau() {
        let c = build_cubication(2, &[0.0, 0.0], 1.0, 0.5).unwrap();
        let faces: Vec<Face> = c.skeleton_faces(0).unwrap();
        let phi = opening_global_map(&c, &faces, 0, 0.2, &OpeningOptions::unscored(4)).unwrap();
        let v = [0.0, 0.0, 0.0, 0.0];
        let r = opening_ladder(0.2, 0, 0) * 0.5;
        let y0 = phi.eval(&v).unwrap();
        for s in 0..10 {
            let t = s as f64 / 10.0;
            let x = [v[0] + r * (2.0 * t - 1.0), v[1] + r * (1.0 - t) * 0.9, 0.0, 0.0];
            assert_eq!(phi.eval(&x).unwrap(), y0);
        }
        let far = [0.5, 0.5, 0.0, 0.0];
        assert!(!phi.in_support(&far));
        assert_eq!(phi.eval(&far).unwrap(), far);
    }
}
