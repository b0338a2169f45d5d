//! Cubications of a cube, their skeletons and dual skeletons.
//!
//! All distances and neighborhoods use the sup-norm, so `f + Q_r` is the set of
//! points whose sup-distance to `f` is at most `r`.
//!
//! Faces live on a doubled integer lattice: lattice coordinate `c` sits at
//! `center - half_width + c * eta`, cell interiors have odd coordinates and
//! vertices even ones. An ℓ-face of the cubication has exactly ℓ odd coordinates
//! (its spanned axes). A face of the dual skeleton T^{ℓ*} has ℓ+1 odd fixed
//! coordinates and even spanned coordinates.

use crate::error::{arg, Error, Result};
use crate::jet::{Point, MAX_DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct Cubication {
    pub m: usize,
    pub center: Point,
    pub half_width: f64,
    pub eta: f64,
    /// cells per axis
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub m: usize,
    pub center: Point,
    pub axes: Vec<usize>,
    pub radius: f64,
    /// doubled-lattice coordinates of the center
    pub lattice: [i64; MAX_DIM],
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSkeleton {
    pub dim: usize,
    pub faces: Vec<Face>,
}

pub fn dual_dimension(m: usize, l: usize) -> Result<usize> {
    if l >= m {
        return arg(format!("no dual skeleton for l = {l} in dimension {m}"));
    }
    Ok(m - l - 1)
}

pub fn build_cubication(m: usize, center: &[f64], half_width: f64, eta: f64) -> Result<Cubication> {
    if m == 0 || m > MAX_DIM {
        return Err(Error::Config(format!("dimension m = {m} must be in 1..={MAX_DIM}")));
    }
    if center.len() < m {
        return Err(Error::Config(format!("center has {} coordinates, need {m}", center.len())));
    }
    if !(eta > 0.0) || !(half_width > 0.0) {
        return Err(Error::Config(format!(
            "half_width = {half_width} and eta = {eta} must be positive"
        )));
    }
    let ratio = half_width / eta;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!(
            "eta = {eta} does not divide half_width = {half_width}"
        )));
    }
    let mut c = [0.0; MAX_DIM];
    c[..m].copy_from_slice(&center[..m]);
    Ok(Cubication { m, center: c, half_width, eta, n: n as usize })
}

/// Odometer over a box of integer vectors `lo[i]..=hi[i]`, i < m.
pub fn lattice_box(m: usize, lo: [i64; MAX_DIM], hi: [i64; MAX_DIM]) -> Vec<[i64; MAX_DIM]> {
    let mut out = Vec::new();
    if (0..m).any(|i| lo[i] > hi[i]) {
        return out;
    }
    let mut c = lo;
    loop {
        out.push(c);
        let mut i = 0;
        loop {
            if i == m {
                return out;
            }
            if c[i] < hi[i] {
                c[i] += 1;
                break;
            }
            c[i] = lo[i];
            i += 1;
        }
    }
}

impl Cubication {
    pub fn cell_count(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    pub fn lattice_to_point(&self, c: &[i64; MAX_DIM]) -> Point {
        let mut p = [0.0; MAX_DIM];
        for i in 0..self.m {
            p[i] = self.center[i] - self.half_width + c[i] as f64 * self.eta;
        }
        p
    }

    /// Position of `x` in doubled-lattice units.
    pub fn to_lattice_units(&self, x: &Point) -> Point {
        let mut p = [0.0; MAX_DIM];
        for i in 0..self.m {
            p[i] = (x[i] - self.center[i] + self.half_width) / self.eta;
        }
        p
    }

    /// All cell indices k ∈ [0, n)^m.
    pub fn cells(&self) -> Vec<[i64; MAX_DIM]> {
        let hi = std::array::from_fn(|i| if i < self.m { self.n as i64 - 1 } else { 0 });
        lattice_box(self.m, [0; MAX_DIM], hi)
    }

    pub fn cell_center(&self, k: &[i64; MAX_DIM]) -> Point {
        let c = std::array::from_fn(|i| if i < self.m { 2 * k[i] + 1 } else { 0 });
        self.lattice_to_point(&c)
    }

    /// Cell containing `x`, ties broken toward lower indices; `None` outside the domain.
    pub fn cell_of(&self, x: &Point) -> Option<[i64; MAX_DIM]> {
        let mut k = [0i64; MAX_DIM];
        for i in 0..self.m {
            let t = (x[i] - self.center[i] + self.half_width) / (2.0 * self.eta);
            if t < 0.0 || t > self.n as f64 {
                return None;
            }
            k[i] = (t.floor() as i64).min(self.n as i64 - 1);
        }
        Some(k)
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..self.m).all(|i| (x[i] - self.center[i]).abs() <= self.half_width)
    }

    pub fn face_from_lattice(&self, c: [i64; MAX_DIM], axes: Vec<usize>) -> Face {
        Face {
            m: self.m,
            center: self.lattice_to_point(&c),
            axes,
            radius: self.eta,
            lattice: c,
        }
    }

    fn primal_face(&self, c: [i64; MAX_DIM]) -> Face {
        let axes = (0..self.m).filter(|&i| c[i].rem_euclid(2) == 1).collect();
        self.face_from_lattice(c, axes)
    }

    pub fn skeleton_faces(&self, l: usize) -> Result<Vec<Face>> {
        if l > self.m {
            return arg(format!("skeleton dimension {l} exceeds m = {}", self.m));
        }
        let hi = std::array::from_fn(|i| if i < self.m { 2 * self.n as i64 } else { 0 });
        Ok(lattice_box(self.m, [0; MAX_DIM], hi)
            .into_iter()
            .filter(|c| (0..self.m).filter(|&i| c[i].rem_euclid(2) == 1).count() == l)
            .map(|c| self.primal_face(c))
            .collect())
    }

    /// ℓ-faces of the given cells, each reported once.
    pub fn faces_of_cells(&self, cells: &[[i64; MAX_DIM]], l: usize) -> Vec<Face> {
        let mut keys = std::collections::BTreeSet::new();
        for k in cells {
            let lo = std::array::from_fn(|i| if i < self.m { 2 * k[i] } else { 0 });
            let hi = std::array::from_fn(|i| if i < self.m { 2 * k[i] + 2 } else { 0 });
            for c in lattice_box(self.m, lo, hi) {
                if (0..self.m).filter(|&i| c[i].rem_euclid(2) == 1).count() == l {
                    keys.insert(c);
                }
            }
        }
        keys.into_iter().map(|c| self.primal_face(c)).collect()
    }

    /// T^{ℓ*}: faces σ^{ℓ*} + x − a obtained by shifting ℓ*-faces by a vertex-to-center
    /// offset, restricted to those meeting the closed domain.
    pub fn dual_skeleton(&self, l: usize) -> Result<DualSkeleton> {
        let dim = dual_dimension(self.m, l)?;
        let two_n = 2 * self.n as i64;
        let mut keys = std::collections::BTreeSet::new();
        // a primal ℓ*-face at lattice c shifted by one lattice unit on every axis
        for f in self.skeleton_faces(dim)? {
            for s in lattice_box(self.m, [0; MAX_DIM], [1; MAX_DIM]) {
                let c: [i64; MAX_DIM] =
                    std::array::from_fn(|i| if i < self.m { f.lattice[i] + 2 * s[i] - 1 } else { 0 });
                let meets = (0..self.m).all(|i| {
                    if c[i].rem_euclid(2) == 1 {
                        (0..=two_n).contains(&c[i])
                    } else {
                        c[i] + 1 >= 0 && c[i] - 1 <= two_n
                    }
                });
                if meets {
                    keys.insert(c);
                }
            }
        }
        let faces = keys
            .into_iter()
            .map(|c| {
                let axes = (0..self.m).filter(|&i| c[i].rem_euclid(2) == 0).collect();
                self.face_from_lattice(c, axes)
            })
            .collect();
        Ok(DualSkeleton { dim, faces })
    }

    /// Dual ℓ*-faces lying in the closure of the given cells.
    pub fn dual_faces_of_cells(&self, cells: &[[i64; MAX_DIM]], l: usize) -> Result<Vec<Face>> {
        dual_dimension(self.m, l)?;
        let mut keys = std::collections::BTreeSet::new();
        for k in cells {
            let lo = std::array::from_fn(|i| if i < self.m { 2 * k[i] } else { 0 });
            let hi = std::array::from_fn(|i| if i < self.m { 2 * k[i] + 2 } else { 0 });
            for c in lattice_box(self.m, lo, hi) {
                let odd = (0..self.m).filter(|&i| c[i].rem_euclid(2) == 1).count();
                if odd == l + 1 {
                    keys.insert(c);
                }
            }
        }
        Ok(keys
            .into_iter()
            .map(|c| {
                let axes = (0..self.m).filter(|&i| c[i].rem_euclid(2) == 0).collect();
                self.face_from_lattice(c, axes)
            })
            .collect())
    }
}

impl Cubication {
    pub fn lattice_units_to_point(&self, u: &Point) -> Point {
        let mut p = [0.0; MAX_DIM];
        for i in 0..self.m {
            p[i] = self.center[i] - self.half_width + u[i] * self.eta;
        }
        p
    }

    /// Sup-distance to the ℓ-skeleton of the unbounded lattice: the (m−ℓ)-th smallest
    /// per-axis distance to an even lattice value.
    pub fn dist_to_primal(&self, x: &Point, l: usize) -> f64 {
        let u = self.to_lattice_units(x);
        let mut d: Vec<f64> = (0..self.m).map(|i| dist_to_even(u[i])).collect();
        d.sort_by(f64::total_cmp);
        if l >= self.m {
            return 0.0;
        }
        d[self.m - l - 1] * self.eta
    }

    /// Sup-distance to T^{ℓ*} of the unbounded lattice: the (ℓ+1)-th smallest per-axis
    /// distance to an odd lattice value.
    pub fn dist_to_dual(&self, x: &Point, l: usize) -> f64 {
        let u = self.to_lattice_units(x);
        let mut d: Vec<f64> = (0..self.m).map(|i| 1.0 - dist_to_even(u[i])).collect();
        d.sort_by(f64::total_cmp);
        d[l.min(self.m - 1)] * self.eta
    }

    /// Nearest dual ℓ*-face accepted by `keep`, searched among the faces whose odd
    /// coordinates round those of `x`. Exact whenever the distance is below η.
    pub fn nearest_dual_face(&self, x: &Point, l: usize, keep: impl Fn(&[i64; MAX_DIM]) -> bool) -> Option<([i64; MAX_DIM], f64)> {
        let u = self.to_lattice_units(x);
        let m = self.m;
        let mut best: Option<([i64; MAX_DIM], f64)> = None;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != l + 1 {
                continue;
            }
            let mut c = [0i64; MAX_DIM];
            let mut d = 0.0f64;
            for i in 0..m {
                if mask & (1 << i) != 0 {
                    c[i] = 2 * (u[i] / 2.0).floor() as i64 + 1;
                    d = d.max((u[i] - c[i] as f64).abs());
                } else {
                    c[i] = 2 * (u[i] / 2.0).round() as i64;
                }
            }
            if keep(&c) && best.map_or(true, |b| d * self.eta < b.1) {
                best = Some((c, d * self.eta));
            }
        }
        best
    }
}

/// Distance from a lattice coordinate to the nearest even integer, in [0, 1].
pub fn dist_to_even(t: f64) -> f64 {
    (t - 2.0 * (t / 2.0).round()).abs()
}

impl Face {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn spans(&self, i: usize) -> bool {
        self.axes.contains(&i)
    }

    /// Sup-norm distance by per-coordinate clamping.
    pub fn dist(&self, x: &Point) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.m {
            let t = (x[i] - self.center[i]).abs();
            let e = if self.spans(i) { (t - self.radius).max(0.0) } else { t };
            d = d.max(e);
        }
        d
    }

    /// Nearest point of the face in the sup-norm clamp sense.
    pub fn clamp(&self, x: &Point) -> Point {
        let mut p = *x;
        for i in 0..self.m {
            p[i] = if self.spans(i) {
                x[i].clamp(self.center[i] - self.radius, self.center[i] + self.radius)
            } else {
                self.center[i]
            };
        }
        p
    }
}

pub fn dist_to_skeleton(x: &Point, faces: &[Face]) -> Result<f64> {
    if faces.is_empty() {
        return arg("distance to an empty face list");
    }
    Ok(faces.iter().map(|f| f.dist(x)).fold(f64::INFINITY, f64::min))
}

pub fn neighborhood_contains(f: &Face, r: f64, x: &Point) -> bool {
    f.dist(x) <= r
}
