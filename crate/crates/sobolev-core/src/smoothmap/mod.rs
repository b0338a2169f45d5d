//! Plateau cutoffs and the opening, thickening and shrinking self-maps of ℝ^m.

pub mod cutoff;
pub mod opening;
pub mod profile;
pub mod shrinking;
pub mod thickening;

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{arg, Error, Result};
use crate::geometry::Face;
use crate::jet::{Jet2, Point, MAX_DIM};
use crate::map::Mapping;

pub use cutoff::{bridge, make_plateau_cutoff, PlateauCutoff};
pub use profile::Profile;

/// Closed axis-aligned box; degenerate axes are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Aabb {
    pub m: usize,
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    pub fn new(m: usize, lo: Point, hi: Point) -> Self {
        Aabb { m, lo, hi }
    }

    pub fn around(m: usize, center: &Point, half: &[f64]) -> Self {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for i in 0..m {
            lo[i] = center[i] - half[i];
            hi[i] = center[i] + half[i];
        }
        Aabb { m, lo, hi }
    }

    /// `f + Q_r` as a box.
    pub fn face_nbhd(f: &Face, r: f64) -> Self {
        let half: Vec<f64> = (0..f.m)
            .map(|i| if f.spans(i) { f.radius + r } else { r })
            .collect();
        Aabb::around(f.m, &f.center, &half)
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..self.m).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    /// Sup-norm distance, zero inside.
    pub fn dist(&self, x: &Point) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.m {
            d = d.max(self.lo[i] - x[i]).max(x[i] - self.hi[i]);
        }
        d
    }

    pub fn volume(&self) -> f64 {
        (0..self.m).map(|i| (self.hi[i] - self.lo[i]).max(0.0)).product()
    }
}

/// Local coordinates about a face: spanned axes first, then the normal axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceFrame {
    pub m: usize,
    pub dim: usize,
    pub center: Point,
    /// local slot ↦ ambient axis
    pub perm: [usize; MAX_DIM],
}

impl FaceFrame {
    pub fn new(m: usize, center: Point, spanned: &[bool; MAX_DIM]) -> Self {
        let mut perm = [0; MAX_DIM];
        let mut j = 0;
        for pass in [true, false] {
            for a in 0..m {
                if spanned[a] == pass {
                    perm[j] = a;
                    j += 1;
                }
            }
        }
        let dim = (0..m).filter(|&a| spanned[a]).count();
        FaceFrame { m, dim, center, perm }
    }

    pub fn of_face(f: &Face) -> Self {
        let spanned = std::array::from_fn(|a| a < f.m && f.spans(a));
        Self::new(f.m, f.center, &spanned)
    }

    pub fn to_local<S: crate::jet::Scalar>(&self, x: &[S; MAX_DIM]) -> [S; MAX_DIM] {
        let mut y = [S::cst(0.0); MAX_DIM];
        for j in 0..self.m {
            let a = self.perm[j];
            y[j] = x[a] - self.center[a];
        }
        y
    }

    pub fn from_local<S: crate::jet::Scalar>(&self, y: &[S; MAX_DIM]) -> [S; MAX_DIM] {
        let mut x = *y;
        for j in 0..self.m {
            let a = self.perm[j];
            x[a] = y[j] + self.center[a];
        }
        x
    }
}

/// A self-map with its declared support, singular set and parameters.
#[derive(Clone)]
pub struct SmoothMap {
    pub name: String,
    pub m: usize,
    pub map: Arc<dyn Mapping>,
    /// Φ(x) = x outside the union of these boxes
    pub support: Vec<Aabb>,
    pub singular: Vec<Aabb>,
    pub params: Vec<(String, f64)>,
}

impl SmoothMap {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|p| p.1)
    }

    pub fn in_support(&self, x: &Point) -> bool {
        self.support.iter().any(|b| b.contains(x))
    }

    pub fn singular_dist(&self, x: &Point) -> f64 {
        self.singular.iter().map(|b| b.dist(x)).fold(f64::INFINITY, f64::min)
    }

    /// Parameters and support boxes as text.
    pub fn describe(&self) -> String {
        let mut s = format!("{} m={}", self.name, self.m);
        for (k, v) in &self.params {
            let _ = write!(s, " {k}={v}");
        }
        let _ = write!(s, " support_boxes={} singular_boxes={}", self.support.len(), self.singular.len());
        s
    }
}

impl Mapping for SmoothMap {
    fn dim_in(&self) -> usize {
        self.m
    }
    fn dim_out(&self) -> usize {
        self.m
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        self.map.eval(x)
    }
    fn eval_jet(&self, x: &[Jet2; MAX_DIM]) -> Result<[Jet2; MAX_DIM]> {
        self.map.eval_jet(x)
    }
    fn jacobian(&self, x: &Point) -> Option<Result<f64>> {
        self.map.jacobian(x)
    }
}

/// Value and derivative tensors of a map at a point; `d1[i][a] = ∂_a Φ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub order: usize,
    pub value: Point,
    pub d1: [[f64; MAX_DIM]; MAX_DIM],
    pub d2: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
    pub jacobian: f64,
}

impl Jet {
    /// Operator-style norm proxy: Frobenius norm of D^j over the first `m` inputs and `nu` outputs.
    pub fn norm(&self, j: usize, m: usize, nu: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..nu {
            for a in 0..m {
                if j == 1 {
                    s += self.d1[i][a] * self.d1[i][a];
                } else {
                    for b in 0..m {
                        s += self.d2[i][a][b] * self.d2[i][a][b];
                    }
                }
            }
        }
        s.sqrt()
    }
}

pub fn determinant(a: &[[f64; MAX_DIM]; MAX_DIM], m: usize) -> f64 {
    let mut u = *a;
    let mut det = 1.0;
    for c in 0..m {
        let p = (c..m)
            .max_by(|&i, &j| u[i][c].abs().total_cmp(&u[j][c].abs()))
            .unwrap_or(c);
        if u[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            u.swap(p, c);
            det = -det;
        }
        det *= u[c][c];
        for r in c + 1..m {
            let f = u[r][c] / u[c][c];
            for k in c..m {
                u[r][k] -= f * u[c][k];
            }
        }
    }
    det
}

/// Jet of an arbitrary map through forward-mode arithmetic.
pub fn jet_of(map: &dyn Mapping, x: &Point, j: usize) -> Result<Jet> {
    if j > 2 {
        return arg(format!("jet order {j} not available (maximum 2)"));
    }
    let y = map.eval_jet(&Jet2::seed(x))?;
    let m = map.dim_in();
    let mut jet = Jet {
        order: j,
        value: std::array::from_fn(|i| y[i].v),
        d1: [[0.0; MAX_DIM]; MAX_DIM],
        d2: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM],
        jacobian: 0.0,
    };
    for i in 0..map.dim_out() {
        if j >= 1 {
            jet.d1[i] = y[i].g;
        }
        if j >= 2 {
            jet.d2[i] = y[i].h;
        }
    }
    if map.dim_out() == m {
        jet.jacobian = determinant(&std::array::from_fn(|i| y[i].g), m);
    }
    Ok(jet)
}

pub fn jet_eval(phi: &SmoothMap, x: &Point, j: usize) -> Result<Jet> {
    if j > 2 {
        return arg(format!("jet order {j} not available (maximum 2)"));
    }
    if !phi.singular.is_empty() {
        let d = phi.singular_dist(x);
        if d <= 0.0 {
            return Err(Error::Singular { distance: d });
        }
    }
    jet_of(phi, x, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{Affine, Identity};

    fn wrap(map: Arc<dyn Mapping>, m: usize) -> SmoothMap {
        SmoothMap { name: "t".into(), m, map, support: vec![], singular: vec![], params: vec![] }
    }

    #[test]
    fn identity_jet() {
        let phi = wrap(Arc::new(Identity(3)), 3);
        let j = jet_eval(&phi, &[0.1, 0.2, 0.3, 0.0], 1).unwrap();
        for i in 0..3 {
            for a in 0..3 {
                assert_eq!(j.d1[i][a], if i == a { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(j.jacobian, 1.0);
    }

    #[test]
    fn affine_has_no_second_derivative() {
        let phi = wrap(Arc::new(Affine::scaling(2, 2.0)), 2);
        let j = jet_eval(&phi, &[0.3, -0.7, 0.0, 0.0], 2).unwrap();
        assert!(j.d2.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(j.jacobian, 4.0);
        assert!(jet_eval(&phi, &[0.0; 4], 3).is_err());
    }

    #[test]
    fn singular_points_are_rejected() {
        let mut phi = wrap(Arc::new(Identity(2)), 2);
        phi.singular.push(Aabb::around(2, &[0.0; 4], &[0.0, 0.1]));
        match jet_eval(&phi, &[0.0, 0.05, 0.0, 0.0], 1) {
            Err(Error::Singular { distance }) => assert_eq!(distance, 0.0),
            _ => panic!("expected singular error"),
        }
        assert!(jet_eval(&phi, &[0.01, 0.05, 0.0, 0.0], 1).is_ok());
    }

    #[test]
    fn determinant_of_permutation_and_triangular() {
        let mut a = [[0.0; 4]; 4];
        a[0][1] = 1.0;
        a[1][0] = 1.0;
        a[2][2] = 3.0;
        assert_eq!(determinant(&a, 3), -3.0);
        let b = [[2.0, 1.0, 0.0, 0.0], [0.0, 3.0, 5.0, 0.0], [0.0, 0.0, 4.0, 0.0], [0.0; 4]];
        assert_eq!(determinant(&b, 3), 24.0);
    }
}
