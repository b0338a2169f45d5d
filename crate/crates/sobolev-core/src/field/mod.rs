//! Sampled maps on tensor grids, finite differences and Sobolev-type norms.

pub mod convolve;
pub mod examples;
pub mod quadrature;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{arg, Error, Result};
use crate::jet::{Jet2, Point, Scalar, MAX_DIM};
use crate::map::{GenericMap, Mapping};
use crate::smoothmap::Aabb;

pub use convolve::{
    adaptive_convolve, compose_with_map, translate_field, BallRule, Mollifier, Smoothed, Translated,
};
pub use examples::{make_r_class_example, ExampleKind, RClassMap};

/// Tensor grid on the box [lo, hi]. Standard grids put nodes at lo + i h with
/// trapezoid weights; offset grids put them at lo + (i + 1/2) h, i = 0..=res,
/// so no node sits on a lattice hyperplane, and the last node carries no weight.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub m: usize,
    pub lo: Point,
    pub hi: Point,
    pub res: [usize; MAX_DIM],
    pub offset: bool,
}

impl GridSpec {
    pub fn cube(m: usize, half_width: f64, res: usize, offset: bool) -> Self {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        let mut r = [0; MAX_DIM];
        for i in 0..m {
            lo[i] = -half_width;
            hi[i] = half_width;
            r[i] = res;
        }
        GridSpec { m, lo, hi, res: r, offset }
    }

    pub fn from_box(b: &Aabb, res: usize, offset: bool) -> Self {
        let mut r = [0; MAX_DIM];
        r[..b.m].fill(res);
        GridSpec { m: b.m, lo: b.lo, hi: b.hi, res: r, offset }
    }

    pub fn h(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.res[axis] as f64
    }

    pub fn n(&self, axis: usize) -> usize {
        self.res[axis] + 1
    }

    pub fn len(&self) -> usize {
        (0..self.m).map(|i| self.n(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let off = if self.offset { 0.5 } else { 0.0 };
        self.lo[axis] + (i as f64 + off) * self.h(axis)
    }

    /// Multi-index of a flat index; axis `m − 1` varies fastest.
    pub fn unflatten(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for a in (0..self.m).rev() {
            out[a] = idx % self.n(a);
            idx /= self.n(a);
        }
        out
    }

    pub fn flatten(&self, ix: &[usize; MAX_DIM]) -> usize {
        let mut idx = 0;
        for a in 0..self.m {
            idx = idx * self.n(a) + ix[a];
        }
        idx
    }

    pub fn stride(&self, axis: usize) -> usize {
        (axis + 1..self.m).map(|a| self.n(a)).product()
    }

    pub fn node(&self, idx: usize) -> Point {
        let ix = self.unflatten(idx);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.m {
            p[a] = self.coord(a, ix[a]);
        }
        p
    }

    pub fn domain(&self) -> Aabb {
        Aabb::new(self.m, self.lo, self.hi)
    }

    /// Length of the node's dual cell on one axis inside [rlo, rhi] ∩ [lo, hi].
    fn weight1d(&self, axis: usize, i: usize, rlo: f64, rhi: f64) -> f64 {
        let h = self.h(axis);
        let x = self.coord(axis, i);
        let lo = rlo.max(self.lo[axis]).max(x - 0.5 * h);
        let hi = rhi.min(self.hi[axis]).min(x + 0.5 * h);
        (hi - lo).max(0.0)
    }

    /// Quadrature weights for integrals over `region` (the whole grid box by default).
    pub fn weights(&self, region: Option<&Aabb>) -> Result<Vec<f64>> {
        let dom = self.domain();
        let r = region.unwrap_or(&dom);
        for a in 0..self.m {
            if r.lo[a] < self.lo[a] - 1e-12 || r.hi[a] > self.hi[a] + 1e-12 {
                return arg(format!(
                    "integration region [{}, {}] on axis {a} leaves the grid domain [{}, {}]",
                    r.lo[a], r.hi[a], self.lo[a], self.hi[a]
                ));
            }
        }
        let w1: Vec<Vec<f64>> = (0..self.m)
            .map(|a| (0..self.n(a)).map(|i| self.weight1d(a, i, r.lo[a], r.hi[a])).collect())
            .collect();
        Ok((0..self.len())
            .map(|idx| {
                let ix = self.unflatten(idx);
                (0..self.m).map(|a| w1[a][ix[a]]).product()
            })
            .collect())
    }
}

/// Samples of a map Q^m → ℝ^ν on a grid, with the analytic source when known.
#[derive(Clone)]
pub struct GridField {
    pub spec: GridSpec,
    pub nu: usize,
    pub data: Vec<f64>,
    pub source: Option<Arc<dyn Mapping>>,
}

impl std::fmt::Debug for GridField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridField")
            .field("spec", &self.spec)
            .field("nu", &self.nu)
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

pub fn sample_field(expr: Arc<dyn Mapping>, spec: &GridSpec) -> Result<GridField> {
    if (0..spec.m).any(|a| spec.res[a] < 4) {
        return arg("sampling needs at least 4 cells per axis");
    }
    if expr.dim_in() != spec.m {
        return arg(format!("map has {} inputs, grid has dimension {}", expr.dim_in(), spec.m));
    }
    let nu = expr.dim_out();
    let rows: Vec<Result<Point>> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let x = spec.node(idx);
            let bad = |why: String| Error::Sampling(format!("node {:?} at {:?}: {why}", spec.unflatten(idx), &x[..spec.m]));
            let y = expr.eval(&x).map_err(|e| bad(e.to_string()))?;
            if y[..nu].iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite value".into()));
            }
            Ok(y)
        })
        .collect();
    let mut data = Vec::with_capacity(spec.len() * nu);
    for r in rows {
        data.extend_from_slice(&r?[..nu]);
    }
    Ok(GridField { spec: spec.clone(), nu, data, source: Some(expr) })
}

impl GridField {
    pub fn from_data(spec: GridSpec, nu: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != spec.len() * nu {
            return arg("sample count does not match the grid");
        }
        Ok(GridField { spec, nu, data, source: None })
    }

    pub fn value(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.nu..(idx + 1) * self.nu]
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        if self.spec != other.spec || self.nu != other.nu {
            return arg("fields live on different grids");
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(GridField { spec: self.spec.clone(), nu: self.nu, data, source: None })
    }

    /// Evaluates at an arbitrary point: the analytic source if present, else the interpolant.
    pub fn at(&self, x: &Point) -> Result<Point> {
        match &self.source {
            Some(s) => s.eval(x),
            None => interpolate(self, x),
        }
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Text header (m, ν, resolution, domain) followed by little-endian f64 samples.
    pub fn dump(&self, w: &mut impl std::io::Write) -> Result<()> {
        let s = &self.spec;
        writeln!(w, "m {}", s.m)?;
        writeln!(w, "nu {}", self.nu)?;
        writeln!(w, "resolution {}", (0..s.m).map(|a| s.res[a].to_string()).collect::<Vec<_>>().join(" "))?;
        writeln!(
            w,
            "domain {}",
            (0..s.m).map(|a| format!("{} {}", s.lo[a], s.hi[a])).collect::<Vec<_>>().join(" ")
        )?;
        writeln!(w, "offset {}", s.offset as u8)?;
        writeln!(w, "end")?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Tensor cubic Lagrange interpolation of grid samples, usable on jets.
pub struct Interpolant<'a>(pub &'a GridField);

impl GenericMap for Interpolant<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.0.spec.m, self.0.nu)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        interpolate_generic(self.0, x)
    }
}

pub fn interpolate(f: &GridField, x: &Point) -> Result<Point> {
    interpolate_generic(f, x)
}

fn interpolate_generic<S: Scalar>(f: &GridField, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
    let s = &f.spec;
    let mut base = [0usize; MAX_DIM];
    let mut w = [[S::cst(0.0); 4]; MAX_DIM];
    for a in 0..s.m {
        let n = s.n(a);
        if n < 4 {
            return arg("interpolation needs at least 4 nodes per axis");
        }
        let h = s.h(a);
        let x0 = s.coord(a, 0);
        let t = (x[a] - x0) / h;
        let tv = t.value();
        if tv < -0.5 || tv > (n - 1) as f64 + 0.5 {
            return Err(Error::Padding(format!(
                "point {:e} on axis {a} is outside the sampled domain; enlarge the padding (dilation) of the input",
                x[a].value()
            )));
        }
        let i0 = ((tv.floor() as i64) - 1).clamp(0, n as i64 - 4) as usize;
        base[a] = i0;
        for j in 0..4 {
            let mut l = S::cst(1.0);
            for k in 0..4 {
                if k != j {
                    l = l * (t - (i0 + k) as f64) / (j as f64 - k as f64);
                }
            }
            w[a][j] = l;
        }
    }
    let mut out = [S::cst(0.0); MAX_DIM];
    let total = 4usize.pow(s.m as u32);
    for t in 0..total {
        let mut ix = [0usize; MAX_DIM];
        let mut r = t;
        let mut wt = S::cst(1.0);
        for a in 0..s.m {
            let j = r % 4;
            r /= 4;
            ix[a] = base[a] + j;
            wt = wt * w[a][j];
        }
        let v = f.value(s.flatten(&ix));
        for c in 0..f.nu {
            out[c] = out[c] + wt * v[c];
        }
    }
    Ok(out)
}

/// First derivative along `axis`: central differences inside, one-sided 3-point stencils at the ends.
pub fn diff(spec: &GridSpec, nu: usize, data: &[f64], axis: usize) -> Vec<f64> {
    let n = spec.n(axis);
    let st = spec.stride(axis) * nu;
    let h = spec.h(axis);
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(nu).enumerate().for_each(|(idx, o)| {
        let i = spec.unflatten(idx)[axis];
        let b = idx * nu;
        for c in 0..nu {
            let f = |k: i64| data[(b as i64 + k * st as i64) as usize + c];
            o[c] = if i == 0 {
                (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h)
            } else {
                (f(1) - f(-1)) / (2.0 * h)
            };
        }
    });
    out
}

/// Pure second derivative: 3-point inside, 4-point one-sided at the ends.
pub fn diff2(spec: &GridSpec, nu: usize, data: &[f64], axis: usize) -> Vec<f64> {
    let n = spec.n(axis);
    let st = spec.stride(axis) * nu;
    let h2 = spec.h(axis).powi(2);
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(nu).enumerate().for_each(|(idx, o)| {
        let i = spec.unflatten(idx)[axis];
        let b = idx * nu;
        for c in 0..nu {
            let f = |k: i64| data[(b as i64 + k * st as i64) as usize + c];
            o[c] = if i == 0 {
                (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2
            } else if i == n - 1 {
                (2.0 * f(0) - 5.0 * f(-1) + 4.0 * f(-2) - f(-3)) / h2
            } else {
                (f(1) - 2.0 * f(0) + f(-1)) / h2
            };
        }
    });
    out
}

/// Pointwise Frobenius norms of D^j for j = 0..=k (k ≤ 2).
pub fn derivative_norms(f: &GridField, k: usize) -> Result<Vec<Vec<f64>>> {
    let s = &f.spec;
    if k > 2 {
        return arg(format!("derivatives of order {k} are not supported (maximum 2)"));
    }
    if (0..s.m).any(|a| s.res[a] < k + 2) {
        return arg(format!("resolution too coarse for derivatives of order {k}"));
    }
    let nodes = s.len();
    let nu = f.nu;
    let mut out = vec![];
    let norm0: Vec<f64> = (0..nodes).map(|i| crate::jet::norm(f.value(i))).collect();
    out.push(norm0);
    if k >= 1 {
        let mut sq = vec![0.0; nodes];
        let d1: Vec<Vec<f64>> = (0..s.m).map(|a| diff(s, nu, &f.data, a)).collect();
        for d in &d1 {
            for (i, v) in sq.iter_mut().enumerate() {
                *v += d[i * nu..(i + 1) * nu].iter().map(|x| x * x).sum::<f64>();
            }
        }
        out.push(sq.iter().map(|v| v.sqrt()).collect());
        if k >= 2 {
            let mut sq2 = vec![0.0; nodes];
            for a in 0..s.m {
                for b in a..s.m {
                    let d = if a == b { diff2(s, nu, &f.data, a) } else { diff(s, nu, &d1[b], a) };
                    let mult = if a == b { 1.0 } else { 2.0 };
                    for (i, v) in sq2.iter_mut().enumerate() {
                        *v += mult * d[i * nu..(i + 1) * nu].iter().map(|x| x * x).sum::<f64>();
                    }
                }
            }
            out.push(sq2.iter().map(|v| v.sqrt()).collect());
        }
    }
    Ok(out)
}

/// Weighted L^q norm of pointwise values.
pub fn weighted_norm(vals: &[f64], weights: &[f64], q: f64) -> f64 {
    let s: f64 = vals.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(v, w)| w * v.abs().powf(q)).sum();
    s.powf(1.0 / q)
}

/// L^q norm of |u| (Euclidean in the values) over a region of the grid.
pub fn lebesgue_norm(u: &GridField, q: f64, region: Option<&Aabb>) -> Result<f64> {
    if !(q >= 1.0) {
        return arg(format!("Lebesgue exponent q = {q} must be at least 1"));
    }
    let w = u.spec.weights(region)?;
    let vals: Vec<f64> = (0..u.spec.len()).map(|i| crate::jet::norm(u.value(i))).collect();
    Ok(weighted_norm(&vals, &w, q))
}

/// ‖w‖_p, ‖Dw‖_p, …, ‖D^k w‖_p on the grid.
pub fn sobolev_terms(w: &GridField, k: usize, p: f64, region: Option<&Aabb>) -> Result<Vec<f64>> {
    if !(p >= 1.0) {
        return arg(format!("exponent p = {p} must be at least 1"));
    }
    let wt = w.spec.weights(region)?;
    Ok(derivative_norms(w, k)?.iter().map(|v| weighted_norm(v, &wt, p)).collect())
}

/// d(u, v) = ‖u − v‖_p + Σ_{i ≤ k} ‖D^i u − D^i v‖_p through the finite-difference proxy.
pub fn sobolev_distance(u: &GridField, v: &GridField, k: usize, p: f64) -> Result<f64> {
    Ok(sobolev_terms(&u.sub(v)?, k, p, None)?.iter().sum())
}

/// (1/|Q_r|²) ∫∫ |u(x) − u(y)| over Q_r(a) by product midpoint quadrature with `n` nodes per axis.
pub fn mean_oscillation(u: &dyn Mapping, domain: &Aabb, a: &Point, r: f64, n: usize) -> Result<f64> {
    let m = u.dim_in();
    let cube = Aabb::around(m, a, &vec![r; m]);
    for i in 0..m {
        if cube.lo[i] < domain.lo[i] - 1e-12 || cube.hi[i] > domain.hi[i] + 1e-12 {
            return arg("oscillation cube is not contained in the domain");
        }
    }
    let spec = GridSpec::from_box(&cube, n, true);
    let count = n.pow(m as u32);
    let mut vals = Vec::with_capacity(count);
    for idx in 0..spec.len() {
        let ix = spec.unflatten(idx);
        if (0..m).any(|k| ix[k] == n) {
            continue;
        }
        vals.push(u.eval(&spec.node(idx))?);
    }
    let nu = u.dim_out();
    let total: f64 = vals
        .par_iter()
        .map(|x| vals.iter().map(|y| crate::jet::norm(&(0..nu).map(|c| x[c] - y[c]).collect::<Vec<_>>())).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / (count as f64 * count as f64))
}

/// Jets of a map at every node, reduced to pointwise derivative norms.
pub fn jet_norms(map: &dyn Mapping, x: &Point) -> Result<(Point, f64, f64)> {
    let y = map.eval_jet(&Jet2::seed(x))?;
    let m = map.dim_in();
    let (mut d1, mut d2) = (0.0, 0.0);
    for c in 0..map.dim_out() {
        for a in 0..m {
            d1 += y[c].g[a] * y[c].g[a];
            for b in 0..m {
                d2 += y[c].h[a][b] * y[c].h[a][b];
            }
        }
    }
    Ok((std::array::from_fn(|i| y[i].v), d1.sqrt(), d2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{Affine, Identity};

    struct Const(usize, f64);
    impl GenericMap for Const {
        fn dims(&self) -> (usize, usize) {
            (self.0, 1)
        }
        fn apply<S: Scalar>(&self, _x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
            let mut o = [S::cst(0.0); MAX_DIM];
            o[0] = S::cst(self.1);
            Ok(o)
        }
    }

    #[test]
    fn identity_nodes() {
        let f = sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 4, false)).unwrap();
        assert_eq!(f.data, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let c = sample_field(Arc::new(Const(2, 3.0)), &GridSpec::cube(2, 1.0, 4, false)).unwrap();
        assert!(c.data.iter().all(|&v| v == 3.0));
        assert!(sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 3, false)).is_err());
    }

    #[test]
    fn closed_form_norms() {
        let one = sample_field(Arc::new(Const(1, 1.0)), &GridSpec::cube(1, 1.0, 64, false)).unwrap();
        assert!((lebesgue_norm(&one, 1.0, None).unwrap() - 2.0).abs() < 1e-14);
        let x = sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 2048, true)).unwrap();
        assert!((lebesgue_norm(&x, 2.0, None).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn sobolev_distance_closed_forms() {
        let spec = GridSpec::cube(1, 1.0, 256, false);
        let a = sample_field(Arc::new(Const(1, 0.7)), &spec).unwrap();
        let b = sample_field(Arc::new(Const(1, 0.2)), &spec).unwrap();
        assert!((sobolev_distance(&a, &b, 1, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(sobolev_distance(&a, &a, 2, 1.5).unwrap(), 0.0);
        let x = sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 4096, true)).unwrap();
        let z = sample_field(Arc::new(Affine::scaling(1, 0.0)), &GridSpec::cube(1, 1.0, 4096, true)).unwrap();
        let d = sobolev_distance(&x, &z, 1, 2.0).unwrap();
        assert!((d - ((2.0f64 / 3.0).sqrt() + 2.0f64.sqrt())).abs() < 1e-3);
        let coarse = sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 4, false)).unwrap();
        assert!(sobolev_terms(&coarse, 2, 1.0, None).is_ok());
    }

    #[test]
    fn finite_differences_converge_at_second_order() {
        struct Wave;
        impl GenericMap for Wave {
            fn dims(&self) -> (usize, usize) {
                (2, 1)
            }
            fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
                let mut o = [S::cst(0.0); MAX_DIM];
                o[0] = (x[0] * 2.0).sin() * x[1].cos();
                Ok(o)
            }
        }
        let err = |res: usize| {
            let f = sample_field(Arc::new(Wave), &GridSpec::cube(2, 1.0, res, true)).unwrap();
            let n = derivative_norms(&f, 2).unwrap();
            let mut e: f64 = 0.0;
            for idx in 0..f.spec.len() {
                let (_, d1, d2) = jet_norms(&Wave, &f.spec.node(idx)).unwrap();
                e = e.max((n[1][idx] - d1).abs()).max((n[2][idx] - d2).abs() / 10.0);
            }
            e
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        struct Cubic;
        impl GenericMap for Cubic {
            fn dims(&self) -> (usize, usize) {
                (2, 1)
            }
            fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
                let mut o = [S::cst(0.0); MAX_DIM];
                o[0] = x[0] * x[0] * x[0] - x[0] * x[1] * 2.0 + x[1] * x[1] * x[1] * 0.5;
                Ok(o)
            }
        }
        let mut f = sample_field(Arc::new(Cubic), &GridSpec::cube(2, 1.0, 8, true)).unwrap();
        f.source = None;
        for x in [[0.13, -0.77, 0.0, 0.0], [0.9, 0.95, 0.0, 0.0]] {
            let v = f.at(&x).unwrap()[0];
            let e = Cubic.apply(&x).unwrap()[0];
            assert!((v - e).abs() < 1e-12);
        }
        assert!(matches!(f.at(&[3.0, 0.0, 0.0, 0.0]), Err(Error::Padding(_))));
    }

    #[test]
    fn mean_oscillation_of_linear_map() {
        let dom = Aabb::around(1, &[0.0; 4], &[1.0]);
        let r = 0.5;
        let mo = mean_oscillation(&Identity(1), &dom, &[0.0; 4], r, 400).unwrap();
        assert!((mo - 2.0 * r / 3.0).abs() < 1e-5);
        let c = mean_oscillation(&Const(1, 2.0), &dom, &[0.0; 4], r, 20).unwrap();
        assert_eq!(c, 0.0);
        assert!(mean_oscillation(&Identity(1), &dom, &[0.8; 4], r, 20).is_err());
    }

    #[test]
    fn region_outside_domain_is_rejected() {
        let one = sample_field(Arc::new(Const(1, 1.0)), &GridSpec::cube(1, 1.0, 8, false)).unwrap();
        let r = Aabb::around(1, &[0.0; 4], &[2.0]);
        assert!(lebesgue_norm(&one, 1.0, Some(&r)).is_err());
    }

    #[test]
    fn dump_has_header_and_payload() {
        let f = sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 4, false)).unwrap();
        let mut buf = vec![];
        f.dump(&mut buf).unwrap();
        let text_end = buf.windows(4).position(|w| w == b"end\n").unwrap() + 4;
        assert_eq!(buf.len() - text_end, 5 * 8);
        assert_eq!(f64::from_le_bytes(buf[text_end..text_end + 8].try_into().unwrap()), -1.0);
    }
}
