//! Variable-width mollification, translations and composition of fields.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{arg, Error, Result};
use crate::field::quadrature::gauss_legendre;
use crate::field::{diff, sample_field, GridField, GridSpec};
use crate::jet::{Point, Scalar, MAX_DIM};
use crate::map::{dispatch, Compose, GenericMap, Mapping};

/// Radial bump exp(1/(|z|² − 1)) on the unit ball, normalized to unit integral.
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub m: usize,
    pub scale: f64,
}

impl Mollifier {
    pub fn new(m: usize) -> Self {
        let sphere = match m {
            1 => 2.0,
            2 => 2.0 * std::f64::consts::PI,
            3 => 4.0 * std::f64::consts::PI,
            _ => 2.0 * std::f64::consts::PI.powi(2),
        };
        let gl = gauss_legendre(20);
        let panels = 200;
        let mut radial = 0.0;
        for k in 0..panels {
            let (lo, hi) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for &(x, w) in &gl {
                let t = c + r * x;
                radial += w * r * (1.0 / (t * t - 1.0)).exp() * t.powi(m as i32 - 1);
            }
        }
        Mollifier { m, scale: 1.0 / (sphere * radial) }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        if r2 >= 1.0 {
            0.0
        } else {
            self.scale * (1.0 / (r2 - 1.0)).exp()
        }
    }
}

/// Discrete rule ∫_{B_1} φ(z) g(z) dz ≈ Σ w_q g(z_q) on the midpoints of an n^m grid inside the ball.
#[derive(Clone, Debug)]
pub struct BallRule {
    pub m: usize,
    pub nodes: Vec<(Point, f64)>,
}

impl BallRule {
    pub fn new(m: usize, n: usize) -> Self {
        let phi = Mollifier::new(m);
        let mut nodes = Vec::new();
        let total = n.pow(m as u32);
        for t in 0..total {
            let mut r = t;
            let mut z = [0.0; MAX_DIM];
            for zi in z.iter_mut().take(m) {
                *zi = -1.0 + (2.0 * (r % n) as f64 + 1.0) / n as f64;
                r /= n;
            }
            let w = phi.eval(&z[..m]);
            if w > 0.0 {
                nodes.push((z, w));
            }
        }
        let s: f64 = nodes.iter().map(|p| p.1).sum();
        for p in &mut nodes {
            p.1 /= s;
        }
        BallRule { m, nodes }
    }

    pub fn standard(m: usize) -> Self {
        BallRule::new(m, 5)
    }
}

/// x ↦ Σ_q w_q u(x + ψ(x) z_q), the variable-width convolution φ_ψ ∗ u.
#[derive(Clone)]
pub struct Smoothed {
    pub inner: Arc<dyn Mapping>,
    pub psi: Arc<dyn Mapping>,
    pub rule: Arc<BallRule>,
}

impl GenericMap for Smoothed {
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_in(), self.inner.dim_out())
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let m = self.inner.dim_in();
        let s = dispatch(self.psi.as_ref(), x)?[0];
        if s.value() == 0.0 {
            return dispatch(self.inner.as_ref(), x);
        }
        let mut out = [S::cst(0.0); MAX_DIM];
        for (z, w) in &self.rule.nodes {
            let mut y = *x;
            for a in 0..m {
                y[a] = x[a] + s * z[a];
            }
            let v = dispatch(self.inner.as_ref(), &y)?;
            for c in 0..MAX_DIM {
                out[c] = out[c] + v[c] * *w;
            }
        }
        Ok(out)
    }
}

/// x ↦ u(x + ψ(x) v).
#[derive(Clone)]
pub struct Translated {
    pub inner: Arc<dyn Mapping>,
    pub psi: Arc<dyn Mapping>,
    pub v: Point,
}

impl GenericMap for Translated {
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_in(), self.inner.dim_out())
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let s = dispatch(self.psi.as_ref(), x)?[0];
        let mut y = *x;
        for a in 0..self.inner.dim_in() {
            y[a] = x[a] + s * self.v[a];
        }
        dispatch(self.inner.as_ref(), &y)
    }
}

/// Samples of an interpolated field presented as a map.
struct Sampled(GridField);

impl GenericMap for Sampled {
    fn dims(&self) -> (usize, usize) {
        (self.0.spec.m, self.0.nu)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        crate::field::Interpolant(&self.0).apply(x)
    }
}

fn as_map(u: &GridField) -> Arc<dyn Mapping> {
    match &u.source {
        Some(s) => s.clone(),
        None => Arc::new(Sampled(u.clone())),
    }
}

/// max |Dψ| over the grid nodes by finite differences.
pub fn slope_bound(psi: &dyn Mapping, spec: &GridSpec) -> Result<f64> {
    let vals: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|i| psi.eval(&spec.node(i)).map(|v| v[0]))
        .collect::<Result<_>>()?;
    let mut sq = vec![0.0; vals.len()];
    for a in 0..spec.m {
        for (s, d) in sq.iter_mut().zip(diff(spec, 1, &vals, a)) {
            *s += d * d;
        }
    }
    Ok(sq.iter().fold(0.0f64, |a, &b| a.max(b.sqrt())))
}

fn check_padding(u: &GridField, psi: &dyn Mapping) -> Result<()> {
    if u.source.is_some() {
        return Ok(());
    }
    let s = &u.spec;
    for idx in 0..s.len() {
        let x = s.node(idx);
        let r = psi.eval(&x)?[0];
        for a in 0..s.m {
            let (lo, hi) = (s.coord(a, 0), s.coord(a, s.n(a) - 1));
            if x[a] - r < lo - 1e-12 || x[a] + r > hi + 1e-12 {
                return Err(Error::Padding(format!(
                    "ball of radius {r} at node {:?} leaves the sampled domain; sample the dilated input on a larger cube",
                    &x[..s.m]
                )));
            }
        }
    }
    Ok(())
}

pub fn adaptive_convolve(u: &GridField, psi: Arc<dyn Mapping>, rule: Arc<BallRule>) -> Result<GridField> {
    if psi.eval(&u.spec.node(0))?[0] < 0.0 {
        return arg("convolution width must be nonnegative");
    }
    let slope = slope_bound(psi.as_ref(), &u.spec)?;
    if slope >= 1.0 {
        return arg(format!("convolution width has slope {slope} >= 1"));
    }
    check_padding(u, psi.as_ref())?;
    let map = Arc::new(Smoothed { inner: as_map(u), psi, rule });
    resample(u, map)
}

pub fn translate_field(u: &GridField, psi: Arc<dyn Mapping>, v: Point) -> Result<GridField> {
    if crate::jet::norm(&v[..u.spec.m]) > 1.0 {
        return arg("translation direction must lie in the unit ball");
    }
    check_padding(u, psi.as_ref())?;
    let map = Arc::new(Translated { inner: as_map(u), psi, v });
    resample(u, map)
}

fn resample(u: &GridField, map: Arc<dyn Mapping>) -> Result<GridField> {
    let analytic = u.source.is_some();
    let mut f = sample_field(map, &u.spec)?;
    if !analytic {
        f.source = None;
    }
    Ok(f)
}

/// u ∘ Φ on the grid of u. Nodes on the singular set of Φ are nudged by 1e−9 h before giving up.
pub fn compose_with_map(u: &GridField, phi: Arc<dyn Mapping>) -> Result<GridField> {
    let inner = as_map(u);
    let map: Arc<dyn Mapping> = Arc::new(Compose::new(inner, phi));
    let s = &u.spec;
    let nu = u.nu;
    let h = (0..s.m).map(|a| s.h(a)).fold(f64::INFINITY, f64::min);
    let rows: Vec<Result<Point>> = (0..s.len())
        .into_par_iter()
        .map(|idx| {
            let x = s.node(idx);
            match map.eval(&x) {
                Ok(y) => Ok(y),
                Err(Error::Singular { .. }) => {
                    let mut x2 = x;
                    for (a, xi) in x2.iter_mut().enumerate().take(s.m) {
                        *xi += 1e-9 * h * (1.0 + 0.37 * a as f64);
                    }
                    map.eval(&x2).map_err(|e| {
                        Error::Sampling(format!("node {:?} stays singular after offset: {e}", &x[..s.m]))
                    })
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut data = Vec::with_capacity(s.len() * nu);
    for r in rows {
        data.extend_from_slice(&r?[..nu]);
    }
    Ok(GridField {
        spec: s.clone(),
        nu,
        data,
        source: if u.source.is_some() { Some(map) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{Affine, Identity};

    struct ConstWidth(usize, f64);
    impl GenericMap for ConstWidth {
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
    fn mollifier_is_normalized() {
        for m in 1..=4 {
            let phi = Mollifier::new(m);
            // Monte-Carlo-free check: fine midpoint rule on the cube.
            if m <= 2 {
                let n: usize = 800;
                let mut s = 0.0;
                let h = 2.0 / n as f64;
                for i in 0..n.pow(m as u32) {
                    let z: Vec<f64> = (0..m).map(|a| -1.0 + h * ((i / n.pow(a as u32)) % n) as f64 + 0.5 * h).collect();
                    s += phi.eval(&z) * h.powi(m as i32);
                }
                assert!((s - 1.0).abs() < 1e-6, "m={m} {s}");
            }
        }
    }

    #[test]
    fn ball_rule_sizes_and_symmetry() {
        assert_eq!(BallRule::standard(2).nodes.len(), 21);
        assert_eq!(BallRule::standard(3).nodes.len(), 81);
        let r = BallRule::standard(2);
        let s: f64 = r.nodes.iter().map(|p| p.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
        let mx: f64 = r.nodes.iter().map(|p| p.1 * p.0[0]).sum();
        assert!(mx.abs() < 1e-15);
    }

    #[test]
    fn convolution_identities() {
        let spec = GridSpec::cube(2, 1.0, 16, true);
        let lin = sample_field(Arc::new(Identity(2)), &spec).unwrap();
        let rule = Arc::new(BallRule::standard(2));
        let zero = adaptive_convolve(&lin, Arc::new(ConstWidth(2, 0.0)), rule.clone()).unwrap();
        assert_eq!(zero.data, lin.data);
        let c = adaptive_convolve(&lin, Arc::new(ConstWidth(2, 0.1)), rule.clone()).unwrap();
        assert!(c.max_abs_diff(&lin) < 1e-14);
        let t = translate_field(&lin, Arc::new(ConstWidth(2, 0.1)), [1.0, 0.0, 0.0, 0.0]).unwrap();
        for idx in 0..spec.len() {
            assert!((t.value(idx)[0] - lin.value(idx)[0] - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn padding_is_enforced_for_sampled_fields() {
        let spec = GridSpec::cube(2, 1.0, 16, true);
        let mut lin = sample_field(Arc::new(Identity(2)), &spec).unwrap();
        lin.source = None;
        let e = adaptive_convolve(&lin, Arc::new(ConstWidth(2, 0.3)), Arc::new(BallRule::standard(2)));
        assert!(matches!(e, Err(Error::Padding(_))));
    }

    #[test]
    fn steep_width_is_rejected() {
        struct Steep;
        impl GenericMap for Steep {
            fn dims(&self) -> (usize, usize) {
                (1, 1)
            }
            fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
                let mut o = [S::cst(0.0); MAX_DIM];
                o[0] = x[0] * 2.0 + 3.0;
                Ok(o)
            }
        }
        let lin = sample_field(Arc::new(Identity(1)), &GridSpec::cube(1, 1.0, 8, true)).unwrap();
        assert!(adaptive_convolve(&lin, Arc::new(Steep), Arc::new(BallRule::standard(1))).is_err());
    }

    #[test]
    fn composition_with_identity_and_scaling() {
        let spec = GridSpec::cube(2, 1.0, 8, true);
        let lin = sample_field(Arc::new(Identity(2)), &spec).unwrap();
        let same = compose_with_map(&lin, Arc::new(Identity(2))).unwrap();
        assert_eq!(same.data, lin.data);
        let twice = compose_with_map(&lin, Arc::new(Affine::scaling(2, 2.0))).unwrap();
        for (a, b) in twice.data.iter().zip(&lin.data) {
            assert_eq!(*a, 2.0 * b);
        }
    }
}
