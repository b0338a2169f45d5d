//! Shrinking: smooth injective maps that blow a thin tube around the dual
//! skeleton up onto a thicker one.

use std::collections::HashSet;
use std::sync::Arc;

use super::thickening::PrimalBlock;
use super::{Aabb, FaceFrame, PlateauCutoff, Profile, SmoothMap};
use crate::error::{arg, Error, Result};
use crate::geometry::Cubication;
use crate::jet::{values, Point, Scalar, MAX_DIM};
use crate::map::GenericMap;

/// Dual block Φ(x) = (φ(ζ) x', x''), ζ = sqrt(|x'|² + θ(x'')² + ετ²) with μη = 1.
#[derive(Clone, Debug)]
pub struct ShrinkDual {
    pub m: usize,
    pub l: usize,
    /// μη
    pub scale: f64,
    theta: PlateauCutoff,
    pub eps_tau2: f64,
    pub profile: Profile,
}

impl ShrinkDual {
    fn zeta<S: Scalar>(&self, x: &[S; MAX_DIM]) -> S {
        let mut prod = S::cst(1.0);
        for &v in &x[self.l..self.m] {
            prod = prod * self.theta.eval(v / self.scale);
        }
        let th = -prod + 1.0;
        let mut q = th * th + self.eps_tau2;
        for &v in &x[..self.l] {
            let w = v / self.scale;
            q = q + w * w;
        }
        q.sqrt()
    }

    fn theta_sq(&self, x: &Point) -> f64 {
        let prod: f64 = x[self.l..self.m].iter().map(|&v| self.theta.value(v / self.scale)).product();
        (1.0 - prod).powi(2)
    }

    pub fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> [S; MAX_DIM] {
        let z = self.zeta(x);
        if z.value() >= 1.0 {
            return *x;
        }
        let lam = self.profile.phi(z);
        let mut y = *x;
        for v in y.iter_mut().take(self.l) {
            *v = *v * lam;
        }
        y
    }

    /// Preimage through the monotone ray h(t) = t φ(sqrt(t² + θ² + ετ²)) = |y'|.
    pub fn inverse(&self, y: &Point) -> Result<Point> {
        let r: f64 = (y[..self.l].iter().map(|v| v * v).sum::<f64>()).sqrt() / self.scale;
        if r == 0.0 {
            return Ok(*y);
        }
        let c = self.theta_sq(y) + self.eps_tau2;
        let h = |t: f64| {
            let z = (t * t + c).sqrt();
            if z >= 1.0 {
                t
            } else {
                t * self.profile.phi(z)
            }
        };
        let (mut lo, mut hi) = (0.0, r);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * r.max(1.0) {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        let residual = (h(t) - r).abs();
        if !(residual <= 1e-11 * r.max(1.0)) {
            return Err(Error::Numeric { message: "shrinking ray solve did not converge".into(), residual });
        }
        let mut x = *y;
        for v in x.iter_mut().take(self.l) {
            *v *= t / r;
        }
        Ok(x)
    }

    /// φ^{ℓ−1} (φ (1 − |x'|²/ζ²) + (φ'ζ + φ) |x'|²/ζ²).
    pub fn jacobian(&self, x: &Point) -> f64 {
        let z = self.zeta(x);
        if z >= 1.0 {
            return 1.0;
        }
        let (g, g1, _) = self.profile.derivs(z);
        let phi = g / z;
        let r2: f64 = x[..self.l].iter().map(|v| v * v).sum::<f64>() / (self.scale * self.scale);
        let f = r2 / (z * z);
        phi.powi(self.l as i32 - 1) * (phi * (1.0 - f) + g1 * f)
    }
}

/// Φ = Φ1 ∘ Φ2 on one face block: primal inverse after the dual block.
#[derive(Clone, Debug)]
pub struct ShrinkFace {
    pub primal: PrimalBlock,
    pub dual: ShrinkDual,
}

/// (ε, b) at half their admissible maxima.
pub fn shrinking_defaults(mu_lo: f64, mu: f64) -> (f64, f64) {
    let c = mu_lo / mu;
    let eps = 0.5 * (1.0 / (c * c) - 1.0);
    let c0 = c * (1.0 + eps).sqrt();
    (eps, 0.5 * (1.0 / c0 - 1.0) * (1.0 / c0).ln())
}

impl ShrinkFace {
    #[allow(clippy::too_many_arguments)]
    pub fn new(m: usize, l: usize, eta: f64, mu_lo: f64, mu: f64, mu_hi: f64, tau: f64, eps: Option<f64>, b: Option<f64>) -> Result<Self> {
        if !(0.0 < mu_lo && mu_lo < mu && mu < mu_hi && mu_hi < 1.0) {
            return arg(format!("shrinking radii need 0 < mu_lo < mu < mu_hi < 1, got {mu_lo}, {mu}, {mu_hi}"));
        }
        if l == 0 || l > m || m > MAX_DIM {
            return arg(format!("shrinking block needs 1 <= l <= m, got l = {l}, m = {m}"));
        }
        let c = mu_lo / mu;
        if !(tau > 0.0 && tau < c) {
            return arg(format!("tau = {tau} must lie in (0, mu_lo / mu) = (0, {c})"));
        }
        let (e0, _) = shrinking_defaults(mu_lo, mu);
        let eps = eps.unwrap_or(e0);
        let c0 = c * (1.0 + eps).sqrt();
        if !(eps > 0.0 && c0 < 1.0) {
            return arg(format!("epsilon = {eps} violates (mu_lo / mu) sqrt(1 + epsilon) < 1"));
        }
        let bmax = (1.0 / c0 - 1.0) * (1.0 / c0).ln();
        let b = b.unwrap_or(0.5 * bmax);
        if !(b > 0.0 && b < bmax) {
            return arg(format!("b = {b} violates c (1 + b / ln(1/c)) < 1 with c = {c0} (needs 0 < b < {bmax})"));
        }
        let scale = mu * eta;
        let profile = Profile::new(c0, b, tau * (1.0 + eps).sqrt(), 1.0)?;
        let theta = PlateauCutoff { a: (1.0 - mu_hi) / mu, b: (1.0 - mu) / mu };
        let dual = ShrinkDual { m, l, scale, theta, eps_tau2: eps * tau * tau, profile };
        let psi = PlateauCutoff { a: mu_lo * eta, b: mu * eta };
        let theta_p = PlateauCutoff { a: (1.0 - mu_hi) * eta, b: (1.0 - mu) * eta };
        let alpha = 1.0 - 1.0 / (l as f64).sqrt();
        Ok(ShrinkFace { primal: PrimalBlock::with_cutoffs(m, l, eta, alpha, psi, theta_p), dual })
    }

    pub fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        self.primal.inverse(&self.dual.apply(x))
    }

    pub fn inverse(&self, y: &Point) -> Result<Point> {
        self.dual.inverse(&self.primal.forward(y))
    }

    pub fn jacobian(&self, x: &Point) -> Result<f64> {
        let y = self.dual.apply(x);
        let z = self.primal.inverse(&y)?;
        Ok(self.dual.jacobian(x) / self.primal.forward_jacobian(&z))
    }
}

struct FaceMap(ShrinkFace, usize);

impl GenericMap for FaceMap {
    fn dims(&self) -> (usize, usize) {
        (self.1, self.1)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        self.0.apply(x)
    }
    fn closed_jacobian(&self, x: &Point) -> Option<Result<f64>> {
        Some(self.0.jacobian(x))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn shrinking_face_map(m: usize, l: usize, eta: f64, mu_lo: f64, mu: f64, mu_hi: f64, tau: f64, eps: Option<f64>, b: Option<f64>) -> Result<SmoothMap> {
    let f = ShrinkFace::new(m, l, eta, mu_lo, mu, mu_hi, tau, eps, b)?;
    let half: Vec<f64> = (0..m).map(|a| if a < l { mu * eta } else { (1.0 - mu) * eta }).collect();
    let params = vec![
        ("l".into(), l as f64),
        ("eta".into(), eta),
        ("mu_lo".into(), mu_lo),
        ("mu".into(), mu),
        ("mu_hi".into(), mu_hi),
        ("tau".into(), tau),
        ("epsilon".into(), f.dual.eps_tau2 / (tau * tau)),
        ("b".into(), f.dual.profile.b),
        ("alpha".into(), f.primal.alpha),
    ];
    Ok(SmoothMap {
        name: "shrinking-face".into(),
        m,
        map: Arc::new(FaceMap(f, m)),
        support: vec![Aabb::around(m, &[0.0; MAX_DIM], &half)],
        singular: vec![],
        params,
    })
}

/// μ_ℓ = μ < ν_{ℓ+1} < μ_{ℓ+1} < … < ν_m < μ_m = 2μ, equispaced.
pub fn shrinking_ladder(mu: f64, m: usize, l: usize) -> Vec<f64> {
    let n = 2 * (m - l);
    (0..=n).map(|k| mu * (1.0 + k as f64 / n as f64)).collect()
}

#[derive(Clone, Debug)]
struct ShLevel {
    dim: usize,
    nu: f64,
    block: ShrinkFace,
    /// `None` means every face of the cubication
    faces: Option<HashSet<[i64; MAX_DIM]>>,
}

/// Φ_ℓ = Ψ_{ℓ+1} ∘ … ∘ Ψ_m, Ψ_m applied first.
#[derive(Clone, Debug)]
pub struct ShrinkingMap {
    pub cub: Cubication,
    pub l: usize,
    pub mu: f64,
    pub tau: f64,
    levels: Vec<ShLevel>,
}

impl ShrinkingMap {
    fn frame(&self, level: &ShLevel, y: &Point) -> Option<FaceFrame> {
        let m = self.cub.m;
        let t = self.cub.to_lattice_units(y);
        let mut key = [0i64; MAX_DIM];
        let mut spanned = [false; MAX_DIM];
        let mut count = 0;
        for a in 0..m {
            let o = 2.0 * (0.5 * (t[a] - 1.0)).round() + 1.0;
            if (t[a] - o).abs() < level.nu {
                key[a] = o as i64;
                spanned[a] = true;
                count += 1;
            } else {
                key[a] = (2.0 * (0.5 * t[a]).round()) as i64;
            }
        }
        if count != level.dim {
            return None;
        }
        if let Some(faces) = &level.faces {
            if !faces.contains(&key) {
                return None;
            }
        }
        Some(FaceFrame::new(m, self.cub.lattice_to_point(&key), &spanned))
    }

    /// Φ^{-1}(y), inverting the levels in reverse order.
    pub fn inverse(&self, y: &Point) -> Result<Point> {
        let mut x = *y;
        for level in self.levels.iter().rev() {
            if let Some(fr) = self.frame(level, &x) {
                x = fr.from_local(&level.block.inverse(&fr.to_local(&x))?);
            }
        }
        Ok(x)
    }

    pub fn jacobian(&self, x: &Point) -> Result<f64> {
        let mut y = *x;
        let mut jac = 1.0;
        for level in &self.levels {
            if let Some(fr) = self.frame(level, &y) {
                let local = fr.to_local(&y);
                jac *= level.block.jacobian(&local)?;
                y = fr.from_local(&level.block.apply(&local)?);
            }
        }
        Ok(jac)
    }
}

impl GenericMap for ShrinkingMap {
    fn dims(&self) -> (usize, usize) {
        (self.cub.m, self.cub.m)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut y = *x;
        for level in &self.levels {
            if let Some(fr) = self.frame(level, &values(&y)) {
                y = fr.from_local(&level.block.apply(&fr.to_local(&y))?);
            }
        }
        Ok(y)
    }
    fn closed_jacobian(&self, x: &Point) -> Option<Result<f64>> {
        Some(self.jacobian(x))
    }
}

pub fn build_shrinking(c: &Cubication, l: usize, mu: f64, tau: f64, scope: Option<&[[i64; MAX_DIM]]>) -> Result<ShrinkingMap> {
    let m = c.m;
    if l + 1 > m {
        return arg(format!("shrinking needs l <= m - 1, got l = {l}, m = {m}"));
    }
    if !(mu > 0.0 && mu < 0.5) {
        return arg(format!("mu = {mu} must lie in (0, 1/2)"));
    }
    if !(tau > 0.0 && tau < 0.5) {
        return arg(format!("tau = {tau} must lie in (0, 1/2)"));
    }
    let ladder = shrinking_ladder(mu, m, l);
    let mut levels = Vec::new();
    for i in (l + 1..=m).rev() {
        let e = 2 * (i - l);
        let (mu_lo, nu, mu_hi) = (ladder[e - 2], ladder[e - 1], ladder[e]);
        let block = ShrinkFace::new(m, i, c.eta, mu_lo, nu, mu_hi, tau * mu / nu, None, None)?;
        let faces = scope.map(|cells| c.faces_of_cells(cells, i).into_iter().map(|f| f.lattice).collect());
        levels.push(ShLevel { dim: i, nu, block, faces });
    }
    Ok(ShrinkingMap { cub: c.clone(), l, mu, tau, levels })
}

pub fn shrinking_global_map(c: &Cubication, l: usize, mu: f64, tau: f64, scope: Option<&[[i64; MAX_DIM]]>) -> Result<SmoothMap> {
    let sm = build_shrinking(c, l, mu, tau, scope)?;
    let m = c.m;
    let dual = match scope {
        Some(cells) => c.dual_faces_of_cells(cells, l)?,
        None => c.dual_skeleton(l)?.faces,
    };
    let support = dual.iter().map(|f| Aabb::face_nbhd(f, 2.0 * mu * c.eta)).collect();
    let mut params = vec![("l".into(), l as f64), ("eta".into(), c.eta), ("mu".into(), mu), ("tau".into(), tau)];
    for (k, v) in shrinking_ladder(mu, m, l).iter().enumerate() {
        params.push((format!("ladder{k}"), *v));
    }
    Ok(SmoothMap { name: "shrinking".into(), m, map: Arc::new(sm), support, singular: vec![], params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::Mapping;

    #[test]
    fn identity_outside_block() {
        let f = shrinking_face_map(2, 1, 1.0, 0.1, 0.2, 0.3, 0.1, None, None).unwrap();
        for x in [[0.25, 0.0, 0.0, 0.0], [0.0, 0.85, 0.0, 0.0], [-0.3, -0.9, 0.0, 0.0]] {
            assert_eq!(f.eval(&x).unwrap(), x);
        }
        assert!(shrinking_face_map(2, 1, 1.0, 0.1, 0.2, 0.3, 0.6, None, None).is_err());
    }

    #[test]
    fn face_inverse_round_trip() {
        let f = ShrinkFace::new(3, 2, 1.0, 0.1, 0.2, 0.3, 0.1, None, None).unwrap();
        for i in 0..50 {
            let t = i as f64 / 50.0;
            let y = [0.1 * (7.0 * t).sin(), 0.1 * (3.0 * t).cos(), 0.7 * (5.0 * t).sin(), 0.0];
            let x = f.inverse(&y).unwrap();
            let back = f.apply(&x).unwrap();
            for a in 0..3 {
                assert!((back[a] - y[a]).abs() < 1e-10, "{back:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn jacobian_formula_matches_determinant() {
        let f = shrinking_face_map(3, 2, 1.0, 0.1, 0.2, 0.3, 0.1, None, None).unwrap();
        for x in [[0.01, 0.005, 0.3, 0.0], [0.05, -0.1, 0.1, 0.0], [0.15, 0.02, -0.75, 0.0]] {
            let j = crate::smoothmap::jet_eval(&f, &x, 1).unwrap();
            let closed = f.jacobian(&x).unwrap().unwrap();
            assert!((j.jacobian - closed).abs() < 1e-9 * closed.abs().max(1.0), "{} vs {closed}", j.jacobian);
        }
    }
}
