//! Thickening: primal and dual block maps, their composition on a face block and
//! the global map pushing a union of cubes onto a neighborhood of a lower skeleton.

use std::collections::HashSet;
use std::sync::Arc;

use super::{Aabb, FaceFrame, PlateauCutoff, Profile, SmoothMap};
use crate::error::{arg, Error, Result};
use crate::geometry::Cubication;
use crate::jet::{values, Jet2, Point, Scalar, MAX_DIM};
use crate::map::GenericMap;

fn check_order(rho_lo: f64, rho: f64, rho_hi: f64) -> Result<()> {
    if !(0.0 < rho_lo && rho_lo < rho && rho < rho_hi && rho_hi < 1.0) {
        return arg(format!(
            "thickening radii need 0 < rho_lo < rho < rho_hi < 1, got {rho_lo}, {rho}, {rho_hi}"
        ));
    }
    Ok(())
}

/// Ψ(x) = ((1 − αφ(x)) x', x'') in local coordinates, x' the first ℓ slots.
#[derive(Clone, Debug)]
pub struct PrimalBlock {
    pub m: usize,
    pub l: usize,
    pub eta: f64,
    pub alpha: f64,
    psi: PlateauCutoff,
    theta: PlateauCutoff,
}

impl PrimalBlock {
    pub fn new(m: usize, l: usize, eta: f64, rho_lo: f64, rho: f64, rho_hi: f64, kappa: f64) -> Result<Self> {
        check_order(rho_lo, rho, rho_hi)?;
        if !(kappa > 0.0 && kappa <= 1.0 - rho_hi) {
            return arg(format!("kappa = {kappa} must lie in (0, 1 - rho_hi] = (0, {}]", 1.0 - rho_hi));
        }
        if l == 0 || l > m || m > MAX_DIM {
            return arg(format!("primal block needs 1 <= l <= m, got l = {l}, m = {m}"));
        }
        Ok(PrimalBlock {
            m,
            l,
            eta,
            alpha: 1.0 - kappa / (1.0 - rho_hi),
            psi: PlateauCutoff { a: (1.0 - rho_hi) * eta, b: (1.0 - rho) * eta },
            theta: PlateauCutoff { a: rho_lo * eta, b: rho * eta },
        })
    }

    fn phi<S: Scalar>(&self, x: &[S; MAX_DIM]) -> S {
        let mut f = S::cst(1.0);
        for a in 0..self.m {
            f = f * if a < self.l { self.psi.eval(x[a]) } else { self.theta.eval(x[a]) };
            if f.value() == 0.0 {
                return S::cst(0.0);
            }
        }
        f
    }

    /// Block with explicit cutoffs: ψ on the first ℓ slots, θ on the others.
    pub fn with_cutoffs(m: usize, l: usize, eta: f64, alpha: f64, psi: PlateauCutoff, theta: PlateauCutoff) -> Self {
        PrimalBlock { m, l, eta, alpha, psi, theta }
    }

    pub fn forward<S: Scalar>(&self, x: &[S; MAX_DIM]) -> [S; MAX_DIM] {
        let s = -(self.phi(x) * self.alpha) + 1.0;
        let mut y = *x;
        for v in y.iter_mut().take(self.l) {
            *v = *v * s;
        }
        y
    }

    fn ray<S: Scalar>(&self, s: S, y: &[S; MAX_DIM]) -> S {
        let mut x = *y;
        for v in x.iter_mut().take(self.l) {
            *v = *v * s;
        }
        s * (-(self.phi(&x) * self.alpha) + 1.0)
    }

    /// Ψ^{-1}(y) = (s y', y'') with s(1 − αφ(s y', y'')) = 1.
    pub fn inverse<S: Scalar>(&self, y: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        if self.alpha == 0.0 {
            return Ok(*y);
        }
        let yv = values(y);
        let g = |s: f64| self.ray(s, &yv);
        let (mut lo, mut hi) = (1.0, 1.0 / (1.0 - self.alpha));
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut s = 0.5 * (lo + hi);
        let consts: [Jet2; MAX_DIM] = std::array::from_fn(|i| Jet2::constant(yv[i]));
        let mut slope = 1.0;
        for _ in 0..3 {
            let j = self.ray(Jet2::var(s, 0), &consts);
            slope = j.g[0];
            if slope > 0.0 {
                let next = s - (j.v - 1.0) / slope;
                if next.is_finite() && next >= lo - 1e-12 && next <= hi + 1e-12 {
                    s = next;
                }
            }
        }
        let residual = (g(s) - 1.0).abs();
        if !(residual <= 1e-10) || !(slope > 0.0) {
            return Err(Error::Numeric { message: "primal thickening ray solve did not converge".into(), residual });
        }
        // chord steps lift s to a jet one order at a time
        let mut sj = S::cst(s);
        for _ in 0..3 {
            sj = sj - (self.ray(sj, y) - 1.0) / slope;
        }
        let mut x = *y;
        for v in x.iter_mut().take(self.l) {
            *v = *v * sj;
        }
        Ok(x)
    }

    /// Jac Ψ(x) = (1 − αφ)^{ℓ−1} ((1 − αφ) − α ∇'φ · x').
    pub fn forward_jacobian(&self, x: &Point) -> f64 {
        let j = self.phi(&Jet2::seed(x));
        let d = 1.0 - self.alpha * j.v;
        let dot: f64 = (0..self.l).map(|a| j.g[a] * x[a]).sum();
        d.powi(self.l as i32 - 1) * (d - self.alpha * dot)
    }
}

/// b_max for the dual block: ((1 − ρ)/(1 − ρ̄) − 1) ln(1/(1 − ρ̄)).
pub fn dual_b_max(rho: f64, rho_hi: f64) -> f64 {
    ((1.0 - rho) / (1.0 - rho_hi) - 1.0) * (1.0 / (1.0 - rho_hi)).ln()
}

/// Φ(x) = (φ(ζ) x', x''), ζ = sqrt(|x'|²/η² + θ(x'')²), θ = 1 − Π cutoff(ρ̲, ρ)(x''/η).
#[derive(Clone, Debug)]
pub struct DualBlock {
    pub m: usize,
    pub l: usize,
    pub eta: f64,
    theta: PlateauCutoff,
    pub profile: Profile,
}

impl DualBlock {
    pub fn new(m: usize, l: usize, eta: f64, rho_lo: f64, rho: f64, rho_hi: f64, b: Option<f64>) -> Result<Self> {
        check_order(rho_lo, rho, rho_hi)?;
        if l == 0 || l > m || m > MAX_DIM {
            return arg(format!("dual block needs 1 <= l <= m, got l = {l}, m = {m}"));
        }
        let bmax = dual_b_max(rho, rho_hi);
        let b = b.unwrap_or(0.5 * bmax);
        if !(b > 0.0 && b < bmax) {
            return arg(format!(
                "b = {b} violates (1 - rho_hi)(1 + b / ln(1/(1 - rho_hi))) < 1 - rho (needs 0 < b < {bmax})"
            ));
        }
        let profile = Profile::new(1.0 - rho_hi, b, 1.0 - rho_hi, 1.0 - rho)?;
        Ok(DualBlock { m, l, eta, theta: PlateauCutoff { a: rho_lo * eta, b: rho * eta }, profile })
    }

    fn zeta<S: Scalar>(&self, x: &[S; MAX_DIM]) -> S {
        let mut prod = S::cst(1.0);
        for &v in &x[self.l..self.m] {
            prod = prod * self.theta.eval(v);
        }
        let th = -prod + 1.0;
        let mut q = th * th;
        for &v in &x[..self.l] {
            let w = v / self.eta;
            q = q + w * w;
        }
        q.sqrt()
    }

    pub fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let z = self.zeta(x);
        if z.value() >= self.profile.b2 {
            return Ok(*x);
        }
        if z.value() <= 0.0 {
            return Err(Error::Singular { distance: 0.0 });
        }
        let lam = self.profile.phi(z);
        let mut y = *x;
        for v in y.iter_mut().take(self.l) {
            *v = *v * lam;
        }
        Ok(y)
    }

    /// λ^{ℓ−1} (λ + φ'(ζ) |x'|² / (η² ζ)).
    pub fn jacobian(&self, x: &Point) -> Result<f64> {
        let z = self.zeta(x);
        if z >= self.profile.b2 {
            return Ok(1.0);
        }
        if z <= 0.0 {
            return Err(Error::Singular { distance: 0.0 });
        }
        let (g, g1, _) = self.profile.derivs(z);
        let lam = g / z;
        let dphi = (g1 * z - g) / (z * z);
        let r2: f64 = x[..self.l].iter().map(|v| v * v).sum::<f64>() / (self.eta * self.eta);
        Ok(lam.powi(self.l as i32 - 1) * (lam + dphi * r2 / z))
    }
}

/// Primal inverse after dual map on one face block.
#[derive(Clone, Debug)]
pub struct FaceBlock {
    pub primal: PrimalBlock,
    pub dual: DualBlock,
}

impl FaceBlock {
    pub fn new(m: usize, l: usize, eta: f64, rho_lo: f64, rho: f64, rho_hi: f64) -> Result<Self> {
        if l == 0 {
            return arg("thickening face map needs a face of dimension at least 1");
        }
        let kappa = (1.0 - rho_hi) / (l as f64).sqrt();
        Ok(FaceBlock {
            primal: PrimalBlock::new(m, l, eta, rho_lo, rho, rho_hi, kappa)?,
            dual: DualBlock::new(m, l, eta, rho_lo, rho, rho_hi, None)?,
        })
    }

    pub fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        self.primal.inverse(&self.dual.apply(x)?)
    }

    pub fn jacobian(&self, x: &Point) -> Result<f64> {
        let y = self.dual.apply(x)?;
        let z = self.primal.inverse(&y)?;
        Ok(self.dual.jacobian(x)? / self.primal.forward_jacobian(&z))
    }
}

/// Block map acting in the local frame of the face at the origin with x' = first ℓ coordinates.
#[derive(Clone, Debug)]
enum BlockKind {
    Primal(PrimalBlock),
    Dual(DualBlock),
    Face(FaceBlock),
}

#[derive(Clone, Debug)]
struct BlockMap(BlockKind, usize);

impl GenericMap for BlockMap {
    fn dims(&self) -> (usize, usize) {
        (self.1, self.1)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        match &self.0 {
            BlockKind::Primal(p) => p.inverse(x),
            BlockKind::Dual(d) => d.apply(x),
            BlockKind::Face(f) => f.apply(x),
        }
    }
    fn closed_jacobian(&self, x: &Point) -> Option<Result<f64>> {
        Some(match &self.0 {
            BlockKind::Primal(p) => p.inverse(x).map(|z| 1.0 / p.forward_jacobian(&z)),
            BlockKind::Dual(d) => d.jacobian(x),
            BlockKind::Face(f) => f.jacobian(x),
        })
    }
}

fn block_support(m: usize, l: usize, eta: f64, rho: f64) -> Aabb {
    let half: Vec<f64> = (0..m).map(|a| if a < l { (1.0 - rho) * eta } else { rho * eta }).collect();
    Aabb::around(m, &[0.0; MAX_DIM], &half)
}

fn radii_params(eta: f64, rho_lo: f64, rho: f64, rho_hi: f64, l: usize) -> Vec<(String, f64)> {
    vec![
        ("l".into(), l as f64),
        ("eta".into(), eta),
        ("rho_lo".into(), rho_lo),
        ("rho".into(), rho),
        ("rho_hi".into(), rho_hi),
    ]
}

/// Φ = Ψ^{-1} for the primal block.
pub fn thickening_primal_map(m: usize, l: usize, eta: f64, rho_lo: f64, rho: f64, rho_hi: f64, kappa: f64) -> Result<SmoothMap> {
    if !(kappa < 1.0 - rho_hi) {
        return arg(format!("kappa = {kappa} must be below 1 - rho_hi = {}", 1.0 - rho_hi));
    }
    let p = PrimalBlock::new(m, l, eta, rho_lo, rho, rho_hi, kappa)?;
    let mut params = radii_params(eta, rho_lo, rho, rho_hi, l);
    params.push(("kappa".into(), kappa));
    params.push(("alpha".into(), p.alpha));
    Ok(SmoothMap {
        name: "thickening-primal".into(),
        m,
        map: Arc::new(BlockMap(BlockKind::Primal(p), m)),
        support: vec![block_support(m, l, eta, rho)],
        singular: vec![],
        params,
    })
}

fn singular_block(m: usize, l: usize, eta: f64, rho_lo: f64) -> Aabb {
    let half: Vec<f64> = (0..m).map(|a| if a < l { 0.0 } else { rho_lo * eta }).collect();
    Aabb::around(m, &[0.0; MAX_DIM], &half)
}

pub fn thickening_dual_map(m: usize, l: usize, eta: f64, rho_lo: f64, rho: f64, rho_hi: f64, b: Option<f64>) -> Result<SmoothMap> {
    let d = DualBlock::new(m, l, eta, rho_lo, rho, rho_hi, b)?;
    let mut params = radii_params(eta, rho_lo, rho, rho_hi, l);
    params.push(("b".into(), d.profile.b));
    Ok(SmoothMap {
        name: "thickening-dual".into(),
        m,
        map: Arc::new(BlockMap(BlockKind::Dual(d), m)),
        support: vec![block_support(m, l, eta, rho)],
        singular: vec![singular_block(m, l, eta, rho_lo)],
        params,
    })
}

pub fn thickening_face_map(m: usize, l: usize, eta: f64, rho_lo: f64, rho: f64, rho_hi: f64) -> Result<SmoothMap> {
    let f = FaceBlock::new(m, l, eta, rho_lo, rho, rho_hi)?;
    let mut params = radii_params(eta, rho_lo, rho, rho_hi, l);
    params.push(("kappa".into(), (1.0 - rho_hi) / (l as f64).sqrt()));
    params.push(("b".into(), f.dual.profile.b));
    Ok(SmoothMap {
        name: "thickening-face".into(),
        m,
        map: Arc::new(BlockMap(BlockKind::Face(f), m)),
        support: vec![block_support(m, l, eta, rho)],
        singular: vec![singular_block(m, l, eta, rho_lo)],
        params,
    })
}

/// Interleaved ladder ρ_m < τ_{m−1} < ρ_{m−1} < … < τ_ℓ < ρ_ℓ = ρ, equispaced in (0, ρ].
pub fn thickening_ladder(rho: f64, m: usize, l: usize) -> Vec<f64> {
    let n = 2 * (m - l);
    (0..=n).map(|k| rho * (k + 1) as f64 / (n + 1) as f64).collect()
}

#[derive(Clone, Debug)]
struct ThLevel {
    dim: usize,
    /// support radius of the face maps on this level
    tau: f64,
    block: FaceBlock,
    faces: HashSet<[i64; MAX_DIM]>,
}

/// Φ_ℓ = Ψ_{ℓ+1} ∘ … ∘ Ψ_m restricted to faces of the cells in U^m.
#[derive(Clone, Debug)]
pub struct ThickeningMap {
    pub cub: Cubication,
    pub l: usize,
    pub rho: f64,
    levels: Vec<ThLevel>,
}

impl ThickeningMap {
    fn frame(&self, level: &ThLevel, y: &Point) -> Option<FaceFrame> {
        let m = self.cub.m;
        let t = self.cub.to_lattice_units(y);
        let mut key = [0i64; MAX_DIM];
        let mut spanned = [false; MAX_DIM];
        let mut normal = 0;
        for a in 0..m {
            let e = 2.0 * (0.5 * t[a]).round();
            if (t[a] - e).abs() < level.tau {
                key[a] = e as i64;
                normal += 1;
            } else {
                key[a] = (2.0 * (0.5 * t[a]).floor() + 1.0) as i64;
                spanned[a] = true;
            }
        }
        if normal != m - level.dim || !level.faces.contains(&key) {
            return None;
        }
        Some(FaceFrame::new(m, self.cub.lattice_to_point(&key), &spanned))
    }

    /// Composite Jacobian from the closed-form block Jacobians.
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

impl GenericMap for ThickeningMap {
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

pub fn build_thickening(c: &Cubication, cells: &[[i64; MAX_DIM]], l: usize, rho: f64) -> Result<ThickeningMap> {
    let m = c.m;
    if l + 1 > m {
        return arg(format!("thickening needs l <= m - 1, got l = {l}, m = {m}"));
    }
    if !(rho > 0.0 && rho < 0.5) {
        return arg(format!("thickening radius rho = {rho} must lie in (0, 1/2)"));
    }
    for k in cells {
        if (0..m).any(|a| k[a] < 0 || k[a] >= c.n as i64) {
            return arg(format!("cell {:?} is not a cell of the cubication", &k[..m]));
        }
    }
    let ladder = thickening_ladder(rho, m, l);
    let mut levels = Vec::new();
    for i in (l + 1..=m).rev() {
        let e = 2 * (m - i);
        let (rho_lo, tau, rho_hi) = (ladder[e], ladder[e + 1], ladder[e + 2]);
        let block = FaceBlock::new(m, i, c.eta, rho_lo, tau, rho_hi)?;
        let faces = c.faces_of_cells(cells, i).into_iter().map(|f| f.lattice).collect();
        levels.push(ThLevel { dim: i, tau, block, faces });
    }
    Ok(ThickeningMap { cub: c.clone(), l, rho, levels })
}

/// Global thickening for the cells of U^m; singular on the dual faces of those cells.
pub fn thickening_global_map(c: &Cubication, cells: &[[i64; MAX_DIM]], l: usize, rho: f64) -> Result<SmoothMap> {
    let tm = build_thickening(c, cells, l, rho)?;
    let m = c.m;
    let support = cells
        .iter()
        .map(|k| Aabb::around(m, &c.cell_center(k), &vec![(1.0 + rho) * c.eta; m]))
        .collect();
    let singular = c.dual_faces_of_cells(cells, l)?.iter().map(|f| Aabb::face_nbhd(f, 0.0)).collect();
    let mut params = vec![("l".into(), l as f64), ("eta".into(), c.eta), ("rho".into(), rho)];
    for (k, v) in thickening_ladder(rho, m, l).iter().enumerate() {
        params.push((format!("ladder{k}"), *v));
    }
    Ok(SmoothMap { name: "thickening".into(), m, map: Arc::new(tm), support, singular, params })
}
