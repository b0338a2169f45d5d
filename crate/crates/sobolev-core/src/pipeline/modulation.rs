//! The convolution width ψ = tζ + s(1 − ζ).

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{arg, Result};
use crate::field::examples::halton;
use crate::field::{jet_norms, GridSpec};
use crate::geometry::Cubication;
use crate::jet::{Point, Scalar, MAX_DIM};
use crate::map::{GenericMap, Mapping};
use crate::smoothmap::{make_plateau_cutoff, PlateauCutoff};

/// ζ = Π_{σ ∈ E} (1 − Π_i χ(x_i − c_i)), χ = 1 on [−η, η] and 0 outside (−2η, 2η).
#[derive(Clone, Debug)]
pub struct Zeta {
    pub cub: Cubication,
    pub bad: HashSet<[i64; MAX_DIM]>,
    cut: PlateauCutoff,
}

impl Zeta {
    pub fn new(cub: &Cubication, bad: &[[i64; MAX_DIM]]) -> Result<Self> {
        Ok(Zeta {
            cub: cub.clone(),
            bad: bad.iter().copied().collect(),
            cut: make_plateau_cutoff(cub.eta, 2.0 * cub.eta)?,
        })
    }
}

impl GenericMap for Zeta {
    fn dims(&self) -> (usize, usize) {
        (self.cub.m, 1)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let m = self.cub.m;
        let mut out = [S::cst(0.0); MAX_DIM];
        let mut z = S::cst(1.0);
        if !self.bad.is_empty() {
            let u = self.cub.to_lattice_units(&crate::jet::values(x));
            let base: [i64; MAX_DIM] = std::array::from_fn(|i| if i < m { ((u[i] - 1.0) / 2.0).round() as i64 } else { 0 });
            let lo = std::array::from_fn(|i| if i < m { base[i] - 1 } else { 0 });
            let hi = std::array::from_fn(|i| if i < m { base[i] + 1 } else { 0 });
            for k in crate::geometry::lattice_box(m, lo, hi) {
                if !self.bad.contains(&k) {
                    continue;
                }
                let c = self.cub.cell_center(&k);
                let mut bump = S::cst(1.0);
                for i in 0..m {
                    bump = bump * self.cut.eval(x[i] - c[i]);
                    if bump.value() == 0.0 {
                        break;
                    }
                }
                z = z * (-bump + 1.0);
            }
        }
        out[0] = z;
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Psi {
    pub zeta: Zeta,
    pub t: f64,
    pub s: f64,
}

impl GenericMap for Psi {
    fn dims(&self) -> (usize, usize) {
        (self.zeta.cub.m, 1)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let z = self.zeta.apply(x)?[0];
        let mut out = [S::cst(0.0); MAX_DIM];
        out[0] = z * (self.t - self.s) + self.s;
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Modulation {
    pub psi: Arc<Psi>,
    /// sampled max over j ≤ k of η^j |D^j ζ|, with a 5% margin
    pub c_tilde: f64,
    pub t: f64,
    pub s: f64,
}

impl Modulation {
    pub fn zeta(&self) -> &Zeta {
        &self.psi.zeta
    }
}

/// Sampled max of η^j |D^j ζ| for 1 ≤ j ≤ k around the bad cubes (at least 1, the j = 0 term).
pub fn zeta_constant(zeta: &Zeta, k: usize, per_cell: usize) -> Result<f64> {
    let c = &zeta.cub;
    let m = c.m;
    let eta = c.eta;
    let pts = halton(m, per_cell, 2.0 * eta, 0);
    let mut best = 1.0f64;
    for k_cell in &zeta.bad {
        let ctr = c.cell_center(k_cell);
        for p in &pts {
            let x: Point = std::array::from_fn(|i| if i < m { ctr[i] + p[i] } else { 0.0 });
            let (_, d1, d2) = jet_norms(zeta, &x)?;
            best = best.max(eta * d1);
            if k >= 2 {
                best = best.max(eta * eta * d2);
            }
        }
    }
    Ok(best)
}

/// t = min(κ/C̃, ρ − ρ̲) η; s defaults to min(2h, t/2) with h the grid spacing.
pub fn build_modulation(
    cub: &Cubication,
    bad: &[[i64; MAX_DIM]],
    k: usize,
    rho: f64,
    rho_lo: f64,
    kappa: f64,
    s: Option<f64>,
    grid: &GridSpec,
) -> Result<Modulation> {
    let zeta = Zeta::new(cub, bad)?;
    let c_tilde = 1.05 * zeta_constant(&zeta, k, 256)?;
    let t = (kappa / c_tilde).min(rho - rho_lo) * cub.eta;
    let h = (0..grid.m).map(|a| grid.h(a)).fold(f64::INFINITY, f64::min);
    let s = match s {
        Some(s) if s >= t => return arg(format!("small scale s = {s} must be below t = {t}")),
        Some(s) if s <= 0.0 => return arg(format!("small scale s = {s} must be positive")),
        Some(s) => s,
        None => (2.0 * h).min(0.5 * t),
    };
    Ok(Modulation { psi: Arc::new(Psi { zeta, t, s }), c_tilde, t, s })
}

/// max |Dψ| over grid nodes by finite differences.
pub fn psi_slope(psi: &dyn Mapping, grid: &GridSpec) -> Result<f64> {
    crate::field::convolve::slope_bound(psi, grid)
}
