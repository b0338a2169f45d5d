//! Quadrature rules: Gauss-Legendre panels and graded product cells.

use crate::error::{Error, Result};
use crate::jet::{Point, MAX_DIM};
use crate::smoothmap::Aabb;

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

/// Tensor 3-point Gauss rule on `base`^m cells of `region`, with cells near any flagged box
/// split dyadically. The grading depth grows until the integral changes by less
/// than `tol` relative.
pub fn graded_integral(
    region: &Aabb,
    flags: &[Aabb],
    f: &(dyn Fn(&Point) -> Result<f64> + Sync),
    base: usize,
    tol: f64,
    max_depth: usize,
) -> Result<f64> {
    let m = region.m;
    let mut cells = Vec::new();
    let h: Vec<f64> = (0..m).map(|a| (region.hi[a] - region.lo[a]) / base as f64).collect();
    let total = base.pow(m as u32);
    for t in 0..total {
        let mut r = t;
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for a in 0..m {
            let i = r % base;
            r /= base;
            lo[a] = region.lo[a] + i as f64 * h[a];
            hi[a] = lo[a] + h[a];
        }
        cells.push(Aabb::new(m, lo, hi));
    }
    let gl = gauss_legendre(3);
    let nodes = gl.len().pow(m as u32);
    let coarse = |c: &Aabb| -> Result<f64> {
        let mut sum = 0.0;
        for t in 0..nodes {
            let mut r = t;
            let mut x = [0.0; MAX_DIM];
            let mut w = 1.0;
            for a in 0..m {
                let (g, gw) = gl[r % gl.len()];
                r /= gl.len();
                x[a] = 0.5 * (c.lo[a] + c.hi[a]) + 0.5 * (c.hi[a] - c.lo[a]) * g;
                w *= 0.5 * gw;
            }
            sum += w * f(&x)?;
        }
        Ok(sum * c.volume())
    };
    let near = |c: &Aabb| {
        let size = (0..m).map(|a| c.hi[a] - c.lo[a]).fold(0.0f64, f64::max);
        flags.iter().any(|b| box_gap(c, b) <= size)
    };
    // Fixed part from unflagged cells; the flagged frontier is refined level by level.
    let mut fixed = 0.0;
    let mut frontier = Vec::new();
    for c in cells {
        if near(&c) {
            frontier.push(c);
        } else {
            fixed += coarse(&c)?;
        }
    }
    let mut prev: f64 = fixed + frontier.iter().map(&coarse).sum::<Result<f64>>()?;
    for _ in 0..max_depth {
        if frontier.is_empty() {
            return Ok(prev);
        }
        let mut next = Vec::new();
        for c in &frontier {
            for child in split(c) {
                if near(&child) {
                    next.push(child);
                } else {
                    fixed += coarse(&child)?;
                }
            }
        }
        frontier = next;
        let cur = fixed + frontier.iter().map(&coarse).sum::<Result<f64>>()?;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numeric {
        message: format!("graded quadrature did not settle within depth {max_depth}"),
        residual: prev,
    })
}

fn split(c: &Aabb) -> Vec<Aabb> {
    let m = c.m;
    let mut out = Vec::with_capacity(1 << m);
    for t in 0..(1usize << m) {
        let mut lo = c.lo;
        let mut hi = c.hi;
        for a in 0..m {
            let mid = 0.5 * (c.lo[a] + c.hi[a]);
            if t >> a & 1 == 0 {
                hi[a] = mid;
            } else {
                lo[a] = mid;
            }
        }
        out.push(Aabb::new(m, lo, hi));
    }
    out
}

/// Sup-norm gap between two boxes (zero when they meet).
pub fn box_gap(a: &Aabb, b: &Aabb) -> f64 {
    let mut d = 0.0f64;
    for i in 0..a.m {
        d = d.max(b.lo[i] - a.hi[i]).max(a.lo[i] - b.hi[i]);
    }
    d
}
