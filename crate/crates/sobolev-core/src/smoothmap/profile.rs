//! Radial profile g(s) = s φ(s) used by the dual thickening and shrinking blocks.
//!
//! g equals A(s) = c0 (1 + b / ln(1/s)) on (0, a], equals s on [b2, ∞) and is
//! strictly increasing. On (a, b2) it is A(a) + ∫_a^s q with
//! q = ((1 − w) A' + w)(1 − ν B): w is a smooth bridge from A' to slope 1 and B
//! is a plateau bump in the middle of the gap whose weight ν makes g(b2) = b2.

use crate::error::{arg, Result};
use crate::field::quadrature::gauss_legendre;
use crate::jet::{Jet2, Scalar};
use crate::smoothmap::cutoff::{bridge, PlateauCutoff};

const PANELS: usize = 64;
const ORDER: usize = 16;

#[derive(Clone, Debug)]
pub struct Profile {
    pub c0: f64,
    pub b: f64,
    pub a: f64,
    pub b2: f64,
    pub nu: f64,
    bump: PlateauCutoff,
    nodes: Vec<(f64, f64)>,
    cum: Vec<f64>,
}

impl Profile {
    pub fn new(c0: f64, b: f64, a: f64, b2: f64) -> Result<Profile> {
        if !(c0 > 0.0 && b > 0.0 && a > 0.0 && a < b2 && b2 <= 1.0) {
            return arg(format!(
                "profile needs c0 > 0, b > 0 and 0 < a < b2 <= 1 (c0 = {c0}, b = {b}, a = {a}, b2 = {b2})"
            ));
        }
        let len = b2 - a;
        let mut p = Profile {
            c0,
            b,
            a,
            b2,
            nu: 0.0,
            bump: PlateauCutoff { a: 0.4 * len, b: 0.5 * len },
            nodes: gauss_legendre(ORDER),
            cum: vec![0.0; PANELS + 1],
        };
        let target = b2 - p.big_a(a);
        if !(target > 0.0) {
            return arg(format!(
                "profile inadmissible: c0 (1 + b / ln(1/a)) = {} must be < {b2}",
                p.big_a(a)
            ));
        }
        let h = len / PANELS as f64;
        let (mut i0, mut ib) = (0.0, 0.0);
        for k in 0..PANELS {
            let lo = a + k as f64 * h;
            i0 += p.panel(lo, lo + h, |s| p.base(s));
            ib += p.panel(lo, lo + h, |s| p.base(s) * p.bump_at(s));
        }
        p.nu = (i0 - target) / ib;
        if !(p.nu < 1.0) {
            return arg(format!(
                "profile cannot stay increasing: blend weight {} must be < 1",
                p.nu
            ));
        }
        for k in 0..PANELS {
            let lo = a + k as f64 * h;
            p.cum[k + 1] = p.cum[k] + p.panel(lo, lo + h, |s| p.q(s));
        }
        Ok(p)
    }

    fn panel(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        self.nodes.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r
    }

    fn big_a<S: Scalar>(&self, s: S) -> S {
        (-(s.ln().recip()) * self.b + 1.0) * self.c0
    }

    fn big_a_prime<S: Scalar>(&self, s: S) -> S {
        let l = s.ln();
        (s * l * l).recip() * (self.c0 * self.b)
    }

    fn weight<S: Scalar>(&self, s: S) -> S {
        bridge((s - self.a) / (self.b2 - self.a))
    }

    fn bump_at<S: Scalar>(&self, s: S) -> S {
        self.bump.eval(s - 0.5 * (self.a + self.b2))
    }

    fn base<S: Scalar>(&self, s: S) -> S {
        let w = self.weight(s);
        let rest = -w + 1.0;
        if rest.value() == 0.0 {
            w
        } else {
            rest * self.big_a_prime(s) + w
        }
    }

    fn q<S: Scalar>(&self, s: S) -> S {
        self.base(s) * (-(self.bump_at(s) * self.nu) + 1.0)
    }

    /// g, g' and g'' at s > 0.
    pub fn derivs(&self, s: f64) -> (f64, f64, f64) {
        if s >= self.b2 {
            return (s, 1.0, 0.0);
        }
        if s <= self.a {
            let j = self.big_a(Jet2::var(s, 0));
            return (j.v, j.g[0], j.h[0][0]);
        }
        let h = (self.b2 - self.a) / PANELS as f64;
        let k = (((s - self.a) / h).floor() as usize).min(PANELS - 1);
        let lo = self.a + k as f64 * h;
        let g0 = self.big_a(self.a) + self.cum[k] + self.panel(lo, s, |t| self.q(t));
        let j = self.q(Jet2::var(s, 0));
        (g0, j.v, j.g[0])
    }

    pub fn eval<S: Scalar>(&self, s: S) -> S {
        let (g0, g1, g2) = self.derivs(s.value());
        s.chain(g0, g1, g2)
    }

    /// φ(s) = g(s) / s.
    pub fn phi<S: Scalar>(&self, s: S) -> S {
        self.eval(s) / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thickening_like() -> Profile {
        let (rb, r) = (0.5, 0.3);
        let bmax = ((1.0 - r) / (1.0 - rb) - 1.0) * (1.0f64 / (1.0 - rb)).ln();
        Profile::new(1.0 - rb, 0.5 * bmax, 1.0 - rb, 1.0 - r).unwrap()
    }

    fn shrinking_like() -> Profile {
        let c: f64 = 0.5;
        let eps = 0.5 * (1.0 / (c * c) - 1.0);
        let c0 = c * (1.0 + eps).sqrt();
        let bmax = (1.0 / c0 - 1.0) * (1.0 / c0).ln();
        Profile::new(c0, 0.5 * bmax, 0.1 * (1.0 + eps).sqrt(), 1.0).unwrap()
    }

    #[test]
    fn closed_form_branch() {
        let p = Profile::new(0.5, 0.2, 0.5, 0.7).unwrap();
        let expect = 0.5 * (1.0 + 0.2 / 10.0f64.ln());
        assert!((p.eval(0.1) - expect).abs() < 1e-15);
        assert!((expect - 0.5434).abs() < 1e-4);
    }

    #[test]
    fn increasing_and_continuous() {
        for p in [thickening_like(), shrinking_like()] {
            let mut prev = 0.0;
            for i in 1..20000 {
                let s = i as f64 / 20000.0 * 1.2;
                let (g, d, _) = p.derivs(s);
                assert!(g > prev, "not increasing at {s}");
                assert!(d > 0.0);
                prev = g;
            }
            let (gl, dl, _) = p.derivs(p.b2 - 1e-9);
            assert!((gl - p.b2).abs() < 1e-8 && (dl - 1.0).abs() < 1e-6);
            let (ga, da, _) = p.derivs(p.a + 1e-9);
            let (gb, db, _) = p.derivs(p.a - 1e-9);
            assert!((ga - gb).abs() < 1e-8 && (da - db).abs() < 1e-6);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let p = shrinking_like();
        for s in [0.05, 0.2, 0.4, 0.55, 0.8, 0.97] {
            let h = 1e-5;
            let (_, d, dd) = p.derivs(s);
            let fd = (p.derivs(s + h).0 - p.derivs(s - h).0) / (2.0 * h);
            let fdd = (p.derivs(s + h).1 - p.derivs(s - h).1) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "s={s}");
            assert!((dd - fdd).abs() < 1e-4 * (1.0 + dd.abs()), "s={s}");
        }
    }

    #[test]
    fn phi_at_least_one() {
        for p in [thickening_like(), shrinking_like()] {
            for i in 1..5000 {
                let s = i as f64 / 5000.0;
                assert!(p.phi(s) >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn inadmissible_b_is_rejected() {
        assert!(Profile::new(0.5, 5.0, 0.5, 0.7).is_err());
    }
}
