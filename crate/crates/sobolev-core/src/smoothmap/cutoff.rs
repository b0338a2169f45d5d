use crate::error::{arg, Result};
use crate::jet::Scalar;

/// Smooth monotone bridge from 0 (t ≤ 0) to 1 (t ≥ 1): f(t) / (f(t) + f(1 − t)), f(t) = e^{−1/t}.
pub fn bridge<S: Scalar>(t: S) -> S {
    let v = t.value();
    if v <= 0.0 {
        return S::cst(0.0);
    }
    if v >= 1.0 {
        return S::cst(1.0);
    }
    let f = |s: S| (-(s.recip())).exp();
    let a = f(t);
    let b = f(-t + 1.0);
    a / (a + b)
}

/// Equal to 1 on [−a, a], 0 outside (−b, b), even and monotone on each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauCutoff {
    pub a: f64,
    pub b: f64,
}

pub fn make_plateau_cutoff(a: f64, b: f64) -> Result<PlateauCutoff> {
    if !(a >= 0.0 && a < b) {
        return arg(format!("cutoff needs 0 <= a < b, got a = {a}, b = {b}"));
    }
    Ok(PlateauCutoff { a, b })
}

impl PlateauCutoff {
    pub fn eval<S: Scalar>(&self, t: S) -> S {
        let u = t.abs();
        let v = u.value();
        if v <= self.a {
            S::cst(1.0)
        } else if v >= self.b {
            S::cst(0.0)
        } else {
            bridge((-u + self.b) / (self.b - self.a))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;

    #[test]
    fn plateau_support_and_midpoint() {
        let c = make_plateau_cutoff(1.0, 2.0).unwrap();
        assert_eq!(c.value(0.5), 1.0);
        assert_eq!(c.value(2.5), 0.0);
        assert!((c.value(1.5) - 0.5).abs() < 1e-15);
        assert!((c.value(-1.5) - 0.5).abs() < 1e-15);
        assert!(make_plateau_cutoff(2.0, 1.0).is_err());
    }

    #[test]
    fn bridge_slope_peaks_at_two() {
        let j = bridge(Jet2::var(0.5, 0));
        assert!((j.g[0] - 2.0).abs() < 1e-12);
        assert!(j.h[0][0].abs() < 1e-12);
        let mut max = 0.0f64;
        for i in 1..1000 {
            max = max.max(bridge(Jet2::var(i as f64 / 1000.0, 0)).g[0]);
        }
        assert!(max <= 2.0 + 1e-12);
    }

    #[test]
    fn derivatives_vanish_at_the_ends() {
        let c = make_plateau_cutoff(1.0, 2.0).unwrap();
        for t in [1.0 + 1e-3, 2.0 - 1e-3] {
            let j = c.eval(Jet2::var(t, 0));
            assert!(j.g[0].abs() < 1e-12 && j.h[0][0].abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_on_each_side() {
        let c = make_plateau_cutoff(0.3, 0.8).unwrap();
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = c.value(i as f64 / 1000.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }
}
