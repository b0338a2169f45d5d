//! Second-order forward-mode jets in up to four variables.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::Result;
use crate::map::Mapping;

pub const MAX_DIM: usize = 4;

/// A point of ℝ^m stored in a fixed array; unused trailing slots are zero.
pub type Point = [f64; MAX_DIM];

/// Arithmetic shared by plain values and jets, so that every map is written once.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + Send
    + Sync
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    /// Applies a scalar function given its value and first two derivatives at `self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
    /// Evaluates a trait-object map on this scalar kind.
    fn through(m: &dyn Mapping, x: &[Self; MAX_DIM]) -> Result<[Self; MAX_DIM]>;

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sqrt(self) -> Self {
        let v = self.value();
        let s = v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * v))
    }
    fn recip(self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
    fn powf(self, a: f64) -> Self {
        let v = self.value();
        self.chain(v.powf(a), a * v.powf(a - 1.0), a * (a - 1.0) * v.powf(a - 2.0))
    }
    fn powi(self, n: i32) -> Self {
        let v = self.value();
        let nf = n as f64;
        self.chain(
            v.powi(n),
            nf * v.powi(n - 1),
            nf * (nf - 1.0) * v.powi(n - 2),
        )
    }
    fn sin(self) -> Self {
        let v = self.value();
        self.chain(v.sin(), v.cos(), -v.sin())
    }
    fn cos(self) -> Self {
        let v = self.value();
        self.chain(v.cos(), -v.sin(), -v.cos())
    }
    fn atan(self) -> Self {
        let v = self.value();
        let d = 1.0 / (1.0 + v * v);
        self.chain(v.atan(), d, -2.0 * v * d * d)
    }
    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn through(m: &dyn Mapping, x: &Point) -> Result<Point> {
        m.eval(x)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn powf(self, a: f64) -> Self {
        f64::powf(self, a)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Value, gradient and Hessian of a scalar quantity with respect to the input point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        v: 0.0,
        g: [0.0; MAX_DIM],
        h: [[0.0; MAX_DIM]; MAX_DIM],
    };

    pub fn constant(v: f64) -> Self {
        Jet2 { v, ..Self::ZERO }
    }

    /// The coordinate function x_i evaluated at `v`.
    pub fn var(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Seeds the identity jet at a point.
    pub fn seed(x: &Point) -> [Jet2; MAX_DIM] {
        std::array::from_fn(|i| Jet2::var(x[i], i))
    }
}

impl Scalar for Jet2 {
    #[inline]
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet2::constant(f0);
        for a in 0..MAX_DIM {
            out.g[a] = f1 * self.g[a];
            for b in 0..MAX_DIM {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
            }
        }
        out
    }
    fn through(m: &dyn Mapping, x: &[Jet2; MAX_DIM]) -> Result<[Jet2; MAX_DIM]> {
        m.eval_jet(x)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, o: Jet2) -> Jet2 {
        let mut out = self;
        out.v += o.v;
        for a in 0..MAX_DIM {
            out.g[a] += o.g[a];
            for b in 0..MAX_DIM {
                out.h[a][b] += o.h[a][b];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for a in 0..MAX_DIM {
            out.g[a] = self.v * o.g[a] + o.v * self.g[a];
            for b in 0..MAX_DIM {
                out.h[a][b] = self.v * o.h[a][b]
                    + o.v * self.h[a][b]
                    + self.g[a] * o.g[b]
                    + o.g[a] * self.g[b];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(mut self, c: f64) -> Jet2 {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(mut self, c: f64) -> Jet2 {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(mut self, c: f64) -> Jet2 {
        self.v *= c;
        for a in 0..MAX_DIM {
            self.g[a] *= c;
            for b in 0..MAX_DIM {
                self.h[a][b] *= c;
            }
        }
        self
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, c: f64) -> Jet2 {
        self * (1.0 / c)
    }
}

/// Euclidean norm of the first `n` entries.
pub fn norm<S: Scalar>(x: &[S]) -> S {
    let mut s = S::cst(0.0);
    for &xi in x {
        s = s + xi * xi;
    }
    s.sqrt()
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

pub fn values<S: Scalar>(x: &[S; MAX_DIM]) -> Point {
    std::array::from_fn(|i| x[i].value())
}

pub fn lift<S: Scalar>(x: &Point) -> [S; MAX_DIM] {
    std::array::from_fn(|i| S::cst(x[i]))
}
