//! Maps ℝ^m → ℝ^ν evaluable on plain points and on second-order jets.

use std::sync::Arc;

use crate::error::Result;
use crate::jet::{Jet2, Point, Scalar, MAX_DIM};

/// Object-safe interface; implementors usually go through [`GenericMap`].
pub trait Mapping: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &Point) -> Result<Point>;
    fn eval_jet(&self, x: &[Jet2; MAX_DIM]) -> Result<[Jet2; MAX_DIM]>;
    /// Closed-form Jacobian determinant when the construction provides one.
    fn jacobian(&self, _x: &Point) -> Option<Result<f64>> {
        None
    }
}

/// Maps written once over any [`Scalar`].
pub trait GenericMap: Send + Sync {
    fn dims(&self) -> (usize, usize);
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]>;
    fn closed_jacobian(&self, _x: &Point) -> Option<Result<f64>> {
        None
    }
}

impl<T: GenericMap> Mapping for T {
    fn dim_in(&self) -> usize {
        self.dims().0
    }
    fn dim_out(&self) -> usize {
        self.dims().1
    }
    fn eval(&self, x: &Point) -> Result<Point> {
        self.apply(x)
    }
    fn eval_jet(&self, x: &[Jet2; MAX_DIM]) -> Result<[Jet2; MAX_DIM]> {
        self.apply(x)
    }
    fn jacobian(&self, x: &Point) -> Option<Result<f64>> {
        self.closed_jacobian(x)
    }
}

#[derive(Clone, Debug)]
pub struct Identity(pub usize);

impl GenericMap for Identity {
    fn dims(&self) -> (usize, usize) {
        (self.0, self.0)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        Ok(*x)
    }
    fn closed_jacobian(&self, _x: &Point) -> Option<Result<f64>> {
        Some(Ok(1.0))
    }
}

/// x ↦ A x + c.
#[derive(Clone, Debug)]
pub struct Affine {
    pub m: usize,
    pub a: [[f64; MAX_DIM]; MAX_DIM],
    pub c: Point,
}

impl Affine {
    pub fn scaling(m: usize, s: f64) -> Self {
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in a.iter_mut().enumerate().take(m) {
            row[i] = s;
        }
        Affine { m, a, c: [0.0; MAX_DIM] }
    }
}

impl GenericMap for Affine {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.m)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut y = [S::cst(0.0); MAX_DIM];
        for i in 0..self.m {
            let mut s = S::cst(self.c[i]);
            for j in 0..self.m {
                if self.a[i][j] != 0.0 {
                    s = s + x[j] * self.a[i][j];
                }
            }
            y[i] = s;
        }
        Ok(y)
    }
}

/// `outer ∘ inner`.
#[derive(Clone)]
pub struct Compose {
    pub outer: Arc<dyn Mapping>,
    pub inner: Arc<dyn Mapping>,
}

impl Compose {
    pub fn new(outer: Arc<dyn Mapping>, inner: Arc<dyn Mapping>) -> Self {
        Compose { outer, inner }
    }
}

impl GenericMap for Compose {
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_in(), self.outer.dim_out())
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        dispatch(self.outer.as_ref(), &dispatch(self.inner.as_ref(), x)?)
    }
}

/// Evaluates a trait object on either scalar kind.
pub fn dispatch<S: Scalar>(m: &dyn Mapping, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
    S::through(m, x)
}
