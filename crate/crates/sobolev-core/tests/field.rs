use std::sync::Arc;

use proptest::prelude::*;
use sobolev_core::field::convolve::{BallRule, Smoothed};
use sobolev_core::field::{interpolate, lebesgue_norm, sample_field, sobolev_distance, GridSpec};
use sobolev_core::{GenericMap, Mapping, Result, Scalar, MAX_DIM};

struct Const(f64, f64);

impl GenericMap for Const {
    fn dims(&self) -> (usize, usize) {
        (2, 2)
    }
    fn apply<S: Scalar>(&self, _x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut o = [S::cst(0.0); MAX_DIM];
        o[0] = S::cst(self.0);
        o[1] = S::cst(self.1);
        Ok(o)
    }
}

/// (sin(a·x), cos(b·x)) with a width field w + v x_1.
struct Wave([f64; 4]);

impl GenericMap for Wave {
    fn dims(&self) -> (usize, usize) {
        (2, 2)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let [a, b, c, d] = self.0;
        let mut o = [S::cst(0.0); MAX_DIM];
        o[0] = (x[0] * a + x[1] * b).sin();
        o[1] = (x[0] * c - x[1] * d).cos();
        Ok(o)
    }
}

struct Width(f64, f64);

impl GenericMap for Width {
    fn dims(&self) -> (usize, usize) {
        (2, 1)
    }
    fn apply<S: Scalar>(&self, x: &[S; MAX_DIM]) -> Result<[S; MAX_DIM]> {
        let mut o = [S::cst(0.0); MAX_DIM];
        o[0] = x[0] * self.1 + self.0;
        Ok(o)
    }
}

fn wave(c: [f64; 4], spec: &GridSpec) -> sobolev_core::field::GridField {
    sample_field(Arc::new(Wave(c)), spec).unwrap()
}

proptest! {
    #[test]
    fn convolving_a_constant_changes_nothing(a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.01f64..0.3, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let s = Smoothed { inner: Arc::new(Const(a, b)), psi: Arc::new(Width(w, 0.05)), rule: Arc::new(BallRule::standard(2)) };
        let v = s.eval(&[x, y, 0.0, 0.0]).unwrap();
        prop_assert!((v[0] - a).abs() < 1e-12 && (v[1] - b).abs() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric_and_satisfies_the_triangle_inequality(
        c1 in prop::array::uniform4(-3.0f64..3.0),
        c2 in prop::array::uniform4(-3.0f64..3.0),
        c3 in prop::array::uniform4(-3.0f64..3.0),
        k in 1usize..=2,
        p in 1.0f64..3.0,
    ) {
        let spec = GridSpec::cube(2, 1.0, 24, true);
        let (u, v, w) = (wave(c1, &spec), wave(c2, &spec), wave(c3, &spec));
        let uv = sobolev_distance(&u, &v, k, p).unwrap();
        let vu = sobolev_distance(&v, &u, k, p).unwrap();
        let uw = sobolev_distance(&u, &w, k, p).unwrap();
        let wv = sobolev_distance(&w, &v, k, p).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-12 * uv.max(1.0));
        prop_assert!(uv <= uw + wv + 1e-10);
        prop_assert_eq!(sobolev_distance(&u, &u, k, p).unwrap(), 0.0);
    }

    #[test]
    fn interpolation_reproduces_nodes(c in prop::array::uniform4(-3.0f64..3.0), i in 0usize..625) {
        let spec = GridSpec::cube(2, 1.0, 24, true);
        let u = wave(c, &spec);
        let x = spec.node(i);
        let v = interpolate(&u, &x).unwrap();
        prop_assert!((v[0] - u.value(i)[0]).abs() < 1e-12 && (v[1] - u.value(i)[1]).abs() < 1e-12);
    }
}

#[test]
fn lebesgue_norm_of_a_constant() {
    let spec = GridSpec::cube(2, 1.0, 32, true);
    let u = sample_field(Arc::new(Const(0.6, 0.8)), &spec).unwrap();
    let vol = spec.domain().volume();
    let n = lebesgue_norm(&u, 2.0, None).unwrap();
    assert!((n - vol.sqrt()).abs() < 1e-12);
    assert!(lebesgue_norm(&u, 0.5, None).is_err());
}
