//! Good and bad cubes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::quadrature::graded_integral;
use crate::field::{jet_norms, RClassMap};
use crate::geometry::{lattice_box, Cubication};
use crate::jet::{Point, MAX_DIM};
use crate::smoothmap::Aabb;

#[derive(Clone, Debug, PartialEq)]
pub struct CubeClassification {
    /// E^m_η
    pub bad: Vec<[i64; MAX_DIM]>,
    /// U^m_η: cubes meeting a bad cube
    pub enlarged: Vec<[i64; MAX_DIM]>,
    /// scaled energy C′ η^{1 − m/kp} ‖Du‖_{L^{kp}(σ + Q_{2ρη})} per cell, in `Cubication::cells` order
    pub energy: Vec<f64>,
}

impl CubeClassification {
    pub fn is_bad(&self, k: &[i64; MAX_DIM]) -> bool {
        self.bad.binary_search(k).is_ok()
    }

    pub fn in_enlarged(&self, k: &[i64; MAX_DIM]) -> bool {
        self.enlarged.binary_search(k).is_ok()
    }
}

/// ∫ |Du|^q over a box by graded quadrature refined toward the singular set of u.
pub fn gradient_power_integral(u: &RClassMap, region: &Aabb, q: f64) -> Result<f64> {
    let f = |x: &Point| -> Result<f64> {
        match jet_norms(u.map.as_ref(), x) {
            Ok((_, d1, _)) => Ok(d1.powf(q)),
            Err(Error::Singular { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    graded_integral(region, &u.singular, &f, 4, 1e-4, 48)
}

pub fn cube_energy(u: &RClassMap, c: &Cubication, cell: &[i64; MAX_DIM], kp: f64, rho: f64, c_prime: f64) -> Result<f64> {
    let m = c.m;
    let region = Aabb::around(m, &c.cell_center(cell), &vec![(1.0 + 2.0 * rho) * c.eta; m]);
    let integral = gradient_power_integral(u, &region, kp)?;
    Ok(c_prime * c.eta.powf(1.0 - m as f64 / kp) * integral.powf(1.0 / kp))
}

/// E: cubes whose scaled energy exceeds ι; U: E together with every cube touching it.
pub fn classify_cubes(u: &RClassMap, c: &Cubication, kp: f64, rho: f64, c_prime: f64, iota: f64) -> Result<CubeClassification> {
    let cells = c.cells();
    let energy: Vec<f64> = cells
        .par_iter()
        .map(|k| cube_energy(u, c, k, kp, rho, c_prime))
        .collect::<Result<_>>()?;
    let m = c.m;
    let bad: Vec<[i64; MAX_DIM]> = cells.iter().zip(&energy).filter(|(_, &e)| e > iota).map(|(k, _)| *k).collect();
    let mut enlarged = std::collections::BTreeSet::new();
    let top = c.n as i64 - 1;
    for k in &bad {
        let lo = std::array::from_fn(|i| if i < m { (k[i] - 1).max(0) } else { 0 });
        let hi = std::array::from_fn(|i| if i < m { (k[i] + 1).min(top) } else { 0 });
        enlarged.extend(lattice_box(m, lo, hi));
    }
    let mut bad = bad;
    bad.sort();
    Ok(CubeClassification { bad, enlarged: enlarged.into_iter().collect(), energy })
}

/// Exact Lebesgue measure of a union of boxes by coordinate compression.
pub fn union_measure(boxes: &[Aabb]) -> f64 {
    if boxes.is_empty() {
        return 0.0;
    }
    let m = boxes[0].m;
    let mut coords: Vec<Vec<f64>> = (0..m)
        .map(|a| {
            let mut v: Vec<f64> = boxes.iter().flat_map(|b| [b.lo[a], b.hi[a]]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    for v in coords.iter_mut() {
        if v.len() < 2 {
            return 0.0;
        }
    }
    let hi: [i64; MAX_DIM] = std::array::from_fn(|a| if a < m { coords[a].len() as i64 - 2 } else { 0 });
    lattice_box(m, [0; MAX_DIM], hi)
        .into_par_iter()
        .map(|ix| {
            let mut mid = [0.0; MAX_DIM];
            let mut vol = 1.0;
            for a in 0..m {
                let (l, h) = (coords[a][ix[a] as usize], coords[a][ix[a] as usize + 1]);
                mid[a] = 0.5 * (l + h);
                vol *= h - l;
            }
            if boxes.iter().any(|b| b.contains(&mid)) {
                vol
            } else {
                0.0
            }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_r_class_example, ExampleKind};
    use crate::geometry::build_cubication;
    use crate::manifold::TargetManifold;

    #[test]
    fn constant_map_has_no_bad_cubes() {
        let u = make_r_class_example(ExampleKind::Constant, 2, &TargetManifold::circle(), 1).unwrap();
        let c = build_cubication(2, &[0.0; 2], 1.5, 0.25).unwrap();
        let cl = classify_cubes(&u, &c, 1.5, 0.2, 1.0, 0.5).unwrap();
        assert!(cl.bad.is_empty() && cl.enlarged.is_empty());
    }

    #[test]
    fn hedgehog_center_cubes_are_bad() {
        let u = make_r_class_example(ExampleKind::Hedgehog, 2, &TargetManifold::circle(), 1).unwrap();
        let c = build_cubication(2, &[0.0; 2], 1.5, 0.0625).unwrap();
        let cl = classify_cubes(&u, &c, 1.5, 0.2, 1.0, 0.5).unwrap();
        for k in [[11, 11, 0, 0], [11, 12, 0, 0], [12, 11, 0, 0], [12, 12, 0, 0]] {
            assert!(cl.is_bad(&k), "{:?}", cl.bad);
        }
        assert!(!cl.is_bad(&[0, 0, 0, 0]));
        assert!(cl.bad.iter().all(|k| cl.in_enlarged(k)));
        assert!(cl.enlarged.len() > cl.bad.len());
        // energy is scale invariant for kp < m: the bad count does not grow with 1/η
        let coarse = build_cubication(2, &[0.0; 2], 1.5, 0.125).unwrap();
        let cc = classify_cubes(&u, &coarse, 1.5, 0.2, 1.0, 0.5).unwrap();
        assert!(cl.bad.len() <= cc.bad.len() + 8, "{} vs {}", cl.bad.len(), cc.bad.len());
        let none = classify_cubes(&u, &c, 1.5, 0.2, 1.0, f64::INFINITY).unwrap();
        assert!(none.bad.is_empty());
    }

    #[test]
    fn union_measure_of_overlapping_squares() {
        let a = Aabb::new(2, [0.0, 0.0, 0.0, 0.0], [2.0, 2.0, 0.0, 0.0]);
        let b = Aabb::new(2, [1.0, 1.0, 0.0, 0.0], [3.0, 3.0, 0.0, 0.0]);
        assert!((union_measure(&[a, b]) - 7.0).abs() < 1e-12);
    }
}
