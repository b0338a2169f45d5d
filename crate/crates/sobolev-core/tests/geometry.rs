use proptest::prelude::*;
use sobolev_core::geometry::build_cubication;
use sobolev_core::{Point, MAX_DIM};

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn pad(v: &[f64]) -> Point {
    std::array::from_fn(|i| v.get(i).copied().unwrap_or(0.0))
}

#[test]
fn face_counts_match_the_product_formula() {
    for m in 1..=3 {
        for n in 1..=3usize {
            let c = build_cubication(m, &[0.0; MAX_DIM], 1.0, 1.0 / n as f64).unwrap();
            for l in 0..=m {
                let want = binom(m, l) * n.pow(l as u32) * (n + 1).pow((m - l) as u32);
                assert_eq!(c.skeleton_faces(l).unwrap().len(), want, "m={m} n={n} l={l}");
            }
        }
    }
}

#[test]
fn skeleton_above_m_is_rejected() {
    let c = build_cubication(2, &[0.0; MAX_DIM], 1.0, 0.5).unwrap();
    assert!(c.skeleton_faces(3).is_err());
}

#[test]
fn dual_faces_of_one_cell() {
    let c = build_cubication(3, &[0.0; MAX_DIM], 1.0, 0.5).unwrap();
    let cell = [[1, 0, 1, 0]];
    // the center, the six segments from it to the facet centers, the twelve plaquettes
    assert_eq!(c.dual_faces_of_cells(&cell, 2).unwrap().len(), 1);
    assert_eq!(c.dual_faces_of_cells(&cell, 1).unwrap().len(), 6);
    assert_eq!(c.dual_faces_of_cells(&cell, 0).unwrap().len(), 12);
}

proptest! {
    #[test]
    fn cell_of_returns_the_containing_cell(x in prop::collection::vec(-1.0f64..1.0, 3), m in 1usize..=3, n in 1usize..=5) {
        let eta = 1.0 / n as f64;
        let c = build_cubication(m, &[0.0; MAX_DIM], 1.0, eta).unwrap();
        let x = pad(&x[..m]);
        let k = c.cell_of(&x).expect("point of the domain");
        let ctr = c.cell_center(&k);
        for a in 0..m {
            prop_assert!((x[a] - ctr[a]).abs() <= eta * (1.0 + 1e-12));
        }
    }

    #[test]
    fn primal_and_dual_distances_sum_to_eta(x in prop::collection::vec(-1.0f64..1.0, 3), m in 1usize..=3, l in 0usize..3) {
        prop_assume!(l < m);
        let eta = 0.25;
        let c = build_cubication(m, &[0.0; MAX_DIM], 1.0, eta).unwrap();
        let x = pad(&x[..m]);
        let s = c.dist_to_primal(&x, l) + c.dist_to_dual(&x, l);
        prop_assert!((s - eta).abs() < 1e-12, "sum {s}");
    }

    #[test]
    fn nearest_dual_face_agrees_with_the_distance(x in prop::collection::vec(-1.0f64..1.0, 3), m in 2usize..=3, l in 0usize..2) {
        let c = build_cubication(m, &[0.0; MAX_DIM], 1.0, 0.25).unwrap();
        let x = pad(&x[..m]);
        let d = c.dist_to_dual(&x, l);
        let (_, e) = c.nearest_dual_face(&x, l, |_| true).unwrap();
        prop_assert!((d - e).abs() < 1e-12, "d={d} e={e}");
    }
}
