use sobolev_core::geometry::build_cubication;
use sobolev_core::pipeline::smooth::input_map;
use sobolev_core::pipeline::{
    approximate_nontrivial, approximate_smooth, classify_cubes, convergence_study, smooth_from_rclass, Mode, PipelineConfig,
};
use sobolev_core::{Error, Mapping, MAX_DIM};

fn cfg(extra: &str) -> PipelineConfig {
    PipelineConfig::parse(&format!("m = 2\nk = 1\np = 1.5\ntarget = s1\ninput = hedgehog\nresolution = 64\nsamples = 100\n{extra}")).unwrap()
}

#[test]
fn constant_input_is_reproduced() {
    let c = cfg("input = constant\neta = 0.25");
    let u = input_map(&c).unwrap();
    let run = approximate_nontrivial(&u, 0.25, &c).unwrap();
    assert!(run.classification.bad.is_empty());
    assert!(run.row.error < 1e-12, "error {}", run.row.error);
    assert_eq!(run.row.singular_points, 0);
}

#[test]
fn infinite_threshold_marks_no_cube_bad() {
    let c = cfg("eta = 0.25");
    let u = input_map(&c).unwrap();
    let cub = build_cubication(2, &[0.0; MAX_DIM], c.domain_half_width(), 0.25).unwrap();
    let cls = classify_cubes(&u, &cub, c.kp(), c.rho, c.c_prime, f64::INFINITY).unwrap();
    assert!(cls.bad.is_empty() && cls.enlarged.is_empty());
}

#[test]
fn map_without_singularities_is_left_alone() {
    let c = cfg("mode = smooth\ntarget = s2\ninput = smooth-sphere\neta = 0.25");
    let u = input_map(&c).unwrap();
    let run = approximate_nontrivial(&u, 0.25, &c).unwrap();
    let mut v = run.output.clone();
    v.singular.clear();
    let sm = smooth_from_rclass(&v, &run.grids.output, &run.cubication, &run.classification.enlarged, &c).unwrap();
    assert_eq!(sm.output.data, run.grids.output.data);
    assert!(sm.shrinking.is_none());
}

#[test]
fn circle_target_is_obstructed_in_smooth_mode() {
    let c = cfg("mode = smooth\neta = 0.25, 0.125, 0.0625");
    assert_eq!(c.mode, Mode::Smooth);
    let u = input_map(&c).unwrap();
    match approximate_smooth(&u, &c) {
        Err(Error::Config(msg)) => assert!(msg.contains("obstruction"), "{msg}"),
        other => panic!("expected a configuration error, got {:?}", other.map(|r| r.rows.len())),
    }
}

#[test]
fn study_needs_three_dyadic_scales() {
    assert!(matches!(convergence_study(&cfg("eta = 0.25, 0.125")), Err(Error::Config(_))));
    assert!(matches!(convergence_study(&cfg("eta = 0.5, 0.25, 0.0625")), Err(Error::Config(_))));
}

#[test]
fn stages_only_change_inside_their_supports() {
    let c = cfg("eta = 0.25");
    let u = input_map(&c).unwrap();
    let run = approximate_nontrivial(&u, 0.25, &c).unwrap();
    let g = &run.grids;
    let mut moved = 0;
    for idx in 0..g.input.spec.len() {
        let x = g.input.spec.node(idx);
        if !run.opening.in_support(&x) {
            assert_eq!(run.opening.eval(&x).unwrap(), x);
            assert_eq!(g.opened.value(idx), g.input.value(idx));
        } else {
            moved += 1;
        }
        if !run.thickening.in_support(&x) {
            assert_eq!(run.thickening.eval(&x).unwrap(), x);
            assert_eq!(g.thickened.value(idx), g.smoothed.value(idx));
        }
    }
    assert!(moved > 0);
}

#[test]
fn output_lies_on_the_target() {
    let c = cfg("eta = 0.125");
    let u = input_map(&c).unwrap();
    let run = approximate_nontrivial(&u, 0.125, &c).unwrap();
    assert!(run.row.max_residual < 1e-12);
    assert!(run.row.tube < 0.5);
}
