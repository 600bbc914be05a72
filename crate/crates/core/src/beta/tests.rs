use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::cubes::{build_cubes, build_nets, CubeId};
use crate::geometry::{Point, SampledSet};

fn segment_cloud(a: [f64; 2], b: [f64; 2], n: usize) -> Vec<f64> {
    (0..=n)
        .flat_map(|i| {
            let t = i as f64 / n as f64;
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect()
}

fn circle(n: usize, radius: f64) -> SampledSet {
    let coords = (0..n)
        .flat_map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect();
    SampledSet::new(coords, 2, 2.0 * std::f64::consts::PI * radius / n as f64 * 1.001, 1).unwrap()
}

fn corner(n: usize) -> SampledSet {
    let mut c = segment_cloud([0.0, 0.0], [1.0, 0.0], n);
    c.extend(segment_cloud([0.0, 0.0], [0.0, 1.0], n));
    SampledSet::new(c, 2, 1.0 / n as f64, 1).unwrap()
}

fn half_line(n: usize) -> SampledSet {
    SampledSet::new(segment_cloud([0.0, 0.0], [1.0, 0.0], n), 2, 1.0 / n as f64, 1).unwrap()
}

fn unit_ball(c: [f64; 2], r: f64) -> Ball {
    Ball::new(Point::xy(c[0], c[1]), r).unwrap()
}

/// Minimum of `f` over lines `{x·(−sin θ, cos θ) = s}` on a regular grid.
fn line_grid_min(angles: usize, offsets: usize, ball: &Ball, f: impl Fn(&Plane) -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..angles {
        let theta = std::f64::consts::PI * a as f64 / angles as f64;
        let nrm = [-theta.sin(), theta.cos()];
        for o in 0..offsets {
            let s = -ball.radius + 2.0 * ball.radius * (o as f64 + 0.5) / offsets as f64;
            let base = Point::xy(ball.center[0] + s * nrm[0], ball.center[1] + s * nrm[1]);
            best = best.min(f(&Plane::line(base, theta)));
        }
    }
    best
}

const CIRCLE_BETA: f64 = 0.8193649419928618;
const CORNER_BETA: f64 = 0.18683166841839002;
const HALF_LINE_BBETA: f64 = 0.7092073039669008;

#[test]
#[ignore = "brute-force oracle; run to regenerate the frozen constants"]
fn oracle_line_grids() {
    let c = circle(256, 1.0);
    let b = unit_ball([0.0, 0.0], 1.1);
    let v = line_grid_min(360, 200, &b, |l| beta_content(&c, &b, l, 2.0));
    println!("CIRCLE_BETA = {v:?}");
    assert_eq!(v, CIRCLE_BETA);
    let k = corner(100);
    let b = unit_ball([0.0, 0.0], 1.0);
    let v = line_grid_min(360, 200, &b, |l| beta_content(&k, &b, l, 2.0));
    println!("CORNER_BETA = {v:?}");
    assert_eq!(v, CORNER_BETA);
    let h = half_line(200);
    let pts = h.points_in_ball(&b);
    let v = line_grid_min(360, 200, &b, |l| bilateral_objective(&h, &pts, &b, l));
    println!("HALF_LINE_BBETA = {v:?}");
    assert_eq!(v, HALF_LINE_BBETA);
}

#[test]
fn flat_sets_have_zero_beta() {
    let s = SampledSet::new(segment_cloud([-1.0, 0.5], [1.0, 0.5], 400), 2, 0.005, 1).unwrap();
    let b = unit_ball([0.0, 0.5], 0.8);
    assert_eq!(beta_content(&s, &b, &Plane::line(Point::xy(0.0, 0.5), 0.0), 2.0), 0.0);
    let (v, plane) = beta_inf(&s, &b, 2.0, 30);
    assert_eq!(v, 0.0);
    assert!(plane.dist(&[0.3, 0.5]) < 1e-9);
}

#[test]
fn two_parallel_segments_match_closed_form() {
    let mut c = segment_cloud([-0.5, 0.2], [0.5, 0.2], 1000);
    c.extend(segment_cloud([-0.5, -0.2], [0.5, -0.2], 1000));
    let s = SampledSet::new(c, 2, 1e-3, 1).unwrap();
    let b = unit_ball([0.0, 0.0], 1.0);
    let v = beta_content(&s, &b, &Plane::line(Point::xy(0.0, 0.0), 0.0), 2.0);
    // profile ≡ diam of the union on [0, 0.2), then 0
    let closed = (1.16f64.sqrt() * 0.2f64.powi(2) / 2.0).sqrt();
    assert!((v - closed).abs() < 0.01 * closed, "{v} vs {closed}");
}

#[test]
fn thin_sets_obey_truncation_bound() {
    let s = SampledSet::new(segment_cloud([-0.6, 0.0], [0.6, 0.08], 600), 2, 0.002, 1).unwrap();
    let b = unit_ball([0.0, 0.0], 1.0);
    let l = Plane::line(Point::xy(0.0, 0.0), 0.0);
    let content = crate::geometry::hausdorff_content(&s, &b, 1, 8);
    let v = beta_content(&s, &b, &l, 2.0);
    assert!(v * v <= content * 0.1f64.powi(2) / 2.0 + 1e-12);
}

#[test]
fn circle_search_matches_grid_oracle() {
    let c = circle(256, 1.0);
    let b = unit_ball([0.0, 0.0], 1.1);
    let (v, _) = beta_inf(&c, &b, 2.0, 400);
    assert!(v > 0.0 && v <= 1.0);
    assert!((v - CIRCLE_BETA).abs() <= 0.05 * CIRCLE_BETA, "{v} vs {CIRCLE_BETA}");
}

#[test]
fn corner_search_matches_grid_oracle() {
    let k = corner(100);
    let b = unit_ball([0.0, 0.0], 1.0);
    let (v, _) = beta_inf(&k, &b, 2.0, 400);
    assert!((v - CORNER_BETA).abs() <= 0.05 * CORNER_BETA, "{v} vs {CORNER_BETA}");
}

#[test]
fn half_line_bilateral_matches_grid_oracle() {
    let h = half_line(200);
    let b = unit_ball([0.0, 0.0], 1.0);
    let (v, _) = bilateral_beta(&h, &b, 400);
    assert!(v >= 0.5);
    assert!((v - HALF_LINE_BBETA).abs() <= 0.05 * HALF_LINE_BBETA, "{v} vs {HALF_LINE_BBETA}");
}

#[test]
fn bilateral_of_plane_patch_is_zero() {
    let s = SampledSet::new(segment_cloud([-2.0, 0.0], [2.0, 0.0], 4000), 2, 1e-3, 1).unwrap();
    let (v, _) = bilateral_beta(&s, &unit_ball([0.0, 0.0], 1.0), 60);
    assert!(v <= 2e-3, "{v}");
}

#[test]
fn bilateral_on_empty_ball_is_one_sided() {
    let s = SampledSet::new(segment_cloud([5.0, 0.0], [6.0, 0.0], 100), 2, 0.01, 1).unwrap();
    let b = unit_ball([0.0, 0.0], 1.0);
    let (v, l) = bilateral_beta(&s, &b, 60);
    assert!(l.dist(&[0.0, 0.0]) < 1e-12);
    assert!(v >= 4.0);
}

#[test]
fn search_output_is_an_attained_value() {
    let k = corner(100);
    let b = unit_ball([0.1, 0.1], 0.9);
    let (v, l) = beta_inf(&k, &b, 2.0, 50);
    assert_eq!(beta_content(&k, &b, &l, 2.0), v);
}

#[test]
fn baup_separates_one_and_two_lines() {
    let mut c = segment_cloud([-1.0, -1.0], [1.0, 1.0], 400);
    c.extend(segment_cloud([-1.0, 1.0], [1.0, -1.0], 400));
    let s = SampledSet::new(c, 2, 0.006, 1).unwrap();
    let b = unit_ball([0.0, 0.0], 1.0);
    let two = baup_test(&s, &b, 0.05, 2, 8);
    assert!(two.passes, "{}", two.achieved);
    let one = baup_test(&s, &b, 0.05, 1, 8);
    assert!(!one.passes);
    assert!(one.achieved >= 0.5, "{}", one.achieved);
    let flat = SampledSet::new(segment_cloud([-2.0, 0.3], [2.0, 0.3], 800), 2, 0.005, 1).unwrap();
    assert!(baup_test(&flat, &unit_ball([0.0, 0.3], 1.0), 0.02, 1, 4).passes);
}

#[test]
fn segment_deviation_is_flat() {
    let s = Arc::new(SampledSet::new(segment_cloud([0.0, 0.0], [1.0, 0.0], 2000), 2, 5e-4, 1).unwrap());
    let lat = build_cubes(&build_nets(&s, 0.5, 6).unwrap(), s.clone()).unwrap();
    let root = CubeId::new(0, 0);
    let rep = linear_deviation(&lat, root, &BetaParams::default()).unwrap();
    let side = lat.cube(root).side;
    assert!(rep.beta_sum() <= 1e-4 * side, "{}", rep.beta_sum());
    let mut again = side;
    for c in &rep.per_cube {
        again += c.1;
    }
    assert_eq!(again, rep.total);
}

#[test]
fn interior_of_a_long_segment_has_no_bilateral_cubes() {
    let s = Arc::new(SampledSet::new(segment_cloud([-4.0, 0.0], [4.0, 0.0], 8000), 2, 1e-3, 1).unwrap());
    let lat = build_cubes(&build_nets(&s, 0.5, 6).unwrap(), s.clone()).unwrap();
    let root = lat.owner(3, s.nearest(&[0.0, 0.0]).unwrap().0);
    let recs = beta_table(&lat, root, &BetaParams { budget: 20, ..BetaParams::default() });
    assert_eq!(blwg_sum(&lat, &recs, root, 0.01), 0.0);
}

#[test]
fn circle_deviation_is_stable_under_refinement() {
    let c = Arc::new(circle(4000, 1.0));
    let nets = build_nets(&c, 0.5, 6).unwrap();
    let shallow = Nets { rho: nets.rho, diam: nets.diam, levels: nets.levels[..5].to_vec() };
    let root = CubeId::new(0, 0);
    let p = BetaParams { budget: 30, ..BetaParams::default() };
    let deep = linear_deviation(&build_cubes(&nets, c.clone()).unwrap(), root, &p).unwrap();
    let coarse = linear_deviation(&build_cubes(&shallow, c.clone()).unwrap(), root, &p).unwrap();
    let rel = (deep.total - coarse.total).abs() / deep.total;
    assert!(rel <= 0.1, "{} vs {}", deep.total, coarse.total);
}

use crate::cubes::Nets;

fn rot90(p: &[f64], q: u8) -> [f64; 2] {
    match q % 4 {
        0 => [p[0], p[1]],
        1 => [-p[1], p[0]],
        2 => [-p[0], -p[1]],
        _ => [p[1], -p[0]],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn beta_is_invariant_under_lattice_motions(
        pts in proptest::collection::vec((-0.9f64..0.9, -0.3f64..0.3), 10..80),
        q in 0u8..4, tx in -3.0f64..3.0, ty in -3.0f64..3.0, e in -2i32..3,
    ) {
        let lambda = 2f64.powi(e);
        let coords: Vec<f64> = pts.iter().flat_map(|p| [p.0, p.1]).collect();
        let s = SampledSet::new(coords, 2, 0.01, 1).unwrap();
        let b = unit_ball([0.05, 0.0], 1.0);
        let l = Plane::line(Point::xy(0.0, 0.02), 0.1);
        let v = beta_content(&s, &b, &l, 2.0);
        let map = |p: &[f64]| { let r = rot90(p, q); [lambda * r[0] + tx, lambda * r[1] + ty] };
        let moved: Vec<f64> = s.points().flat_map(|p| map(p)).collect();
        let sm = SampledSet::new(moved, 2, 0.01 * lambda, 1).unwrap();
        let bc = map(&b.center);
        let bm = unit_ball(bc, lambda);
        let dir = rot90(&l.basis[0], q);
        let lm = Plane::new(Point::xy(map(&l.base)[0], map(&l.base)[1]), vec![dir.to_vec()]).unwrap();
        let vm = beta_content(&sm, &bm, &lm, 2.0);
        prop_assert!((v - vm).abs() <= 1e-9, "{} vs {}", v, vm);
    }

    #[test]
    fn beta_is_monotone_in_the_set(
        pts in proptest::collection::vec((-0.9f64..0.9, -0.5f64..0.5), 4..60),
        keep in proptest::collection::vec(any::<bool>(), 60),
    ) {
        let all: Vec<f64> = pts.iter().flat_map(|p| [p.0, p.1]).collect();
        let sub: Vec<f64> = pts.iter().zip(&keep).filter(|(_, k)| **k).flat_map(|(p, _)| [p.0, p.1]).collect();
        prop_assume!(!sub.is_empty());
        let s = SampledSet::new(all, 2, 0.01, 1).unwrap();
        let t = SampledSet::new(sub, 2, 0.01, 1).unwrap();
        let b = unit_ball([0.0, 0.0], 1.0);
        let l = Plane::line(Point::xy(0.0, 0.0), 0.0);
        prop_assert!(beta_content(&t, &b, &l, 2.0) <= beta_content(&s, &b, &l, 2.0) * (1.0 + 1e-12));
    }
}

#[test]
fn blwg_is_non_increasing_in_epsilon() {
    let k = Arc::new(corner(400));
    let lat = build_cubes(&build_nets(&k, 0.5, 4).unwrap(), k.clone()).unwrap();
    let root = CubeId::new(0, 0);
    let recs = beta_table(&lat, root, &BetaParams { budget: 20, ..BetaParams::default() });
    let mut prev = f64::INFINITY;
    for i in 1..=40 {
        let v = blwg_sum(&lat, &recs, root, i as f64 * 0.05);
        assert!(v <= prev);
        prev = v;
    }
    assert!(blwg_sum(&lat, &recs, root, 0.05) > 0.0);
}
