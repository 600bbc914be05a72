use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use serde_json::json;

use super::criteria::Check;
use super::fixtures::{curve_lattice, segment_samples};
use super::Outcome;
use crate::beta::{baup_test, beta_content, beta_inf, bilateral_beta, blwg_sum, linear_deviation, BetaParams};
use crate::corona::{corona_decompose, find_corkscrew, frostman_regularize, verify_tree_densities, CoronaParams, PoleMode};
use crate::cubes::{build_cubes, build_nets, stopping_region, CubeId};
use crate::domains::{koch_snowflake, BallDomain, CantorSpec, HalfSpace, PolygonDomain, Slab};
use crate::error::Result;
use crate::geometry::{hausdorff_content, normalized_distance, plane_distance_stats, Ball, Plane, Point, SampledSet, DEFAULT_DEPTH};
use crate::green_dev::{affine_deviation_integral, gamma_coefficient, whitney_cubes, AnalyticGreen, DeviationParams, WhitneyCube};
use crate::harmonic::{density, hruscev_bound, log_integral, wos_green, wos_measure, Domain, Pole, Target, WosConfig};

type Trivial = fn() -> Result<(bool, String)>;

fn ball(x: f64, y: f64, r: f64) -> Result<Ball> {
    Ball::new(Point::xy(x, y), r)
}

fn axis() -> Plane {
    Plane::line(Point::xy(0.0, 0.0), 0.0)
}

fn segment_content() -> Result<(bool, String)> {
    let s = segment_samples(1e-3)?;
    let c = hausdorff_content(&s, &ball(0.5, 0.0, 1.0)?, 1, DEFAULT_DEPTH);
    let empty = hausdorff_content(&s, &ball(5.0, 5.0, 1.0)?, 1, DEFAULT_DEPTH);
    Ok(((c - 1.0).abs() <= 0.05 && empty == 0.0, format!("segment {c:.4}, empty {empty}")))
}

fn identical_sets_are_at_distance_zero() -> Result<(bool, String)> {
    let s = segment_samples(1e-2)?;
    let d = normalized_distance(&s, &s, &ball(0.5, 0.0, 1.0)?);
    Ok((d.value == 0.0, format!("{}", d.value)))
}

fn points_on_the_plane_have_empty_profile() -> Result<(bool, String)> {
    let s = segment_samples(1e-2)?;
    let p = plane_distance_stats(&s, &ball(0.5, 0.0, 1.0)?, &axis(), DEFAULT_DEPTH);
    let single = SampledSet::new(vec![0.0, 0.3], 2, 1e-3, 1)?;
    let q = plane_distance_stats(&single, &ball(0.0, 0.0, 1.0)?, &axis(), DEFAULT_DEPTH);
    let ok = p.max_dist == 0.0 && p.content.iter().all(|&c| c == 0.0) && q.content.iter().all(|&c| c == 0.0);
    Ok((ok, format!("max {} / point content {:?}", p.max_dist, q.content)))
}

fn singleton_nets_and_one_level_cubes() -> Result<(bool, String)> {
    let one = Arc::new(SampledSet::new(vec![0.25, 0.0], 2, 0.01, 1)?);
    let nets = build_nets(&one, 0.5, 5)?;
    let singleton = nets.levels.iter().all(|l| l == &vec![0]);
    let s = Arc::new(segment_samples(1e-2)?);
    let lat = build_cubes(&build_nets(&s, 0.5, 1)?, s.clone())?;
    let mut covered: Vec<usize> = lat.ids().filter(|q| q.level == 1).flat_map(|q| lat.cube(q).members.clone()).collect();
    covered.sort();
    Ok((singleton && covered == (0..s.len()).collect::<Vec<_>>(), format!("{} level-1 cubes", lat.ids().filter(|q| q.level == 1).count())))
}

fn never_stopping_keeps_all_cubes() -> Result<(bool, String)> {
    let lat = curve_lattice(segment_samples(1e-2)?, 3)?;
    let r = stopping_region(&lat, CubeId::new(0, 0), |_| false);
    let ok = r.cubes.len() == lat.ids().count() && r.minimal.iter().all(|q| q.level == 3);
    Ok((ok, format!("{} cubes", r.cubes.len())))
}

fn flat_sets_have_zero_beta() -> Result<(bool, String)> {
    let s = segment_samples(1e-3)?;
    let b = ball(0.5, 0.0, 0.4)?;
    let content = beta_content(&s, &b, &axis(), 2.0);
    let (inf, _) = beta_inf(&s, &b, 2.0, 30);
    let (bil, _) = bilateral_beta(&s, &b, 30);
    Ok((content == 0.0 && inf <= 1e-9 && bil <= 1e-2, format!("content {content}, inf {inf:.1e}, bilateral {bil:.1e}")))
}

fn thin_band_bounds_beta() -> Result<(bool, String)> {
    let n = 400;
    let coords: Vec<f64> = (0..=n).flat_map(|i| [i as f64 / n as f64, if i % 2 == 0 { 0.05 } else { -0.05 }]).collect();
    let s = SampledSet::new(coords, 2, 1.0 / n as f64, 1)?;
    let b = ball(0.5, 0.0, 0.5)?;
    let beta = beta_content(&s, &b, &axis(), 2.0);
    let bound = (hausdorff_content(&s, &b, 1, DEFAULT_DEPTH) * 0.1f64.powi(2) / 2.0 / b.radius).sqrt();
    Ok((beta <= bound * (1.0 + 1e-9), format!("{beta:.4} <= {bound:.4}")))
}

fn segment_deviation_and_blwg() -> Result<(bool, String)> {
    let lat = curve_lattice(segment_samples(1e-3)?, 4)?;
    let root = CubeId::new(0, 0);
    let rep = linear_deviation(&lat, root, &BetaParams { budget: 20, ..BetaParams::default() })?;
    let inner = lat.owner(3, lat.source.nearest(&[0.5, 0.0]).map(|n| n.0).unwrap_or(0));
    let blwg = blwg_sum(&lat, &rep.records, inner, 0.05);
    let ok = (rep.total - 1.0).abs() < 1e-6 && blwg == 0.0;
    Ok((ok, format!("total {:.6}, interior BLWG {blwg}", rep.total)))
}

fn single_plane_passes_baup() -> Result<(bool, String)> {
    let s = segment_samples(1e-3)?;
    let r = baup_test(&s, &ball(0.5, 0.0, 0.3)?, 0.02, 1, 30);
    Ok((r.passes, format!("achieved {:.2e}", r.achieved)))
}

fn disk_quarters() -> Result<(bool, String)> {
    let disk = BallDomain::unit_disk();
    let chord = 2.0 * (PI / 8.0).sin();
    let targets: Vec<Target> = (0..4)
        .map(|k| {
            let t = PI / 4.0 + k as f64 * PI / 2.0;
            Ok(Target::ball(format!("q{k}"), ball(t.cos(), t.sin(), chord)?))
        })
        .collect::<Result<_>>()?;
    let est = wos_measure(&disk, &Pole::point(&[0.0, 0.0]), &targets, &WosConfig::new(20_000, 1))?;
    let ok = est.targets.iter().all(|t| (t.mass - 0.25).abs() <= 3.0 * t.stderr);
    Ok((ok, format!("{:?}", est.targets.iter().map(|t| t.mass).collect::<Vec<_>>())))
}

fn green_vanishes_and_is_symmetric() -> Result<(bool, String)> {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(20_000, 2);
    let (edge, se_edge) = wos_green(&disk, &[0.0, 0.0], &[1.0 - 1e-5, 0.0], &cfg)?;
    let (a, sa) = wos_green(&disk, &[0.2, 0.1], &[-0.4, 0.3], &cfg)?;
    let (b, sb) = wos_green(&disk, &[-0.4, 0.3], &[0.2, 0.1], &cfg.with_seed(3))?;
    let ok = edge.abs() <= 3.0 * se_edge + 1e-4 && (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt() + 1e-12;
    Ok((ok, format!("edge {edge:.2e}, G(p,q) {a:.5} vs G(q,p) {b:.5}")))
}

fn density_arithmetic() -> Result<(bool, String)> {
    let (a, _) = density(0.3, 0.0, 0.5, 1)?;
    let (b, _) = density(0.3, 0.0, 1.0, 1)?;
    let (z, _) = density(0.0, 0.0, 1.0, 1)?;
    Ok((a == 2.0 * b && z == 0.0, format!("{a} vs {b}")))
}

fn doubling_ratio_at_least_one() -> Result<(bool, String)> {
    let disk = BallDomain::unit_disk();
    let boundary = disk.boundary_samples(1e-2)?;
    let rep = crate::harmonic::check_doubling(&disk, &boundary, &[ball(1.0, 0.0, 0.2)?], 0.3, 2.0, 3, &WosConfig::new(2_000, 4))?;
    Ok((rep.entries.iter().all(|e| e.ratio >= 1.0), format!("max {:.3}", rep.max_ratio)))
}

fn constant_density_log_integral() -> Result<(bool, String)> {
    let disk = BallDomain::unit_disk();
    let lat = curve_lattice(disk.boundary_samples(2e-3)?, 4)?;
    let root = lat.ids().find(|q| q.level == 2).unwrap_or(CubeId::new(0, 0));
    let li = log_integral(&disk, &lat, root, &Pole::point(&[0.0, 0.0]), 2, 1.0, &WosConfig::new(20_000, 5))?;
    Ok(((li.value - 1.0).abs() < 0.05, format!("{:.4}", li.value)))
}

fn hruscev_limits() -> Result<(bool, String)> {
    let flat = hruscev_bound(1.0, 1.0, 0.0, 2.0)?;
    let thin = hruscev_bound(1.0, 1e-6, 0.0, 2.0)?;
    Ok((flat == (-2.0f64).exp() && thin < 1e-100, format!("{flat:.5}, {thin:.1e}")))
}

fn corkscrews() -> Result<(bool, String)> {
    let b = ball(0.0, 0.0, 1.0)?;
    let x = find_corkscrew(&HalfSpace::plane(4.0), &b, 0.2);
    let none = find_corkscrew(&Slab { width: 0.1, window: 4.0 }, &b, 0.05).is_none();
    let ok = x.as_ref().is_some_and(|x| (x[1] - 0.5).abs() <= 0.1) && none;
    Ok((ok, format!("{x:?}")))
}

fn flat_corona_and_adversarial_verification() -> Result<(bool, String)> {
    let hp = HalfSpace::plane(4.0);
    let lat = curve_lattice(hp.boundary_samples(4e-3)?, 4)?;
    let root = lat.owner(2, lat.source.nearest(&[0.0, 0.0]).map(|n| n.0).unwrap_or(0));
    let recs = crate::beta::beta_table(&lat, root, &BetaParams { budget: 20, c0: 3.0, ..BetaParams::default() });
    let cfg = WosConfig::new(2_000, 6);
    let res = corona_decompose(&hp, &lat, &recs, root, &CoronaParams::default(), &cfg)?;
    let mut hostile = res.clone();
    hostile.params.a /= 100.0;
    let rep = verify_tree_densities(&hostile, &hp, &lat, &PoleMode::PerTree, 30, &cfg)?;
    let ok = res.packing >= lat.cube(root).side && !rep.failures.is_empty();
    Ok((ok, format!("packing {:.4}, {} injected failures", res.packing, rep.failures.len())))
}

fn single_bottom_cube_is_unchanged() -> Result<(bool, String)> {
    let lat = curve_lattice(segment_samples(1e-2)?, 3)?;
    let q = lat.ids().find(|q| q.level == 3).unwrap_or(CubeId::new(0, 0));
    let w = lat.cube(q).side;
    let nu = frostman_regularize(&lat, &BTreeMap::from([(q, w)]), CubeId::new(0, 0))?;
    Ok((nu.fc.is_empty() && nu.total() == w, format!("{} Frostman cubes", nu.fc.len())))
}

fn whitney_cubes_are_disjoint() -> Result<(bool, String)> {
    let disk = BallDomain::unit_disk();
    let cubes = whitney_cubes(&disk, &WhitneyCube { corner: vec![-1.0, -1.0], side: 2.0 }, 4.0, 1.0 / 64.0)?;
    let overlap = cubes.iter().enumerate().any(|(i, a)| {
        cubes[i + 1..].iter().any(|b| (0..2).all(|k| a.corner[k] < b.corner[k] + b.side && b.corner[k] < a.corner[k] + a.side))
    });
    Ok((!overlap && !cubes.is_empty(), format!("{} cubes", cubes.len())))
}

fn affine_and_scaled_fields() -> Result<(bool, String)> {
    let sq = PolygonDomain::new(vec![[1.5, -0.5], [2.5, -0.5], [2.5, 0.5], [1.5, 0.5]])?;
    let root = WhitneyCube { corner: vec![1.5, -0.5], side: 1.0 };
    let p = DeviationParams { min_side: 1.0 / 32.0, ..DeviationParams::default() };
    let affine = AnalyticGreen { g: |x: &[f64]| 1.0 + x[0] + 2.0 * x[1], dim: 2 };
    let a = affine_deviation_integral(&sq, &affine, &root, None, &p)?.value;
    let hp = HalfSpace::plane(2.0);
    let lat = curve_lattice(hp.boundary_samples(4e-3)?, 3)?;
    let whitney = whitney_cubes(&hp, &WhitneyCube { corner: vec![-2.0, 0.0], side: 4.0 }, 4.0, 1.0 / 64.0)?;
    let q = lat.owner(2, lat.source.nearest(&[0.0, 0.0]).map(|n| n.0).unwrap_or(0));
    let one = AnalyticGreen { g: |x: &[f64]| x[1] * x[1] - x[0] * x[0] + 3.0 * x[1], dim: 2 };
    let two = AnalyticGreen { g: |x: &[f64]| 2.0 * (x[1] * x[1] - x[0] * x[0] + 3.0 * x[1]), dim: 2 };
    let g1 = gamma_coefficient(&one, &whitney, &lat, q, 2.0)?;
    let g2 = gamma_coefficient(&two, &whitney, &lat, q, 2.0)?;
    let linear = AnalyticGreen { g: |x: &[f64]| x[1], dim: 2 };
    let g0 = gamma_coefficient(&linear, &whitney, &lat, q, 2.0)?;
    let ok = a == 0.0 && (g1 - g2).abs() <= 1e-9 * g1.abs().max(1e-300) && g0 == 0.0;
    Ok((ok, format!("affine {a}, γ(g) {g1:.5} vs γ(2g) {g2:.5}, γ(y) {g0}")))
}

fn generator_closed_forms() -> Result<(bool, String)> {
    let spec = CantorSpec::new(3)?;
    let counts = spec.leaves().len() == 64 && spec.leaves().iter().all(|s| s.side == 0.25f64.powi(3));
    let sq = PolygonDomain::square(1.0);
    let centre = (sq.dist_boundary(&[0.0, 0.0]) - 0.5).abs() < 1e-15;
    let flake = koch_snowflake(2)?;
    let perimeter = (flake.perimeter() - 3.0 * (4.0f64 / 3.0).powi(2)).abs() < 1e-12;
    Ok((counts && centre && perimeter, format!("perimeter {:.12}", flake.perimeter())))
}

const CHECKS: [(&str, Trivial); 21] = [
    ("content of a segment and of an empty ball", segment_content),
    ("distance of a set to itself", identical_sets_are_at_distance_zero),
    ("profile of points on the plane", points_on_the_plane_have_empty_profile),
    ("singleton nets and one-level cubes", singleton_nets_and_one_level_cubes),
    ("stopping predicate that never fires", never_stopping_keeps_all_cubes),
    ("β of a flat set", flat_sets_have_zero_beta),
    ("β of a thin band", thin_band_bounds_beta),
    ("deviation and BLWG of a segment", segment_deviation_and_blwg),
    ("union of planes on a single plane", single_plane_passes_baup),
    ("quarter arcs of the disk", disk_quarters),
    ("Green function at the boundary and symmetry", green_vanishes_and_is_symmetric),
    ("density arithmetic", density_arithmetic),
    ("doubling ratios are at least one", doubling_ratio_at_least_one),
    ("log-integral for constant density", constant_density_log_integral),
    ("Hruščev bound limits", hruscev_limits),
    ("corkscrew points in a half-plane and a slab", corkscrews),
    ("corona packing and injected violations", flat_corona_and_adversarial_verification),
    ("Frostman cascade of one cube", single_bottom_cube_is_unchanged),
    ("Whitney cubes are disjoint", whitney_cubes_are_disjoint),
    ("affine and rescaled Green fields", affine_and_scaled_fields),
    ("generator closed forms", generator_closed_forms),
];

pub(super) fn run(report: &mut dyn FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (k, (title, f)) in CHECKS.iter().enumerate() {
        let start = Instant::now();
        let check = match f() {
            Ok((passed, detail)) => Check { passed, artifact: json!({"detail": detail}), detail },
            Err(e) => Check { passed: false, detail: format!("error: {e}"), artifact: json!({"error": e.to_string()}) },
        };
        let o = Outcome {
            id: format!("T{}", k + 1),
            title: (*title).into(),
            passed: check.passed,
            detail: check.detail,
            artifact: check.artifact,
            seconds: start.elapsed().as_secs_f64(),
        };
        report(&o);
        out.push(o);
    }
    out
}
