use std::f64::consts::{PI, TAU};

use super::*;
use crate::domains::{four_corner_cantor, BallDomain, HalfSpace};
use crate::geometry::{Ball, Point};

fn arc_target(id: &str, t0: f64, len: f64) -> Target {
    let n = 400;
    let points = (0..=n)
        .map(|i| {
            let t = t0 + len * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    Target { id: id.into(), region: Region::Cloud { points, tolerance: len / n as f64 } }
}

fn within(est: f64, truth: f64, se: f64, k: f64) -> bool {
    (est - truth).abs() <= k * se.max(1e-12)
}

#[test]
fn disk_quarter_arcs_are_equal() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(20_000, 1);
    let targets: Vec<Target> = (0..4).map(|k| arc_target(&format!("q{k}"), k as f64 * PI / 2.0, PI / 2.0)).collect();
    let est = wos_measure(&disk, &Pole::point(&[0.0, 0.0]), &targets, &cfg).unwrap();
    for t in &est.targets {
        assert!(within(t.mass, 0.25, t.stderr, 4.0), "{t:?}");
    }
    assert!((est.total() - 1.0).abs() < 1e-9);
}

#[test]
fn half_plane_interval_is_one_half() {
    let hp = HalfSpace::plane(10.0);
    let cfg = WosConfig::new(20_000, 2);
    let t = Target::ball("I", Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap());
    let est = wos_measure(&hp, &Pole::point(&[0.0, 1.0]), &[t], &cfg).unwrap();
    let m = &est.targets[0];
    assert!(within(m.mass, 0.5, m.stderr, 4.0), "{m:?}");
}

#[test]
fn disk_arcs_match_their_angle() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(20_000, 3);
    for theta in [PI / 6.0, PI / 3.0] {
        let est = wos_measure(&disk, &Pole::point(&[0.0, 0.0]), &[arc_target("a", 0.4, theta)], &cfg).unwrap();
        let m = &est.targets[0];
        assert!(within(m.mass, theta / TAU, m.stderr, 4.0), "{theta} {m:?}");
    }
}

#[test]
fn nested_targets_are_monotone() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(5_000, 4);
    let small = Target::ball("s", Ball::new(Point::xy(1.0, 0.0), 0.3).unwrap());
    let large = Target::ball("l", Ball::new(Point::xy(1.0, 0.0), 0.6).unwrap());
    let a = wos_measure(&disk, &Pole::point(&[0.2, 0.1]), &[small], &cfg).unwrap();
    let b = wos_measure(&disk, &Pole::point(&[0.2, 0.1]), &[large], &cfg).unwrap();
    assert!(a.targets[0].mass <= b.targets[0].mass);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(3_000, 5);
    let t = [Target::ball("b", Ball::new(Point::xy(0.0, 1.0), 0.5).unwrap())];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| wos_measure(&disk, &Pole::point(&[0.1, 0.0]), &t, &cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn doubling_walkers_shrinks_stderr() {
    let disk = BallDomain::unit_disk();
    let t = [Target::ball("b", Ball::new(Point::xy(0.0, 1.0), 0.5).unwrap())];
    let a = wos_measure(&disk, &Pole::point(&[0.0, 0.0]), &t, &WosConfig::new(4_000, 6)).unwrap();
    let b = wos_measure(&disk, &Pole::point(&[0.0, 0.0]), &t, &WosConfig::new(8_000, 6)).unwrap();
    let r = a.targets[0].stderr / b.targets[0].stderr;
    assert!((r / 2f64.sqrt() - 1.0).abs() < 0.1, "{r}");
}

#[test]
fn rotated_disk_targets_agree() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(10_000, 7);
    let a = wos_measure(&disk, &Pole::point(&[0.3, 0.0]), &[arc_target("a", -0.5, 1.0)], &cfg).unwrap();
    let b = wos_measure(&disk, &Pole::point(&[0.0, 0.3]), &[arc_target("a", PI / 2.0 - 0.5, 1.0)], &cfg.with_seed(8)).unwrap();
    let (ma, mb) = (&a.targets[0], &b.targets[0]);
    assert!((ma.mass - mb.mass).abs() <= 3.0 * (ma.stderr.hypot(mb.stderr)));
    let truth = exact::disk_arc([0.3, 0.0], -0.5, 1.0);
    assert!(within(ma.mass, truth, ma.stderr, 4.0));
}

#[test]
fn moving_the_pole_inside_a_harnack_ball_changes_little() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(10_000, 9);
    let t = [arc_target("far", PI - 0.3, 0.6)];
    let a = wos_measure(&disk, &Pole::point(&[0.5, 0.0]), &t, &cfg).unwrap();
    let b = wos_measure(&disk, &Pole::point(&[0.7, 0.1]), &t, &cfg).unwrap();
    let ratio = a.targets[0].mass / b.targets[0].mass;
    assert!(ratio > 0.1 && ratio < 10.0);
}

#[test]
fn green_function_of_the_disk() {
    let disk = BallDomain::unit_disk();
    let cfg = WosConfig::new(20_000, 10);
    let (g, se) = wos_green(&disk, &[0.0, 0.0], &[0.5, 0.0], &cfg).unwrap();
    assert!(within(g, 2f64.ln() / TAU, se, 4.0), "{g} {se}");
    let (p, q) = ([0.3, 0.1], [-0.2, 0.4]);
    let (g1, s1) = wos_green(&disk, &p, &q, &cfg).unwrap();
    let (g2, s2) = wos_green(&disk, &q, &p, &cfg).unwrap();
    assert!((g1 - g2).abs() <= 3.0 * s1.hypot(s2));
    let (g0, s0) = wos_green(&disk, &[0.0, 0.0], &[1.0 - 2e-4, 0.0], &cfg).unwrap();
    assert!(g0.abs() <= s0 + 1e-3, "{g0}");
    assert!(wos_green(&disk, &[0.0, 0.0], &[0.0, 0.0], &cfg).is_err());
    assert!(matches!(wos_green(&disk, &[2.0, 0.0], &[0.0, 0.1], &cfg), Err(crate::Error::PoleOutsideDomain)));
}

#[test]
fn pole_outside_is_rejected() {
    let disk = BallDomain::unit_disk();
    let r = wos_measure(&disk, &Pole::point(&[1.5, 0.0]), &[], &WosConfig::new(10, 0));
    assert!(matches!(r, Err(crate::Error::PoleOutsideDomain)));
}

#[test]
fn exterior_reinsertion_preserves_cantor_symmetry() {
    let (_, dom) = four_corner_cantor(1, 0.01).unwrap();
    let cfg = WosConfig::for_domain(&dom, 8_000, 11);
    let targets: Vec<Target> = dom
        .spec
        .squares(1)
        .iter()
        .enumerate()
        .map(|(k, s)| Target::ball(format!("{k}"), Ball::new(Point::xy(s.center[0], s.center[1]), s.side).unwrap()))
        .collect();
    let est = wos_measure(&dom, &Pole::AtInfinity, &targets, &cfg).unwrap();
    assert_eq!(est.escaped, 0.0);
    for t in &est.targets {
        assert!(within(t.mass, 0.25, t.stderr, 4.0), "{t:?}");
    }
}

#[test]
fn bourgain_on_half_plane_and_disk() {
    let hp = HalfSpace::plane(10.0);
    let cfg = WosConfig::new(4_000, 12);
    let ball = Ball::new(Point::xy(0.3, 0.0), 0.5).unwrap();
    let rep = check_bourgain(&hp, &ball, 4, &cfg).unwrap();
    for s in &rep.samples {
        let truth = exact::half_plane_interval(s.pole[0], s.pole[1], -0.7, 1.3);
        assert!(within(s.mass, truth, s.stderr, 4.0));
    }
    assert!(rep.min >= 0.5 - 3.0 * stderr_of(0.5, cfg.walkers));
    let disk = BallDomain::unit_disk();
    let rep = check_bourgain(&disk, &Ball::new(Point::xy(0.0, 1.0), 0.1).unwrap(), 4, &cfg).unwrap();
    assert!(rep.min > 0.3, "{}", rep.min);
}

#[test]
fn doubling_ratios_on_the_disk() {
    let disk = BallDomain::unit_disk();
    let boundary = disk.boundary_samples(0.01).unwrap();
    let balls: Vec<Ball> = (0..3).map(|k| Ball::new(Point::xy((k as f64).cos(), (k as f64).sin()), 0.2).unwrap()).collect();
    let rep = check_doubling(&disk, &boundary, &balls, 0.3, 2.0, 2, &WosConfig::new(4_000, 13)).unwrap();
    assert!(rep.entries.iter().all(|e| e.ratio >= 1.0));
    assert!(rep.max_ratio < 20.0, "{}", rep.max_ratio);
    for e in &rep.entries {
        let z = [e.pole[0], e.pole[1]];
        let zeta = [e.ball.center[0], e.ball.center[1]];
        let truth = exact::disk_boundary_ball(z, zeta, 0.2);
        assert!(within(e.mass_ball, truth, e.stderr_ball, 4.0));
    }
}

#[test]
fn log_integral_is_one_for_constant_density() {
    use crate::cubes::{build_cubes, build_nets, CubeId};
    use std::sync::Arc;
    let disk = BallDomain::unit_disk();
    let set = Arc::new(disk.boundary_samples(2e-3).unwrap());
    let nets = build_nets(&set, 0.5, 5).unwrap();
    let lattice = build_cubes(&nets, set).unwrap();
    let root = lattice.ids().find(|q| q.level == 2).unwrap();
    let cfg = WosConfig::new(20_000, 14);
    let li = log_integral(&disk, &lattice, root, &Pole::point(&[0.0, 0.0]), 2, 1.0, &cfg).unwrap();
    assert!((li.value - 1.0).abs() < 0.05, "{}", li.value);
    let err = log_integral(&disk, &lattice, CubeId::new(0, 0), &Pole::point(&[0.0, 0.0]), 2, 4.0, &cfg);
    assert!(matches!(err, Err(crate::Error::PoleTooClose)));
}
