use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::beta::{beta_table, BetaParams};
use crate::cubes::{build_cubes, build_nets};
use crate::domains::{HalfSpace, LipschitzGraphDomain, Slab};
use crate::geometry::SampledSet;
use crate::harmonic::Domain;

fn flat() -> (HalfSpace, CubeLattice, CubeId, Vec<BetaRecord>) {
    let hp = HalfSpace::plane(4.0);
    let s = Arc::new(hp.boundary_samples(1e-3).unwrap());
    let lat = build_cubes(&build_nets(&s, 0.5, 6).unwrap(), s.clone()).unwrap();
    let root = lat.owner(3, s.nearest(&[0.0, 0.0]).unwrap().0);
    let recs = beta_table(&lat, root, &BetaParams { budget: 20, ..BetaParams::default() });
    (hp, lat, root, recs)
}

#[test]
fn corkscrews_in_flat_and_thin_domains() {
    let hp = HalfSpace::plane(4.0);
    let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
    let x = find_corkscrew(&hp, &b, 0.2).unwrap();
    assert!(x[1] >= 0.4 && x[1] <= 0.6, "{x:?}");
    let slab = Slab { width: 0.1, window: 4.0 };
    assert!(find_corkscrew(&slab, &b, 0.05).is_none());
}

#[test]
fn flat_boundary_is_a_single_tree() {
    let (hp, lat, root, recs) = flat();
    let cfg = WosConfig::new(4_000, 21);
    let res = corona_decompose(&hp, &lat, &recs, root, &CoronaParams::default(), &cfg).unwrap();
    assert_eq!(res.tops.len(), 1);
    assert!(res.tops[0].stops.iter().all(|s| s.reason == StopReason::Btm));
    assert_eq!(res.packing, lat.cube(root).side);
    res.check_partition(&lat).unwrap();
    assert!(res.tops[0].pole_plus.is_some() != res.tops[0].pole_minus.is_some());
    let rep = verify_tree_densities(&res, &hp, &lat, &PoleMode::PerTree, 60, &cfg).unwrap();
    assert_eq!(rep.fraction, 1.0);
    let mut hostile = res.clone();
    hostile.params.a /= 100.0;
    let rep = verify_tree_densities(&hostile, &hp, &lat, &PoleMode::PerTree, 60, &cfg).unwrap();
    assert!(rep.fraction < 1.0);
    let again = corona_decompose(&hp, &lat, &recs, root, &CoronaParams::default(), &cfg).unwrap();
    assert_eq!(res, again);
}

#[test]
fn truncation_keeps_a_partition() {
    let (hp, lat, root, recs) = flat();
    let p = CoronaParams { k0: Some(5), ..CoronaParams::default() };
    let res = corona_decompose(&hp, &lat, &recs, root, &p, &WosConfig::new(2_000, 22)).unwrap();
    assert_eq!(res.truncation_level, 5);
    res.check_partition(&lat).unwrap();
    assert!(res.tops[0].stops.iter().all(|s| s.cube.level == 5));
}

#[test]
fn corner_stops_follow_the_vertex() {
    let dom = LipschitzGraphDomain::new(vec![[-2.0, 2.0], [0.0, 0.0], [2.0, 2.0]]).unwrap();
    let s = Arc::new(dom.boundary_samples(1e-3).unwrap());
    let lat = build_cubes(&build_nets(&s, 0.5, 6).unwrap(), s.clone()).unwrap();
    let root = lat.owner(2, s.nearest(&[0.0, 0.0]).unwrap().0);
    let recs = beta_table(&lat, root, &BetaParams { budget: 20, c0: 3.0, ..BetaParams::default() });
    let res = corona_decompose(&dom, &lat, &recs, root, &CoronaParams::default(), &WosConfig::new(3_000, 23)).unwrap();
    res.check_partition(&lat).unwrap();
    assert!(res.tops.len() > 1);
    for t in &res.tops {
        for s in t.stops.iter().filter(|s| s.reason == StopReason::Bad) {
            let q = lat.cube(s.child.unwrap_or(s.cube));
            assert!(q.center.norm_to_origin() <= 4.0 * q.side, "{} at {:?}", q.id, q.center);
        }
    }
    assert!(res.packing >= lat.cube(root).side);
    for t in &res.tops {
        for s in t.stops.iter().filter(|s| s.reason == StopReason::BBeta) {
            assert!(s.jones_child.unwrap() > params_eps2());
            assert!(s.jones_parent.unwrap() < 2.0 * params_eps2());
        }
    }
}

fn params_eps2() -> f64 {
    CoronaParams::default().epsilon.powi(2)
}

trait Norm {
    fn norm_to_origin(&self) -> f64;
}

impl Norm for Point {
    fn norm_to_origin(&self) -> f64 {
        self.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[test]
fn missing_corkscrew_is_an_error() {
    let (_, lat, root, recs) = flat();
    let slab = Slab { width: 1e-4, window: 4.0 };
    let r = corona_decompose(&slab, &lat, &recs, root, &CoronaParams::default(), &WosConfig::new(100, 24));
    assert!(matches!(r, Err(Error::CorkscrewFailure(q)) if q == root));
}

fn grid_lattice() -> CubeLattice {
    let n = 64;
    let h = 1.0 / n as f64;
    let coords: Vec<f64> = (0..=n).flat_map(|i| (0..=n).flat_map(move |j| [i as f64 * h, j as f64 * h])).collect();
    let s = Arc::new(SampledSet::new(coords, 2, h, 1).unwrap());
    build_cubes(&build_nets(&s, 0.5, 2).unwrap(), s).unwrap()
}

#[test]
fn frostman_leaves_light_measures_alone() {
    let lat = grid_lattice();
    let bottom = lat.max_level();
    let q = CubeId::new(bottom, 0);
    let root = lat.ancestor_at(q, 0);
    let w = BTreeMap::from([(q, lat.cube(q).side)]);
    let nu = frostman_regularize(&lat, &w, root).unwrap();
    assert!(nu.fc.is_empty());
    assert_eq!(nu.atoms[0].2, lat.cube(q).side);
}

#[test]
fn frostman_one_level_cascade() {
    let lat = grid_lattice();
    let parent = lat
        .ids()
        .find(|q| q.level + 1 == lat.max_level() && lat.cube(*q).children.len() >= 3)
        .expect("a parent with several children");
    let kids = lat.cube(parent).children.clone();
    let w: BTreeMap<CubeId, f64> = kids.iter().map(|&c| (c, 1.5 * lat.cube(c).side)).collect();
    let total: f64 = w.values().sum();
    let lp = lat.cube(parent).side;
    assert!(total > 2.0 * lp);
    let nu = frostman_regularize(&lat, &w, parent).unwrap();
    assert_eq!(nu.fc, vec![parent]);
    for (c, _, m) in &nu.atoms {
        let expect = 1.5 * lat.cube(*c).side * lp / total;
        assert!((m - expect).abs() < 1e-15);
    }
    assert!((nu.mass(&lat, parent) - lp).abs() < 1e-12);
}

#[test]
fn frostman_bound_holds_on_every_cube() {
    let lat = grid_lattice();
    let root = CubeId::new(0, 0);
    let bottom = lat.max_level();
    let w: BTreeMap<CubeId, f64> = lat.descendants_at(root, bottom).into_iter().map(|q| (q, lat.cube(q).side)).collect();
    let input: f64 = w.values().sum();
    let nu = frostman_regularize(&lat, &w, root).unwrap();
    for q in lat.descendants(root) {
        assert!(nu.mass(&lat, q) <= 2.0 * lat.cube(q).side * (1.0 + 1e-12));
    }
    assert!(nu.total() <= input);
}
