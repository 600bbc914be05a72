use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist2, SampledSet};

/// Nested maximal nets `X_0 ⊆ X_1 ⊆ …` as ascending sample-index lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nets {
    pub rho: f64,
    /// Top scale, the set diameter unless given; level `k` is `rho^k·diam`-separated.
    pub diam: f64,
    pub levels: Vec<Vec<usize>>,
}

impl Nets {
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn separation(&self, k: usize) -> f64 {
        self.rho.powi(k as i32) * self.diam
    }
}

/// Uniform hash grid used to test separation against already chosen points.
struct Grid<'a> {
    set: &'a SampledSet,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(set: &'a SampledSet, cell: f64) -> Self {
        Grid { set, cell, buckets: HashMap::new() }
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|c| (c / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, i: usize) {
        let k = self.key(self.set.point(i));
        self.buckets.entry(k).or_default().push(i);
    }

    /// Whether some stored point lies within distance `<= sep` of `p`.
    fn has_close(&self, p: &[f64], sep: f64) -> bool {
        let base = self.key(p);
        let n = base.len();
        let sep2 = sep * sep;
        let mut offset = vec![-1i64; n];
        loop {
            let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(b) = self.buckets.get(&key) {
                if b.iter().any(|&j| dist2(self.set.point(j), p) <= sep2) {
                    return true;
                }
            }
            let mut a = 0;
            while a < n {
                offset[a] += 1;
                if offset[a] <= 1 {
                    break;
                }
                offset[a] = -1;
                a += 1;
            }
            if a == n {
                return false;
            }
        }
    }
}

/// Deepest level whose separation is still at least ten sampling steps.
pub fn deepest_valid_level(set: &SampledSet, rho: f64, diam: f64) -> usize {
    let mut k = 0;
    while rho.powi(k as i32 + 1) * diam >= 10.0 * set.resolution() {
        k += 1;
    }
    k
}

/// Greedy nested maximal nets; points are scanned in lexicographic order.
pub fn build_nets(set: &SampledSet, rho: f64, k_max: usize) -> Result<Nets> {
    build_nets_scaled(set, rho, k_max, None)
}

/// As [`build_nets`], with separations measured from a top scale
/// `scale ≥ diam(S)`. A common scale keeps the coarse levels of a family of
/// nested sets aligned.
pub fn build_nets_scaled(set: &SampledSet, rho: f64, k_max: usize, scale: Option<f64>) -> Result<Nets> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("rho must lie in (0,1), got {rho}")));
    }
    if set.is_empty() {
        return Err(invalid("cannot build nets on an empty set"));
    }
    let mut diam = set.diam();
    if let Some(top) = scale {
        if !(top >= diam && top.is_finite()) {
            return Err(invalid(format!("top scale {top} is below the set diameter {diam}")));
        }
        diam = top;
    }
    if set.len() == 1 || diam == 0.0 {
        return Ok(Nets { rho, diam, levels: vec![vec![0]; k_max + 1] });
    }
    let deepest = deepest_valid_level(set, rho, diam);
    if k_max > deepest {
        return Err(Error::ResolutionExceeded { requested: k_max, deepest });
    }
    let mut levels: Vec<Vec<usize>> = Vec::with_capacity(k_max + 1);
    let mut current: Vec<usize> = Vec::new();
    for k in 0..=k_max {
        let sep = rho.powi(k as i32) * diam;
        let mut grid = Grid::new(set, sep);
        let mut chosen = vec![false; set.len()];
        for &i in &current {
            grid.insert(i);
            chosen[i] = true;
        }
        for i in 0..set.len() {
            if !chosen[i] && !grid.has_close(set.point(i), sep) {
                grid.insert(i);
                chosen[i] = true;
            }
        }
        current = (0..set.len()).filter(|&i| chosen[i]).collect();
        levels.push(current.clone());
    }
    Ok(Nets { rho, diam, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], h: f64) -> SampledSet {
        SampledSet::new(xs.iter().flat_map(|&x| [x, 0.0]).collect(), 2, h, 1).unwrap()
    }

    #[test]
    fn greedy_example_on_four_points() {
        let s = line(&[0.0, 0.3, 0.6, 1.0], 0.01);
        let nets = build_nets(&s, 0.5, 1).unwrap();
        assert_eq!(nets.levels[0], vec![0]);
        assert_eq!(nets.levels[1], vec![0, 2]);
    }

    #[test]
    fn top_scale_widens_separations() {
        let s = line(&[0.0, 0.3, 0.6, 1.0], 0.01);
        let nets = build_nets_scaled(&s, 0.5, 1, Some(1.4)).unwrap();
        assert_eq!(nets.separation(1), 0.7);
        assert_eq!(nets.levels[1], vec![0, 3]);
        assert!(build_nets_scaled(&s, 0.5, 1, Some(0.9)).is_err());
    }

    #[test]
    fn singleton_nets() {
        let s = line(&[0.25], 0.01);
        let nets = build_nets(&s, 0.5, 6).unwrap();
        assert!(nets.levels.iter().all(|l| l == &vec![0]));
    }

    #[test]
    fn too_deep_is_rejected() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let s = line(&xs, 0.01);
        match build_nets(&s, 0.5, 8) {
            Err(Error::ResolutionExceeded { deepest, .. }) => assert_eq!(deepest, 3),
            other => panic!("{other:?}"),
        }
    }

    /// Independent oracle: maximal independent set in the separation graph,
    /// seeded with the previous level and scanned in index order.
    fn mis_oracle(s: &SampledSet, seed: &[usize], sep: f64) -> Vec<usize> {
        let mut chosen: Vec<usize> = seed.to_vec();
        for i in 0..s.len() {
            if chosen.contains(&i) {
                continue;
            }
            if chosen.iter().all(|&j| dist2(s.point(i), s.point(j)).sqrt() > sep) {
                chosen.push(i);
            }
        }
        chosen.sort();
        chosen
    }

    #[test]
    fn circle_nets_match_oracle_and_double() {
        let n = 4000;
        let coords = (0..n)
            .flat_map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let s = SampledSet::new(coords, 2, 2.0 * std::f64::consts::PI / n as f64 * 1.01, 1).unwrap();
        let nets = build_nets(&s, 0.5, 6).unwrap();
        let mut prev: Vec<usize> = Vec::new();
        for k in 0..=6 {
            let oracle = mis_oracle(&s, &prev, nets.separation(k));
            assert_eq!(nets.levels[k], oracle, "level {k}");
            prev = oracle;
        }
        let sizes: Vec<usize> = nets.levels.iter().map(|l| l.len()).collect();
        for w in sizes.windows(2).skip(2) {
            let r = w[1] as f64 / w[0] as f64;
            assert!((1.5..=2.6).contains(&r), "{sizes:?}");
        }
    }
}
