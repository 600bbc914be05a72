use std::fmt;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::nets::Nets;
use crate::error::{invalid, Result};
use crate::geometry::{dist, dist2, Ball, KdTree, Point, SampledSet};

/// Cube identifier: level `k` and index `j` within the level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CubeId {
    pub level: usize,
    pub index: usize,
}

impl CubeId {
    pub fn new(level: usize, index: usize) -> Self {
        CubeId { level, index }
    }
}

impl fmt::Display for CubeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.index)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cube {
    pub id: CubeId,
    /// Sample index of the net point `ζ_Q`.
    pub center_index: usize,
    pub center: Point,
    pub side: f64,
    pub parent: Option<CubeId>,
    pub children: Vec<CubeId>,
    /// Ascending sample indices.
    pub members: Vec<usize>,
}

impl Cube {
    /// `B_Q = B(ζ_Q, ℓ(Q))`.
    pub fn ball(&self) -> Ball {
        Ball { center: self.center.clone(), radius: self.side }
    }

    pub fn inflated_ball(&self, factor: f64) -> Ball {
        Ball { center: self.center.clone(), radius: factor * self.side }
    }
}

/// Christ–David cube hierarchy over a sampled set.
#[derive(Clone, Debug)]
pub struct CubeLattice {
    pub rho: f64,
    pub diam: f64,
    pub levels: Vec<Vec<Cube>>,
    /// `owner[k][i]` is the index of the level-`k` cube containing sample `i`.
    owner: Vec<Vec<u32>>,
    /// Largest `r` with `B(ζ_Q, r·ℓ(Q)) ∩ samples ⊆ Q`, minimized over cubes (capped at 1).
    pub c0_eff: f64,
    /// Largest member distance from `ζ_Q` in units of `ℓ(Q)`, maximized over cubes.
    pub outer_ratio: f64,
    pub source: Arc<SampledSet>,
    net_trees: Vec<OnceLock<KdTree>>,
}

fn nearest_in(set: &SampledSet, candidates: &[usize], x: &[f64]) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (j, &c) in candidates.iter().enumerate() {
        let d = dist2(set.point(c), x);
        if d < best.0 {
            best = (d, j);
        }
    }
    best.1
}

/// Assigns every sample to its nearest bottom-level net point through a
/// k-d tree over that net (ties to the smaller net position).
fn assign_to_net(set: &SampledSet, net: &[usize]) -> Vec<u32> {
    let coords: Vec<f64> = net.iter().flat_map(|&i| set.point(i).iter().copied()).collect();
    let tree = KdTree::new(&coords, set.dim());
    set.points().map(|p| tree.nearest(p).expect("net is nonempty").0 as u32).collect()
}

/// Builds the cube hierarchy from nested nets.
pub fn build_cubes(nets: &Nets, set: Arc<SampledSet>) -> Result<CubeLattice> {
    if nets.levels.is_empty() || nets.levels[0].is_empty() {
        return Err(invalid("nets must have a nonempty top level"));
    }
    for w in nets.levels.windows(2) {
        if !w[0].iter().all(|i| w[1].binary_search(i).is_ok()) {
            return Err(invalid("nets are not nested"));
        }
    }
    let kmax = nets.max_level();
    // parent position of each level-(k+1) net point among level-k net points
    let mut parents: Vec<Vec<usize>> = vec![Vec::new()];
    for k in 0..kmax {
        let upper = &nets.levels[k];
        let coords: Vec<f64> = upper.iter().flat_map(|&i| set.point(i).iter().copied()).collect();
        let tree = KdTree::new(&coords, set.dim());
        let par = nets.levels[k + 1]
            .iter()
            .map(|&i| match upper.binary_search(&i) {
                Ok(j) => j,
                Err(_) => {
                    let (j, _) = tree.nearest(set.point(i)).expect("level is nonempty");
                    debug_assert_eq!(j, nearest_in(&set, upper, set.point(i)));
                    j
                }
            })
            .collect();
        parents.push(par);
    }
    let n = set.len();
    let mut owner: Vec<Vec<u32>> = vec![Vec::new(); kmax + 1];
    owner[kmax] = assign_to_net(&set, &nets.levels[kmax]);
    for k in (0..kmax).rev() {
        owner[k] = owner[k + 1].iter().map(|&c| parents[k + 1][c as usize] as u32).collect();
    }
    let mut levels: Vec<Vec<Cube>> = Vec::with_capacity(kmax + 1);
    for (k, net) in nets.levels.iter().enumerate() {
        let side = nets.separation(k);
        let mut cubes: Vec<Cube> = net
            .iter()
            .enumerate()
            .map(|(j, &c)| Cube {
                id: CubeId::new(k, j),
                center_index: c,
                center: Point::from_vec(set.point(c).to_vec()),
                side,
                parent: (k > 0).then(|| CubeId::new(k - 1, parents[k][j])),
                children: Vec::new(),
                members: Vec::new(),
            })
            .collect();
        for i in 0..n {
            cubes[owner[k][i] as usize].members.push(i);
        }
        levels.push(cubes);
    }
    for k in 1..=kmax {
        for j in 0..levels[k].len() {
            let p = levels[k][j].parent.expect("non-root level");
            levels[k - 1][p.index].children.push(CubeId::new(k, j));
        }
    }
    let net_trees = (0..=kmax).map(|_| OnceLock::new()).collect();
    let mut lattice = CubeLattice {
        rho: nets.rho,
        diam: nets.diam,
        levels,
        owner,
        c0_eff: 1.0,
        outer_ratio: 0.0,
        source: set,
        net_trees,
    };
    lattice.measure_containment();
    Ok(lattice)
}

impl CubeLattice {
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn cube(&self, id: CubeId) -> &Cube {
        &self.levels[id.level][id.index]
    }

    pub fn get(&self, id: CubeId) -> Option<&Cube> {
        self.levels.get(id.level).and_then(|l| l.get(id.index))
    }

    pub fn side(&self, level: usize) -> f64 {
        self.rho.powi(level as i32) * self.diam
    }

    pub fn is_bottom(&self, id: CubeId) -> bool {
        id.level == self.max_level()
    }

    /// Level-`k` cube containing sample `i`.
    pub fn owner(&self, k: usize, i: usize) -> CubeId {
        CubeId::new(k, self.owner[k][i] as usize)
    }

    pub fn ids(&self) -> impl Iterator<Item = CubeId> + '_ {
        self.levels.iter().enumerate().flat_map(|(k, l)| (0..l.len()).map(move |j| CubeId::new(k, j)))
    }

    /// Whether `q ⊆ r` in the hierarchy (reflexive).
    pub fn contains(&self, r: CubeId, q: CubeId) -> bool {
        q.level >= r.level && self.ancestor_at(q, r.level) == r
    }

    pub fn ancestor_at(&self, mut q: CubeId, level: usize) -> CubeId {
        assert!(level <= q.level);
        while q.level > level {
            q = self.cube(q).parent.expect("non-root cube has a parent");
        }
        q
    }

    /// All descendants of `root` including itself, in level then index order.
    pub fn descendants(&self, root: CubeId) -> Vec<CubeId> {
        let mut out = vec![root];
        let mut frontier = vec![root];
        while !frontier.is_empty() {
            let mut next: Vec<CubeId> = frontier.iter().flat_map(|&q| self.cube(q).children.iter().copied()).collect();
            next.sort();
            out.extend(next.iter().copied());
            frontier = next;
        }
        out
    }

    /// Cubes of a given level below `root`.
    pub fn descendants_at(&self, root: CubeId, level: usize) -> Vec<CubeId> {
        let mut frontier = vec![root];
        for _ in root.level..level {
            frontier = frontier.iter().flat_map(|&q| self.cube(q).children.iter().copied()).collect();
            frontier.sort();
        }
        frontier
    }

    /// Sample indices of level-`k` net points inside `ball`, ascending.
    pub fn net_points_in_ball(&self, k: usize, ball: &Ball) -> Vec<usize> {
        let tree = self.net_trees[k].get_or_init(|| {
            let coords: Vec<f64> = self.levels[k].iter().flat_map(|q| q.center.iter().copied()).collect();
            KdTree::new(&coords, self.source.dim())
        });
        let mut out: Vec<usize> = tree.within(&ball.center, ball.radius).into_iter().map(|j| self.levels[k][j].center_index).collect();
        out.sort();
        out
    }

    fn measure_containment(&mut self) {
        let set = self.source.clone();
        let tree = set.index();
        let mut c0 = 1.0f64;
        let mut outer = 0.0f64;
        for (k, level) in self.levels.iter().enumerate() {
            for (j, q) in level.iter().enumerate() {
                let mut nearest_foreign = q.side;
                tree.for_each_within(&q.center, q.side, |i, d2| {
                    if self.owner[k][i] as usize != j {
                        nearest_foreign = nearest_foreign.min(d2.sqrt());
                    }
                });
                c0 = c0.min(nearest_foreign / q.side);
                for &m in &q.members {
                    outer = outer.max(dist(&q.center, set.point(m)) / q.side);
                }
            }
        }
        self.c0_eff = c0;
        self.outer_ratio = outer;
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let cubes: Vec<serde_json::Value> = l
                    .iter()
                    .map(|q| {
                        serde_json::json!({
                            "id": q.id.to_string(),
                            "center": q.center,
                            "side": q.side,
                            "parent": q.parent.map(|p| p.to_string()),
                            "member_count": q.members.len(),
                        })
                    })
                    .collect();
                serde_json::json!({"k": k, "cubes": cubes})
            })
            .collect();
        serde_json::json!({
            "rho": self.rho,
            "diam": self.diam,
            "side_convention": "side = rho^k * diam, diam >= diam(S)",
            "truncation_level": self.max_level(),
            "c0_eff": self.c0_eff,
            "outer_ratio": self.outer_ratio,
            "levels": levels,
        })
    }

    /// Member lists as little-endian `u32` arrays, each prefixed by its length,
    /// in level then index order.
    pub fn write_members<W: Write>(&self, mut w: W) -> Result<()> {
        for q in self.levels.iter().flatten() {
            w.write_all(&(q.members.len() as u32).to_le_bytes())?;
            for &m in &q.members {
                w.write_all(&(m as u32).to_le_bytes())?;
            }
        }
        Ok(())
    }
}
