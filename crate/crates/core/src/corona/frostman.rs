use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cubes::{CubeId, CubeLattice};
use crate::error::{invalid, Result};
use crate::geometry::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanMeasure {
    /// `(cube, ζ_Q, weight)` for each atom, in cube order.
    pub atoms: Vec<(CubeId, Point, f64)>,
    /// Cubes whose mass was rescaled, finest first.
    pub fc: Vec<CubeId>,
}

impl FrostmanMeasure {
    /// `ν(Q)` as a compensated sum over the atoms inside `q`.
    pub fn mass(&self, lattice: &CubeLattice, q: CubeId) -> f64 {
        neumaier(self.atoms.iter().filter(|(a, _, _)| lattice.contains(q, *a)).map(|a| a.2))
    }

    pub fn total(&self) -> f64 {
        neumaier(self.atoms.iter().map(|a| a.2))
    }
}

fn neumaier(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Bottom-up sweep: a cube `Q` carrying `μ(Q) > 2ℓ(Q)^d` joins the Frostman
/// cubes and its mass is rescaled to `ℓ(Q)^d`.
pub fn frostman_regularize(lattice: &CubeLattice, weights: &BTreeMap<CubeId, f64>, root: CubeId) -> Result<FrostmanMeasure> {
    let bottom = weights.keys().map(|q| q.level).max().unwrap_or(root.level);
    for (&q, &w) in weights {
        if !lattice.contains(root, q) {
            return Err(invalid(format!("weighted cube {q} is not below {root}")));
        }
        if !(w >= 0.0) {
            return Err(invalid("weights must be nonnegative"));
        }
    }
    let d = lattice.source.target_dim() as i32;
    let atoms: Vec<CubeId> = weights.keys().copied().collect();
    let mut mass: Vec<f64> = weights.values().copied().collect();
    let mut fc = Vec::new();
    for level in (root.level..=bottom).rev() {
        let mut groups: BTreeMap<CubeId, Vec<usize>> = BTreeMap::new();
        for (i, &a) in atoms.iter().enumerate() {
            if a.level >= level {
                groups.entry(lattice.ancestor_at(a, level)).or_default().push(i);
            }
        }
        for (q, idx) in groups {
            let total = neumaier(idx.iter().map(|&i| mass[i]));
            let cap = lattice.cube(q).side.powi(d);
            if total > 2.0 * cap {
                let f = cap / total;
                idx.iter().for_each(|&i| mass[i] *= f);
                fc.push(q);
            }
        }
    }
    Ok(FrostmanMeasure {
        atoms: atoms.iter().zip(mass).map(|(&q, w)| (q, lattice.cube(q).center.clone(), w)).collect(),
        fc,
    })
}
