use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{beta_inf_points, bilateral_beta};
use crate::cubes::{CubeId, CubeLattice};
use crate::error::{invalid, Result};
use crate::geometry::{Plane, DEFAULT_DEPTH};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    /// Inflation of `B_Q` for the content β.
    pub m: f64,
    /// Inflation of `B_Q` for the bilateral β.
    pub c0: f64,
    pub p: f64,
    /// Objective evaluations per plane search.
    pub budget: usize,
    /// Dyadic depth of content estimates.
    pub depth: usize,
    /// The content β of a level-`k` cube is evaluated on the level-`k+net_offset`
    /// net (or on all samples once that level is past the lattice bottom).
    pub net_offset: usize,
}

impl Default for BetaParams {
    fn default() -> Self {
        BetaParams { m: 3.0, c0: 2.0, p: 2.0, budget: 60, depth: DEFAULT_DEPTH, net_offset: 3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaRecord {
    pub cube: CubeId,
    pub side: f64,
    /// `β^{d,p}(M·B_Q)`.
    pub beta: f64,
    /// `bβ(C₀·B_Q)`.
    pub bbeta: f64,
    pub plane: Plane,
    pub bilateral_plane: Plane,
    pub params: BetaParams,
}

/// β-record of a single cube.
pub fn cube_beta(lattice: &CubeLattice, q: CubeId, params: &BetaParams) -> BetaRecord {
    let set = &lattice.source;
    let cube = lattice.cube(q);
    let d = set.target_dim();
    let big = cube.inflated_ball(params.m);
    let (bbeta, bplane) = bilateral_beta(set, &cube.inflated_ball(params.c0), params.budget);
    let level = q.level + params.net_offset;
    let (idx, h) = if level <= lattice.max_level() {
        (lattice.net_points_in_ball(level, &big), lattice.side(level) + set.resolution())
    } else {
        (set.indices_in_ball(&big), set.resolution())
    };
    let pts: Vec<&[f64]> = idx.iter().map(|&i| set.point(i)).collect();
    let (beta, plane) = beta_inf_points(&pts, &big, d, params.p, h, params.depth, params.budget, &[bplane.clone()]);
    BetaRecord { cube: q, side: cube.side, beta, bbeta, plane, bilateral_plane: bplane, params: *params }
}

/// β-records of every cube below `root` (inclusive), in id order. The map
/// runs in parallel; the output order does not depend on scheduling.
pub fn beta_table(lattice: &CubeLattice, root: CubeId, params: &BetaParams) -> Vec<BetaRecord> {
    let mut ids = lattice.descendants(root);
    ids.sort();
    ids.par_iter().map(|&q| cube_beta(lattice, q, params)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationReport {
    pub root: CubeId,
    /// `ℓ(root)^d + Σ_{Q⊆root} β(M·B_Q)²ℓ(Q)^d`, summed in id order.
    pub total: f64,
    pub per_cube: Vec<(CubeId, f64)>,
    pub truncation_level: usize,
    pub d: usize,
    pub params: BetaParams,
    pub records: Vec<BetaRecord>,
}

impl DeviationReport {
    pub fn from_records(lattice: &CubeLattice, root: CubeId, records: Vec<BetaRecord>) -> Result<DeviationReport> {
        let d = lattice.source.target_dim();
        let params = records.first().map(|r| r.params).ok_or_else(|| invalid("no β records"))?;
        let mut per_cube = Vec::new();
        let mut total = lattice.cube(root).side.powi(d as i32);
        let mut used = Vec::new();
        for r in records {
            if !lattice.contains(root, r.cube) {
                continue;
            }
            let c = r.beta * r.beta * r.side.powi(d as i32);
            total += c;
            per_cube.push((r.cube, c));
            used.push(r);
        }
        Ok(DeviationReport { root, total, per_cube, truncation_level: lattice.max_level(), d, params, records: used })
    }

    /// Sum of the per-cube contributions.
    pub fn beta_sum(&self) -> f64 {
        self.per_cube.iter().map(|c| c.1).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["cube_id", "level", "side", "beta", "bbeta", "contribution"])?;
        for (r, (_, c)) in self.records.iter().zip(&self.per_cube) {
            wtr.write_record([
                r.cube.to_string(),
                r.cube.level.to_string(),
                format!("{:?}", r.side),
                format!("{:?}", r.beta),
                format!("{:?}", r.bbeta),
                format!("{c:?}"),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "root": self.root.to_string(),
            "total": self.total,
            "truncation_level": self.truncation_level,
            "params": self.params,
        })
    }
}

/// Linear deviation `β_{E,M}(root)` truncated at the lattice bottom.
pub fn linear_deviation(lattice: &CubeLattice, root: CubeId, params: &BetaParams) -> Result<DeviationReport> {
    if params.m < 3.0 {
        return Err(invalid("the deviation sum needs M >= 3"));
    }
    if lattice.get(root).is_none() {
        return Err(invalid(format!("cube {root} is not in the lattice")));
    }
    DeviationReport::from_records(lattice, root, beta_table(lattice, root, params))
}

/// `Σ ℓ(Q)^d` over cubes `Q ⊆ root` with `bβ(C₀B_Q) ≥ ε`.
pub fn blwg_sum(lattice: &CubeLattice, records: &[BetaRecord], root: CubeId, epsilon: f64) -> f64 {
    let d = lattice.source.target_dim() as i32;
    records
        .iter()
        .filter(|r| r.bbeta >= epsilon && lattice.contains(root, r.cube))
        .map(|r| r.side.powi(d))
        .sum()
}
