//! Stopping-time corona decompositions driven by flatness and harmonic density.

mod frostman;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beta::BetaRecord;
use crate::cubes::{stopping_region, CubeId, CubeLattice, StoppingRegion};
use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, Ball, KdTree, Point};
use crate::harmonic::{run_walkers, stderr_of, walker_seed, Domain, Pole, WosConfig};

pub use frostman::{frostman_regularize, FrostmanMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoronaParams {
    /// Inflation of the balls on which densities are compared.
    pub lambda: f64,
    /// High-density threshold.
    pub a: f64,
    /// Low-density threshold.
    pub tau: f64,
    pub epsilon: f64,
    pub m: f64,
    /// Deepest lattice level used; `None` means the lattice bottom.
    pub k0: Option<usize>,
    /// Corkscrew parameter.
    pub c: f64,
}

impl Default for CoronaParams {
    fn default() -> Self {
        CoronaParams { lambda: 1.0, a: 20.0, tau: 0.05, epsilon: 0.05, m: 3.0, k0: None, c: 0.05 }
    }
}

impl CoronaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && 1.0 > self.tau && self.tau > 0.0) {
            return Err(invalid("thresholds must satisfy A > 1 > tau > 0"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon must lie in (0, 1)"));
        }
        if self.m < 3.0 || self.lambda < 1.0 {
            return Err(invalid("M must be at least 3 and lambda at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StopReason {
    #[serde(rename = "BTM")]
    Btm,
    Bad,
    #[serde(rename = "HD")]
    Hd,
    #[serde(rename = "LD")]
    Ld,
    #[serde(rename = "Bbeta")]
    BBeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub cube: CubeId,
    pub reason: StopReason,
    /// Child that triggered the stop (absent for bottom cubes and bad tops).
    pub child: Option<CubeId>,
    /// `Σ_{child⊆T⊆R} β(MB_T)²` for a `Bβ` stop.
    pub jones_child: Option<f64>,
    /// The same sum without the child's own term.
    pub jones_parent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub top: CubeId,
    pub pole_plus: Option<Vec<f64>>,
    pub pole_minus: Option<Vec<f64>>,
    pub tree: StoppingRegion,
    pub stops: Vec<StopRecord>,
}

impl TreeRecord {
    pub fn poles(&self) -> Vec<&[f64]> {
        self.pole_plus.iter().chain(&self.pole_minus).map(|p| p.as_slice()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: PoleMode,
    pub pairs: usize,
    pub passed: usize,
    pub fraction: f64,
    pub failures: Vec<(CubeId, CubeId)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PoleMode {
    PerTree,
    Fixed(Pole),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoronaResult {
    pub params: CoronaParams,
    pub root: CubeId,
    pub truncation_level: usize,
    pub d: usize,
    pub walkers: usize,
    pub base_seed: u64,
    pub tops: Vec<TreeRecord>,
    pub packing: f64,
    pub btm_packing: f64,
    pub verification: Option<VerificationReport>,
}

impl CoronaResult {
    pub fn to_json(&self) -> serde_json::Value {
        let tops: Vec<serde_json::Value> = self
            .tops
            .iter()
            .map(|t| {
                serde_json::json!({
                    "R": t.top.to_string(),
                    "pole_plus": t.pole_plus,
                    "pole_minus": t.pole_minus,
                    "stops": t.stops.iter().map(|s| serde_json::json!({"cube": s.cube.to_string(), "reason": s.reason})).collect::<Vec<_>>(),
                    "tree_size": t.tree.cubes.len(),
                })
            })
            .collect();
        serde_json::json!({
            "params": self.params,
            "root": self.root.to_string(),
            "truncation_level": self.truncation_level,
            "walkers": self.walkers,
            "base_seed": self.base_seed,
            "tops": tops,
            "packing": self.packing,
            "btm_packing": self.btm_packing,
            "verification": self.verification,
        })
    }

    /// `ℓ(Q)^d` on the minimal cubes at the truncation level, over all trees:
    /// the BTM cubes together with bottom-level singleton trees.
    pub fn bottom_weights(&self, lattice: &CubeLattice) -> BTreeMap<CubeId, f64> {
        self.tops
            .iter()
            .flat_map(|t| &t.tree.minimal)
            .filter(|q| q.level == self.truncation_level)
            .map(|&q| (q, lattice.cube(q).side.powi(self.d as i32)))
            .collect()
    }

    /// Checks that the trees partition the truncated cubes below the root and
    /// that every minimal cube carries exactly one reason.
    pub fn check_partition(&self, lattice: &CubeLattice) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for t in &self.tops {
            t.tree.check(lattice)?;
            for &q in &t.tree.cubes {
                if !seen.insert(q) {
                    return Err(format!("{q} lies in two trees"));
                }
            }
            let stops: Vec<CubeId> = t.stops.iter().map(|s| s.cube).collect();
            if stops != t.tree.minimal {
                return Err(format!("stop records of {} do not match its minimal cubes", t.top));
            }
        }
        let all: BTreeSet<CubeId> =
            lattice.descendants(self.root).into_iter().filter(|q| q.level <= self.truncation_level).collect();
        if all != seen {
            return Err("trees do not cover the truncated lattice".into());
        }
        Ok(())
    }
}

/// First point of a Halton sequence in `B` with `δ_Ω(x) ≥ 2c·r` and
/// `|x − x_B| ≤ (1 − 2c)·r`.
pub fn find_corkscrew(domain: &dyn Domain, ball: &Ball, c: f64) -> Option<Point> {
    const BASES: [u32; 5] = [2, 3, 5, 7, 11];
    const TRIES: u32 = 4096;
    let n = ball.center.dim();
    let r = ball.radius;
    let radical = |mut i: u32, b: u32| {
        let (mut f, mut x) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            x += f * (i % b) as f64;
            i /= b;
        }
        x
    };
    (1..=TRIES).find_map(|i| {
        let x: Vec<f64> = (0..n).map(|a| ball.center[a] + r * (2.0 * radical(i, BASES[a % 5]) - 1.0)).collect();
        let ok = dist(&x, &ball.center) <= (1.0 - 2.0 * c) * r && domain.inside(&x) && domain.dist_boundary(&x) >= 2.0 * c * r;
        ok.then(|| Point::new(x).expect("finite coordinates"))
    })
}

/// Harmonic-measure estimates of balls from one walker batch.
struct Exits {
    tree: KdTree,
    walkers: usize,
}

impl Exits {
    fn new(domain: &dyn Domain, pole: &Pole, cfg: &WosConfig) -> Result<Exits> {
        let exits = run_walkers(domain, pole, cfg)?;
        let coords: Vec<f64> = exits.iter().filter_map(|e| e.point()).flatten().copied().collect();
        Ok(Exits { tree: KdTree::new(&coords, domain.dim()), walkers: cfg.walkers })
    }

    /// `(Θ̂, stderr)` of `ω(ball)/(diam ball)^d`.
    fn density(&self, ball: &Ball, d: usize) -> (f64, f64) {
        let m = self.tree.count_within(&ball.center, ball.radius) as f64 / self.walkers as f64;
        let s = ball.diam().powi(d as i32);
        (m / s, stderr_of(m, self.walkers) / s)
    }
}

fn tree_seed(cfg: &WosConfig, salt: u64, q: CubeId, pole: usize) -> WosConfig {
    let key = ((q.level as u64) << 40) ^ ((q.index as u64) << 2) ^ pole as u64;
    cfg.with_seed(walker_seed(cfg.base_seed ^ salt, key))
}

/// Decomposes the cubes below `q0` into trees. `betas` must hold a record for
/// every such cube; `bbeta` plays the flatness test of `Bad` and `beta` the
/// Jones sums of `Bβ`. Records built with `c0 = M` evaluate both on `MB_Q`.
pub fn corona_decompose(
    domain: &dyn Domain,
    lattice: &CubeLattice,
    betas: &[BetaRecord],
    q0: CubeId,
    params: &CoronaParams,
    cfg: &WosConfig,
) -> Result<CoronaResult> {
    params.validate()?;
    cfg.validate()?;
    if lattice.get(q0).is_none() {
        return Err(invalid(format!("cube {q0} is not in the lattice")));
    }
    let k0 = params.k0.unwrap_or(lattice.max_level()).min(lattice.max_level());
    if k0 < q0.level {
        return Err(invalid("truncation level lies above the root"));
    }
    let rec: BTreeMap<CubeId, &BetaRecord> = betas.iter().map(|r| (r.cube, r)).collect();
    if betas.iter().any(|r| r.params.c0 != params.m) {
        log::warn!("bilateral β records were not computed on M-inflated balls");
    }
    let d = lattice.source.target_dim();
    let get = |q: CubeId| -> Result<&BetaRecord> { rec.get(&q).copied().ok_or_else(|| invalid(format!("no β record for {q}"))) };
    let bad = |q: CubeId| -> Result<bool> { Ok(get(q)?.bbeta >= params.epsilon) };
    let children = |q: CubeId| -> Vec<CubeId> {
        if q.level >= k0 {
            Vec::new()
        } else {
            lattice.cube(q).children.clone()
        }
    };

    let mut queue: BTreeSet<CubeId> = BTreeSet::from([q0]);
    let mut tops = Vec::new();
    while let Some(r) = queue.pop_first() {
        if bad(r)? {
            let tree = StoppingRegion { top: r, cubes: vec![r], minimal: vec![r], stopped: vec![r] };
            let stops = vec![StopRecord { cube: r, reason: StopReason::Bad, child: None, jones_child: None, jones_parent: None }];
            queue.extend(children(r));
            tops.push(TreeRecord { top: r, pole_plus: None, pole_minus: None, tree, stops });
            continue;
        }
        let cube = lattice.cube(r);
        let normal = get(r)?.bilateral_plane.normals();
        let mut poles = [None, None];
        if let Some(nu) = normal.first().filter(|_| normal.len() == 1) {
            for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                let x: Vec<f64> = cube.center.iter().zip(nu).map(|(c, n)| c + sign * cube.side / 2.0 * n).collect();
                if domain.inside(&x) && domain.dist_boundary(&x) > cube.side / 8.0 {
                    poles[k] = Some(x);
                }
            }
        } else {
            return Err(Error::Unsupported("corona trees need codimension-one planes".into()));
        }
        if poles.iter().all(Option::is_none) {
            return Err(Error::CorkscrewFailure(r));
        }
        let exits: Vec<Option<Exits>> = poles
            .iter()
            .enumerate()
            .map(|(k, p)| p.as_ref().map(|x| Exits::new(domain, &Pole::Point(x.clone()), &tree_seed(cfg, 0xC0_0A, r, k))).transpose())
            .collect::<Result<_>>()?;
        let top_ball = cube.inflated_ball(params.lambda);
        let top_density: Vec<Option<(f64, f64)>> = exits.iter().map(|e| e.as_ref().map(|e| e.density(&top_ball, d))).collect();

        let jones = |q: CubeId| -> Result<f64> {
            let mut s = 0.0;
            let mut t = q;
            loop {
                s += get(t)?.beta.powi(2);
                if t == r {
                    return Ok(s);
                }
                t = lattice.cube(t).parent.expect("below the top");
            }
        };
        let classify = |q: CubeId| -> Result<Option<StopReason>> {
            if bad(q)? {
                return Ok(Some(StopReason::Bad));
            }
            let ball = lattice.cube(q).inflated_ball(params.lambda);
            let mut hd = false;
            let mut ld = false;
            for (e, top) in exits.iter().zip(&top_density) {
                let (Some(e), Some((tr, sr))) = (e, top) else { continue };
                let (t, s) = e.density(&ball, d);
                hd |= t - 3.0 * s > params.a * (tr + 3.0 * sr);
                ld |= t + 3.0 * s < params.tau * (tr - 3.0 * sr);
            }
            if hd {
                return Ok(Some(StopReason::Hd));
            }
            if ld {
                return Ok(Some(StopReason::Ld));
            }
            if jones(q)? >= 2.0 * params.epsilon.powi(2) {
                return Ok(Some(StopReason::BBeta));
            }
            Ok(None)
        };

        let mut reasons: BTreeMap<CubeId, (StopReason, CubeId)> = BTreeMap::new();
        let mut failure = None;
        let mut tree = stopping_region(lattice, r, |child| {
            if child.level > k0 || failure.is_some() {
                return false;
            }
            match classify(child) {
                Ok(Some(reason)) => {
                    let parent = lattice.cube(child).parent.expect("child has a parent");
                    let e = reasons.entry(parent).or_insert((reason, child));
                    if (reason, child) < *e {
                        *e = (reason, child);
                    }
                    true
                }
                Ok(None) => false,
                Err(err) => {
                    failure = Some(err);
                    false
                }
            }
        });
        if let Some(err) = failure {
            return Err(err);
        }
        truncate(&mut tree, lattice, k0);
        let mut stops = Vec::with_capacity(tree.minimal.len());
        for &q in &tree.minimal {
            let s = match reasons.get(&q) {
                Some(&(reason, child)) => {
                    let (jc, jp) = if reason == StopReason::BBeta {
                        let jc = jones(child)?;
                        (Some(jc), Some(jc - get(child)?.beta.powi(2)))
                    } else {
                        (None, None)
                    };
                    queue.extend(children(q));
                    StopRecord { cube: q, reason, child: Some(child), jones_child: jc, jones_parent: jp }
                }
                None => StopRecord { cube: q, reason: StopReason::Btm, child: None, jones_child: None, jones_parent: None },
            };
            stops.push(s);
        }
        let [plus, minus] = poles;
        tops.push(TreeRecord { top: r, pole_plus: plus, pole_minus: minus, tree, stops });
    }
    let di = d as i32;
    let packing = tops.iter().map(|t| lattice.cube(t.top).side.powi(di)).sum();
    let btm_packing = tops
        .iter()
        .flat_map(|t| &t.stops)
        .filter(|s| s.reason == StopReason::Btm)
        .map(|s| lattice.cube(s.cube).side.powi(di))
        .sum();
    Ok(CoronaResult {
        params: *params,
        root: q0,
        truncation_level: k0,
        d,
        walkers: cfg.walkers,
        base_seed: cfg.base_seed,
        tops,
        packing,
        btm_packing,
        verification: None,
    })
}

/// Drops cubes below level `k0`, turning level-`k0` cubes into minimal ones.
fn truncate(tree: &mut StoppingRegion, lattice: &CubeLattice, k0: usize) {
    if k0 >= lattice.max_level() {
        return;
    }
    tree.cubes.retain(|q| q.level <= k0);
    let mut minimal: BTreeSet<CubeId> = tree.minimal.iter().copied().filter(|q| q.level < k0).collect();
    minimal.extend(tree.cubes.iter().copied().filter(|q| q.level == k0));
    tree.minimal = minimal.into_iter().collect();
    tree.stopped.retain(|q| q.level < k0);
}

/// Packing of the decomposition, an upper bound for the corona constant,
/// together with whether its densities were verified.
pub fn cdhm_upper(result: &CoronaResult) -> (f64, bool) {
    let verified = result.verification.as_ref().is_some_and(|v| v.fraction >= 0.9);
    if !verified {
        log::warn!("corona packing reported without verified densities");
    }
    (result.packing, verified)
}

/// Re-estimates `Θ(λB_Q)/Θ(λB_R)` with fresh seeds on up to `samples`
/// random pairs `(R, Q ∈ Tree(R))` and counts those inside `[τ, A]` up to
/// three standard errors.
pub fn verify_tree_densities(
    result: &CoronaResult,
    domain: &dyn Domain,
    lattice: &CubeLattice,
    mode: &PoleMode,
    samples: usize,
    cfg: &WosConfig,
) -> Result<VerificationReport> {
    let p = &result.params;
    let d = result.d;
    let mut pairs: Vec<(usize, CubeId)> = result
        .tops
        .iter()
        .enumerate()
        .filter(|(_, t)| t.tree.cubes.len() > 1 && (!t.poles().is_empty() || matches!(mode, PoleMode::Fixed(_))))
        .flat_map(|(i, t)| t.tree.cubes.iter().map(move |&q| (i, q)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(walker_seed(cfg.base_seed, 0x5EED));
    pairs.shuffle(&mut rng);
    pairs.truncate(samples);
    pairs.sort();
    let fixed = match mode {
        PoleMode::Fixed(pole) => Some(Exits::new(domain, pole, &cfg.with_seed(walker_seed(cfg.base_seed, 0xF1))))
            .transpose()?,
        PoleMode::PerTree => None,
    };
    let mut cache: BTreeMap<usize, Vec<Exits>> = BTreeMap::new();
    let mut passed = 0;
    let mut failures = Vec::new();
    for &(i, q) in &pairs {
        let t = &result.tops[i];
        let batches: Vec<&Exits> = match &fixed {
            Some(e) => vec![e],
            None => {
                if !cache.contains_key(&i) {
                    let ex = t
                        .poles()
                        .iter()
                        .enumerate()
                        .map(|(k, x)| Exits::new(domain, &Pole::point(x), &tree_seed(cfg, 0x7E57, t.top, k)))
                        .collect::<Result<Vec<_>>>()?;
                    cache.insert(i, ex);
                }
                cache[&i].iter().collect()
            }
        };
        let rb = lattice.cube(t.top).inflated_ball(p.lambda);
        let qb = lattice.cube(q).inflated_ball(p.lambda);
        let ok = batches.iter().all(|e| {
            let (tr, sr) = e.density(&rb, d);
            let (tq, sq) = e.density(&qb, d);
            tq + 3.0 * sq >= p.tau * (tr - 3.0 * sr) && tq - 3.0 * sq <= p.a * (tr + 3.0 * sr)
        });
        if ok {
            passed += 1;
        } else {
            failures.push((t.top, q));
        }
    }
    let n = pairs.len();
    Ok(VerificationReport {
        mode: mode.clone(),
        pairs: n,
        passed,
        fraction: if n == 0 { 1.0 } else { passed as f64 / n as f64 },
        failures,
    })
}

#[cfg(test)]
mod tests;
