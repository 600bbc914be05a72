//! Modified Cantor complement with a singular set of positive harmonic measure.
//!
//! Starting from the four-corner Cantor set, cubes of `K` whose harmonic
//! density drops below the `τ`-threshold are frozen as dilated squares
//! `ηJ`; the remaining cubes are refined further.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cantor::{CantorComplement, CantorSpec, Square, MAX_GENERATION};
use crate::error::{invalid, Error, Result};
use crate::geometry::{DistanceOracle, SampledSet};
use crate::harmonic::{run_walkers, stderr_of, Domain, DomainKind, Pole, WosConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatakisParams {
    /// Block depth: stage `n` looks `n·N` generations below each top cube.
    pub block: usize,
    pub tau: f64,
    pub eta: f64,
    pub max_n: usize,
    pub walkers: usize,
    /// Walker budget reached by repeated quadrupling before giving up on a
    /// straddling classification.
    pub max_walkers: usize,
}

impl Default for BatakisParams {
    fn default() -> Self {
        BatakisParams { block: 3, tau: 0.01, eta: 1.05, max_n: 1, walkers: 100_000, max_walkers: 400_000 }
    }
}

impl BatakisParams {
    /// Generation of the cubes in `Top(n)`.
    pub fn depth(&self, n: usize) -> usize {
        self.block * n * (n + 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.block == 0 || self.max_n == 0 {
            return Err(invalid("block depth and stage count must be positive"));
        }
        if !(self.eta > 1.0 && self.eta <= 1.2) {
            return Err(invalid("eta must lie in (1, 1.2]"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid("tau must lie in (0, 1)"));
        }
        if self.depth(self.max_n) > MAX_GENERATION {
            return Err(invalid(format!(
                "stage {} reaches generation {} beyond {MAX_GENERATION}",
                self.max_n,
                self.depth(self.max_n)
            )));
        }
        if self.walkers == 0 {
            return Err(invalid("at least one walker is needed"));
        }
        Ok(())
    }
}

/// Classification of `Child_n(I)` for one top cube `I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub parent: String,
    pub parent_mass: f64,
    pub threshold: f64,
    /// `(word, ω̂(J))` of every child, in word order.
    pub children: Vec<(String, f64)>,
    pub stop: Vec<String>,
    pub top: Vec<String>,
    /// `Σ_{J∈Top(I,n)} |J|` with `|K| = 1`.
    pub top_length: f64,
    /// `|I|·4^{−nNτ}`.
    pub decay_bound: f64,
}

impl StageRecord {
    pub fn decay_holds(&self) -> bool {
        self.top_length <= self.decay_bound * (1.0 + 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatakisSpec {
    pub params: BatakisParams,
    pub base_seed: u64,
    pub shell: f64,
    pub far_field_radius: Option<f64>,
    /// Walkers of the pass whose estimates were used.
    pub walkers_used: usize,
    pub stages: Vec<StageRecord>,
    /// `Σ_{J∈Top(n)} |J|` for `n = 0..=max_n`.
    pub top_lengths: Vec<f64>,
    /// Words of `Top(max_n)`, kept undilated.
    pub final_top: Vec<String>,
}

impl BatakisSpec {
    /// `Σ_{n≥1} n·Σ_{I∈Top(n−1)} |I|`, the recorded β-budget.
    pub fn beta_partial_sum(&self) -> f64 {
        (1..=self.params.max_n).map(|n| n as f64 * self.top_lengths[n - 1]).sum()
    }

    /// `1 + Σ_{n≥2} n·4^{−(n−1)Nτ}·Σ_{J∈Top(n−2)} |J|`.
    pub fn beta_partial_bound(&self) -> f64 {
        let p = &self.params;
        1.0 + (2..=p.max_n)
            .map(|n| n as f64 * 4f64.powf(-(((n - 1) * p.block) as f64) * p.tau) * self.top_lengths[n - 2])
            .sum::<f64>()
    }

    pub fn decay_holds(&self) -> bool {
        self.stages.iter().all(StageRecord::decay_holds)
    }
}

/// Complement of the frozen dilated squares and the surviving top cubes.
#[derive(Clone, Debug)]
pub struct BatakisDomain {
    pub squares: Arc<Vec<Square>>,
    pub spec: Arc<BatakisSpec>,
}

impl BatakisDomain {
    fn union_distance(&self, p: &[f64]) -> (f64, Option<usize>) {
        let mut best = f64::INFINITY;
        for (i, s) in self.squares.iter().enumerate() {
            let d = s.dist(p);
            if d == 0.0 {
                return (0.0, Some(i));
            }
            best = best.min(d);
        }
        (best, None)
    }

    fn boundary_distance(&self, p: &[f64]) -> f64 {
        match self.union_distance(p) {
            (_, Some(i)) => self.squares[i].depth(p),
            (d, None) => d,
        }
    }
}

impl Domain for BatakisDomain {
    fn dim(&self) -> usize {
        2
    }
    fn inside(&self, x: &[f64]) -> bool {
        self.union_distance(x).0 > 0.0
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        self.boundary_distance(x)
    }
    fn kind(&self) -> DomainKind {
        DomainKind::ExteriorOfCompact {
            center: vec![0.0, 0.0],
            radius: std::f64::consts::FRAC_1_SQRT_2 * self.spec.params.eta,
        }
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in self.squares.iter() {
            for a in 0..2 {
                lo[a] = lo[a].min(s.center[a] - s.side / 2.0);
                hi[a] = hi[a].max(s.center[a] + s.side / 2.0);
            }
        }
        (lo.to_vec(), hi.to_vec())
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        let coords: Vec<f64> = self.squares.iter().flat_map(|s| s.perimeter_samples(h)).flatten().collect();
        let me = self.clone();
        let oracle: Arc<dyn DistanceOracle> = Arc::new(move |x: &[f64]| me.boundary_distance(x));
        Ok(SampledSet::new(coords, 2, h, 1)?.with_oracle(oracle, Some(self.spec())))
    }
    fn spec(&self) -> serde_json::Value {
        json!({"kind": "batakis", "params": self.spec.params, "base_seed": self.spec.base_seed})
    }
}

/// Leaf counts of one walker pass from infinity over `K_L^c`.
fn leaf_counts(cantor: &CantorComplement, cfg: &WosConfig) -> Result<Vec<usize>> {
    let spec = &cantor.spec;
    let exits = run_walkers(cantor, &Pole::AtInfinity, cfg)?;
    let mut counts = vec![0usize; spec.leaves().len()];
    for e in &exits {
        if let Some(p) = e.point() {
            counts[spec.square_of(spec.level, p)] += 1;
        }
    }
    Ok(counts)
}

struct Classified {
    stages: Vec<StageRecord>,
    top_lengths: Vec<f64>,
    stops: Vec<(usize, usize)>,
    final_top: Vec<usize>,
}

/// Runs the stage recursion on leaf counts; `Err(word)` names the first
/// child whose ratio is within three standard errors of its threshold.
fn classify(p: &BatakisParams, counts: &[usize], walkers: usize) -> std::result::Result<Classified, String> {
    let leaf_level = p.depth(p.max_n);
    let mass = |m: usize, idx: usize| -> usize {
        let span = 4usize.pow((leaf_level - m) as u32);
        counts[idx * span..(idx + 1) * span].iter().sum()
    };
    let w = walkers as f64;
    let mut tops = vec![0usize];
    let mut top_lengths = vec![1.0];
    let mut stages = Vec::new();
    let mut stops = Vec::new();
    for n in 1..=p.max_n {
        let (m0, m1) = (p.depth(n - 1), p.depth(n));
        let gap = (m1 - m0) as u32;
        let threshold = 4f64.powf(-((n * p.block) as f64) * (1.0 - p.tau));
        let mut next = Vec::new();
        for &i in &tops {
            let ci = mass(m0, i);
            let parent_len = 4f64.powi(-(m0 as i32));
            let mut rec = StageRecord {
                stage: n,
                parent: CantorSpec::word(m0, i),
                parent_mass: ci as f64 / w,
                threshold,
                children: Vec::new(),
                stop: Vec::new(),
                top: Vec::new(),
                top_length: 0.0,
                decay_bound: parent_len * 4f64.powf(-((n * p.block) as f64) * p.tau),
            };
            for j in i * 4usize.pow(gap)..(i + 1) * 4usize.pow(gap) {
                let cj = mass(m1, j);
                let word = CantorSpec::word(m1, j);
                rec.children.push((word.clone(), cj as f64 / w));
                let ratio = if ci == 0 { 0.0 } else { cj as f64 / ci as f64 };
                if ci > 0 && (ratio - threshold).abs() <= 3.0 * stderr_of(ratio, ci) {
                    return Err(word);
                }
                if ratio < threshold {
                    rec.stop.push(word);
                    stops.push((m1, j));
                } else {
                    rec.top.push(word);
                    rec.top_length += 4f64.powi(-(m1 as i32));
                    next.push(j);
                }
            }
            stages.push(rec);
        }
        top_lengths.push(next.iter().map(|_| 4f64.powi(-(m1 as i32))).sum());
        tops = next;
    }
    Ok(Classified { stages, top_lengths, stops, final_top: tops })
}

/// Builds the modified domain from harmonic densities estimated with walkers
/// started at infinity on `K_L^c`, `L` the generation of `Top(max_n)`.
/// The walker count is quadrupled while some classification straddles its
/// threshold, up to `params.max_walkers`.
pub fn batakis_domain(params: BatakisParams, cfg: &WosConfig) -> Result<(BatakisDomain, BatakisSpec)> {
    params.validate()?;
    let leaf_level = params.depth(params.max_n);
    let cantor = CantorComplement { spec: Arc::new(CantorSpec::new(leaf_level)?) };
    let mut walkers = params.walkers;
    let classified = loop {
        let run = cfg.with_walkers(walkers);
        let counts = leaf_counts(&cantor, &run)?;
        log::info!("batakis pass with {walkers} walkers");
        match classify(&params, &counts, walkers) {
            Ok(c) => break c,
            Err(word) if walkers * 4 > params.max_walkers => {
                return Err(Error::IndeterminateClassification { word, walkers });
            }
            Err(_) => walkers *= 4,
        }
    };
    let spec = &cantor.spec;
    let mut squares: Vec<Square> = classified
        .stops
        .iter()
        .map(|&(m, j)| {
            let s = spec.squares(m)[j];
            Square { center: s.center, side: s.side * params.eta }
        })
        .collect();
    squares.extend(classified.final_top.iter().map(|&j| spec.squares(leaf_level)[j]));
    let bspec = BatakisSpec {
        params,
        base_seed: cfg.base_seed,
        shell: cfg.shell,
        far_field_radius: cfg.far_field_radius,
        walkers_used: walkers,
        stages: classified.stages,
        top_lengths: classified.top_lengths,
        final_top: classified.final_top.iter().map(|&j| CantorSpec::word(leaf_level, j)).collect(),
    };
    let spec = Arc::new(bspec.clone());
    Ok((BatakisDomain { squares: Arc::new(squares), spec }, bspec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_params() -> BatakisParams {
        BatakisParams { block: 1, tau: 0.05, eta: 1.05, max_n: 2, walkers: 1000, max_walkers: 1000 }
    }

    #[test]
    fn classification_of_uniform_counts_stops_everything() {
        let p = fake_params();
        let counts = vec![1000; 64];
        let c = classify(&p, &counts, 64_000).unwrap();
        assert_eq!(c.stages.len(), 1);
        assert_eq!(c.stages[0].stop.len(), 4);
        assert!(c.final_top.is_empty());
        assert_eq!(c.top_lengths, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn skewed_counts_keep_heavy_children_and_satisfy_decay() {
        let p = fake_params();
        let mut counts = vec![10; 64];
        for c in counts[0..16].iter_mut() {
            *c = 400;
        }
        let c = classify(&p, &counts, counts.iter().sum()).unwrap();
        assert_eq!(c.stages[0].top, vec!["0".to_string()]);
        assert_eq!(c.stages.len(), 2);
        assert!(c.stages.iter().all(StageRecord::decay_holds));
    }

    #[test]
    fn straddling_ratio_is_reported() {
        let p = BatakisParams { tau: 0.001, ..fake_params() };
        let counts = vec![100; 64];
        assert!(classify(&p, &counts, 6400).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(BatakisParams { eta: 1.5, ..Default::default() }.validate().is_err());
        assert!(BatakisParams { block: 3, max_n: 2, ..Default::default() }.validate().is_err());
        assert!(BatakisParams::default().validate().is_ok());
    }
}
