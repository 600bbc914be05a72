//! Density, Bourgain, doubling, log-integral and Hruščev-bound evaluations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::wos::{run_walkers, stderr_of, walker_seed, wos_measure, Pole, Target, WosConfig};
use crate::cubes::{CubeId, CubeLattice};
use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, Ball, SampledSet};

const MAX_REJECTIONS: usize = 100_000;

/// `Θ^d(A) = ω̂(A)/(diam A)^d` with its propagated standard error.
pub fn density(mass: f64, stderr: f64, diam: f64, d: usize) -> Result<(f64, f64)> {
    if !(diam > 0.0) {
        return Err(invalid("density needs a positive diameter"));
    }
    let s = diam.powi(d as i32);
    Ok((mass / s, stderr / s))
}

/// Uniform point of `B(center, radius)` satisfying `accept`, by rejection.
fn sample_in_ball(rng: &mut ChaCha8Rng, ball: &Ball, mut accept: impl FnMut(&[f64]) -> bool) -> Option<Vec<f64>> {
    let n = ball.center.dim();
    let mut x = vec![0.0; n];
    for _ in 0..MAX_REJECTIONS {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = ball.center[i] + ball.radius * (2.0 * rng.random::<f64>() - 1.0);
        }
        if dist(&x, &ball.center) < ball.radius && accept(&x) {
            return Some(x.clone());
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSample {
    pub pole: Vec<f64>,
    pub mass: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BourgainReport {
    pub ball: Ball,
    pub samples: Vec<PoleSample>,
    pub min: f64,
    pub argmin: Vec<f64>,
}

fn pole_config(cfg: &WosConfig, salt: u64, k: usize) -> WosConfig {
    cfg.with_seed(walker_seed(cfg.base_seed ^ salt, k as u64))
}

/// `min ω̂^x(2B)` over `n_poles` interior points `x ∈ B ∩ Ω`.
pub fn check_bourgain(domain: &dyn Domain, ball: &Ball, n_poles: usize, cfg: &WosConfig) -> Result<BourgainReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(walker_seed(cfg.base_seed, u64::MAX));
    let target = [Target::ball("2B", ball.scaled(2.0))];
    let mut samples = Vec::with_capacity(n_poles);
    for k in 0..n_poles {
        let x = sample_in_ball(&mut rng, ball, |x| domain.inside(x) && domain.dist_boundary(x) > cfg.shell)
            .ok_or(Error::NoInteriorPoint { attempts: MAX_REJECTIONS })?;
        let est = wos_measure(domain, &Pole::Point(x.clone()), &target, &pole_config(cfg, 0xB0B0, k))?;
        samples.push(PoleSample { pole: x, mass: est.targets[0].mass, stderr: est.targets[0].stderr });
    }
    let best = samples
        .iter()
        .min_by(|a, b| a.mass.total_cmp(&b.mass))
        .ok_or_else(|| invalid("at least one pole is needed"))?;
    Ok(BourgainReport { ball: ball.clone(), min: best.mass, argmin: best.pole.clone(), samples: samples.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingEntry {
    pub ball: Ball,
    pub pole: Vec<f64>,
    pub mass_ball: f64,
    pub mass_double: f64,
    pub stderr_ball: f64,
    pub stderr_double: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub alpha: f64,
    pub inflation: f64,
    pub entries: Vec<DoublingEntry>,
    pub max_ratio: f64,
}

/// Ratios `ω̂^x(2B)/ω̂^x(B)` for poles with `dist(x, A·B ∩ ∂Ω) ≥ α|x − x_B|`,
/// drawn from `B(x_B, 2A·r_B) ∩ Ω`; `boundary` supplies `A·B ∩ ∂Ω`.
pub fn check_doubling(
    domain: &dyn Domain,
    boundary: &SampledSet,
    balls: &[Ball],
    alpha: f64,
    inflation: f64,
    poles_per_ball: usize,
    cfg: &WosConfig,
) -> Result<DoublingReport> {
    if inflation < 2.0 {
        return Err(invalid("the inflation factor must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(walker_seed(cfg.base_seed, u64::MAX - 1));
    let mut entries = Vec::new();
    for (b, ball) in balls.iter().enumerate() {
        let near: Vec<Vec<f64>> = boundary.points_in_ball(&ball.scaled(inflation)).iter().map(|p| p.to_vec()).collect();
        let region = ball.scaled(2.0 * inflation);
        let targets = [Target::ball("B", ball.clone()), Target::ball("2B\\B", ball.scaled(2.0))];
        for k in 0..poles_per_ball {
            let x = sample_in_ball(&mut rng, &region, |x| {
                let gap = near.iter().map(|p| dist(x, p)).fold(f64::INFINITY, f64::min);
                domain.inside(x) && domain.dist_boundary(x) > cfg.shell && gap >= alpha * dist(x, &ball.center)
            })
            .ok_or(Error::NoInteriorPoint { attempts: MAX_REJECTIONS })?;
            let est = wos_measure(domain, &Pole::Point(x.clone()), &targets, &pole_config(cfg, 0xD0D0, b * poles_per_ball + k))?;
            let inner = est.targets[0].mass;
            let outer = inner + est.targets[1].mass;
            entries.push(DoublingEntry {
                ball: ball.clone(),
                pole: x,
                mass_ball: inner,
                mass_double: outer,
                stderr_ball: est.targets[0].stderr,
                stderr_double: stderr_of(outer, cfg.walkers),
                ratio: if inner > 0.0 { outer / inner } else { f64::INFINITY },
            });
        }
    }
    let max_ratio = entries.iter().map(|e| e.ratio).fold(1.0, f64::max);
    Ok(DoublingReport { alpha, inflation, entries, max_ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeTerm {
    pub cube: CubeId,
    /// Surface mass `h·#members`.
    pub sigma: f64,
    pub omega: f64,
    /// Zero-count cube floored at `1/(10·walkers)`.
    pub floored: bool,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogIntegral {
    pub root: CubeId,
    pub bottom_level: usize,
    pub value: f64,
    pub root_omega: f64,
    pub root_sigma: f64,
    pub per_cube: Vec<CubeTerm>,
    /// Share of the root's surface mass carried by floored cubes.
    pub floored_fraction: f64,
    pub walkers: usize,
    pub base_seed: u64,
}

/// Discrete form of `1 + ⨍ log(1/k) dσ + log ⨍ k dσ` over the cubes `depth`
/// levels below `root`, with `k` the density of harmonic measure from `pole`
/// against surface mass.
pub fn log_integral(
    domain: &dyn Domain,
    lattice: &CubeLattice,
    root: CubeId,
    pole: &Pole,
    depth: usize,
    inflation: f64,
    cfg: &WosConfig,
) -> Result<LogIntegral> {
    let bottom = root.level + depth;
    if bottom > lattice.max_level() {
        return Err(Error::ResolutionExceeded { requested: bottom, deepest: lattice.max_level() });
    }
    if let Pole::Point(p) = pole {
        if lattice.cube(root).inflated_ball(inflation).contains(p) {
            return Err(Error::PoleTooClose);
        }
    }
    let set = &lattice.source;
    let exits = run_walkers(domain, pole, cfg)?;
    let cubes = lattice.descendants_at(root, bottom);
    let mut slot = std::collections::HashMap::new();
    for (s, q) in cubes.iter().enumerate() {
        slot.insert(q.index, s);
    }
    let mut counts = vec![0usize; cubes.len()];
    for e in &exits {
        let Some(x) = e.point() else { continue };
        let Some((i, _)) = set.nearest(x) else { continue };
        if let Some(&s) = slot.get(&lattice.owner(bottom, i).index) {
            counts[s] += 1;
        }
    }
    let w = cfg.walkers as f64;
    let h = set.resolution();
    let sigma: Vec<f64> = cubes.iter().map(|q| h * lattice.cube(*q).members.len() as f64).collect();
    let root_sigma: f64 = sigma.iter().sum();
    let root_omega = counts.iter().sum::<usize>() as f64 / w;
    if root_omega == 0.0 {
        return Err(invalid("no walker reached the root cube"));
    }
    let floor = 1.0 / (10.0 * w);
    let mut per_cube = Vec::with_capacity(cubes.len());
    let mut floored_sigma = 0.0;
    let mut sum = 0.0;
    for ((q, &c), &s) in cubes.iter().zip(&counts).zip(&sigma) {
        let floored = c == 0;
        let omega = if floored { floor } else { c as f64 / w };
        if floored {
            floored_sigma += s;
        }
        let contribution = s / root_sigma * (s / omega).ln();
        sum += contribution;
        per_cube.push(CubeTerm { cube: *q, sigma: s, omega, floored, contribution });
    }
    Ok(LogIntegral {
        root,
        bottom_level: bottom,
        value: 1.0 + sum + (root_omega / root_sigma).ln(),
        root_omega,
        root_sigma,
        per_cube,
        floored_fraction: floored_sigma / root_sigma,
        walkers: cfg.walkers,
        base_seed: cfg.base_seed,
    })
}

/// `exp(−C·(ℓ^d/ℋ^d_∞(E))·exp(C·Σβ²ℓ^d/ℋ^d_∞(E)))`, a lower bound for `ω(E)/ω(Q₀)`.
pub fn hruscev_bound(ell_d: f64, content: f64, beta_sum: f64, c: f64) -> Result<f64> {
    if !(content > 0.0) {
        return Err(invalid("the content of E must be positive"));
    }
    Ok((-c * (ell_d / content) * (c * beta_sum / content).exp()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_arithmetic() {
        let (t, _) = density(0.25, 0.0, 2f64.sqrt(), 1).unwrap();
        assert!((t - 0.17677669529663687).abs() < 1e-12);
        let (a, _) = density(0.3, 0.0, 1.0, 2).unwrap();
        let (b, _) = density(0.3, 0.0, 2.0, 2).unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
        assert_eq!(density(0.0, 0.0, 1.0, 1).unwrap().0, 0.0);
        assert!(density(0.1, 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn hruscev_limits() {
        let c = 1.7;
        assert!((hruscev_bound(2.0, 2.0, 0.0, c).unwrap() - (-c).exp()).abs() < 1e-15);
        assert!(hruscev_bound(1.0, 1e-3, 0.0, 1.0).unwrap() < 1e-300);
        assert!(hruscev_bound(1.0, 0.0, 0.0, 1.0).is_err());
    }
}
