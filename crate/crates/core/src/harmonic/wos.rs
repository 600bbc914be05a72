//! Walk-on-spheres sampling of Brownian exit positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{Domain, DomainKind};
use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, KdTree, Ball};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WosConfig {
    /// Absorption distance ε.
    pub shell: f64,
    pub max_steps: usize,
    pub walkers: usize,
    pub base_seed: u64,
    /// Radius `R_far` of the re-insertion circle for exterior domains.
    pub far_field_radius: Option<f64>,
}

impl WosConfig {
    pub fn new(walkers: usize, base_seed: u64) -> Self {
        WosConfig { shell: 1e-4, max_steps: 100_000, walkers, base_seed, far_field_radius: None }
    }

    /// Defaults scaled to a domain: shell `1e-4·scale` and, for exterior
    /// domains, `R_far = 50·diam`.
    pub fn for_domain(domain: &dyn Domain, walkers: usize, base_seed: u64) -> Self {
        let scale = domain.scale();
        let far = match domain.kind() {
            DomainKind::ExteriorOfCompact { radius, .. } => Some(50.0 * 2.0 * radius),
            _ => None,
        };
        WosConfig { shell: 1e-4 * scale, far_field_radius: far, ..WosConfig::new(walkers, base_seed) }
    }

    pub fn with_seed(self, base_seed: u64) -> Self {
        WosConfig { base_seed, ..self }
    }

    pub fn with_walkers(self, walkers: usize) -> Self {
        WosConfig { walkers, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shell > 0.0) {
            return Err(invalid("shell must be positive"));
        }
        if self.walkers == 0 {
            return Err(invalid("at least one walker is needed"));
        }
        Ok(())
    }
}

/// Starting position of the walkers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Pole {
    Point(Vec<f64>),
    /// Uniform start on the far-field circle of an exterior planar domain,
    /// which reproduces harmonic measure with pole at infinity.
    AtInfinity,
}

impl Pole {
    pub fn point(x: &[f64]) -> Pole {
        Pole::Point(x.to_vec())
    }
}

/// Seed of walker `i`, a counter-based mix of the base seed.
pub fn walker_seed(base: u64, i: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(base ^ splitmix(i.wrapping_add(0x632B_E59B_D9B4_E019)))
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize, out: &mut [f64]) {
    if n == 2 {
        let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        out[0] = t.cos();
        out[1] = t.sin();
        return;
    }
    loop {
        let mut s = 0.0;
        for o in out.iter_mut().take(n) {
            *o = rng.sample(StandardNormal);
            s += *o * *o;
        }
        if s > 1e-24 {
            let l = s.sqrt();
            out.iter_mut().take(n).for_each(|o| *o /= l);
            return;
        }
    }
}

/// Exit point on the circle `|z − c| = R` of planar Brownian motion started
/// at `x` outside it: invert `x` into the disk, then push the uniform
/// measure through the disk automorphism taking 0 to the inverted point.
fn exterior_circle_hit(rng: &mut ChaCha8Rng, x: &[f64], c: &[f64], r: f64) -> [f64; 2] {
    let (ux, uy) = ((x[0] - c[0]) / r, (x[1] - c[1]) / r);
    let m2 = ux * ux + uy * uy;
    let (zx, zy) = (ux / m2, uy / m2);
    let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let (wx, wy) = (t.cos(), t.sin());
    // (w + z) / (1 + conj(z) w)
    let (nx, ny) = (wx + zx, wy + zy);
    let (dx, dy) = (1.0 + zx * wx + zy * wy, zx * wy - zy * wx);
    let den = dx * dx + dy * dy;
    let (qx, qy) = ((nx * dx + ny * dy) / den, (ny * dx - nx * dy) / den);
    [c[0] + r * qx, c[1] + r * qy]
}

/// Result of one walk.
#[derive(Clone, Debug, PartialEq)]
pub enum Exit {
    /// Nearest boundary point to the first position within the shell, or
    /// that position itself when the domain cannot project.
    Absorbed(Vec<f64>),
    Escaped,
}

impl Exit {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            Exit::Absorbed(p) => Some(p),
            Exit::Escaped => None,
        }
    }
}

fn far_field(domain: &dyn Domain, cfg: &WosConfig) -> Option<(Vec<f64>, f64)> {
    match domain.kind() {
        DomainKind::ExteriorOfCompact { center, radius } => {
            Some((center, cfg.far_field_radius.unwrap_or(100.0 * radius)))
        }
        _ => None,
    }
}

fn walk(domain: &dyn Domain, start: &[f64], cfg: &WosConfig, far: &Option<(Vec<f64>, f64)>, rng: &mut ChaCha8Rng) -> Exit {
    let n = start.len();
    let mut x = start.to_vec();
    let mut dir = vec![0.0; n];
    for _ in 0..cfg.max_steps {
        let r = domain.dist_boundary(&x);
        if r < cfg.shell {
            return Exit::Absorbed(domain.nearest_boundary_point(&x).unwrap_or(x));
        }
        if let Some((c, rf)) = far {
            if dist(&x, c) > 2.0 * rf {
                if n != 2 {
                    return Exit::Escaped;
                }
                let p = exterior_circle_hit(rng, &x, c, *rf);
                x.copy_from_slice(&p);
                continue;
            }
        }
        random_direction(rng, n, &mut dir);
        x.iter_mut().zip(&dir).for_each(|(xi, di)| *xi += r * di);
    }
    Exit::Escaped
}

fn start_point(domain: &dyn Domain, pole: &Pole, cfg: &WosConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match pole {
        Pole::Point(p) => Ok(p.clone()),
        Pole::AtInfinity => {
            let (c, rf) = far_field(domain, cfg).ok_or_else(|| invalid("a pole at infinity needs an exterior domain"))?;
            if domain.dim() != 2 {
                return Err(Error::Unsupported("pole at infinity outside the plane".into()));
            }
            let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            Ok(vec![c[0] + rf * t.cos(), c[1] + rf * t.sin()])
        }
    }
}

/// Exit positions of `cfg.walkers` independent walks, in walker order.
/// Walker `i` uses the seed `walker_seed(cfg.base_seed, i)`, so the output
/// does not depend on the number of threads.
pub fn run_walkers(domain: &dyn Domain, pole: &Pole, cfg: &WosConfig) -> Result<Vec<Exit>> {
    cfg.validate()?;
    if let Pole::Point(p) = pole {
        if p.len() != domain.dim() {
            return Err(invalid("pole dimension does not match the domain"));
        }
        if !domain.inside(p) {
            return Err(Error::PoleOutsideDomain);
        }
    }
    let far = far_field(domain, cfg);
    (0..cfg.walkers as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(walker_seed(cfg.base_seed, i));
            let s = start_point(domain, pole, cfg, &mut rng)?;
            Ok(walk(domain, &s, cfg, &far, &mut rng))
        })
        .collect()
}

/// Region of the boundary that collects walkers.
#[derive(Clone, Debug)]
pub enum Region {
    Ball(Ball),
    /// Sample cloud; a point belongs to it when within `tolerance` of a sample.
    Cloud { points: Vec<Vec<f64>>, tolerance: f64 },
}

#[derive(Clone, Debug)]
pub struct Target {
    pub id: String,
    pub region: Region,
}

impl Target {
    pub fn ball(id: impl Into<String>, ball: Ball) -> Self {
        Target { id: id.into(), region: Region::Ball(ball) }
    }
}

enum Locator {
    Ball(Ball),
    Cloud(KdTree, f64),
}

impl Locator {
    fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Locator::Ball(b) => (dist(x, &b.center) - b.radius).max(0.0),
            Locator::Cloud(t, tol) => (t.nearest(x).map_or(f64::INFINITY, |(_, d)| d) - tol).max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetMass {
    pub id: String,
    pub mass: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEstimate {
    pub pole: Pole,
    pub walkers: usize,
    pub base_seed: u64,
    pub shell: f64,
    pub targets: Vec<TargetMass>,
    /// Absorbed mass outside every target.
    pub other: f64,
    pub escaped: f64,
}

impl HarmonicEstimate {
    pub fn mass(&self, id: &str) -> Option<&TargetMass> {
        self.targets.iter().find(|t| t.id == id)
    }

    /// `Σ masses + other + escaped`, which is 1 up to rounding.
    pub fn total(&self) -> f64 {
        self.targets.iter().map(|t| t.mass).sum::<f64>() + self.other + self.escaped
    }
}

pub fn stderr_of(p: f64, walkers: usize) -> f64 {
    (p * (1.0 - p) / walkers as f64).max(0.0).sqrt()
}

/// Index of the target collecting an exit position: the lowest-index target
/// containing it, else the nearest target within `2·shell`.
fn attribute(locators: &[Locator], x: &[f64], shell: f64) -> Option<usize> {
    let mut near: Option<(f64, usize)> = None;
    for (k, l) in locators.iter().enumerate() {
        let d = l.distance(x);
        if d == 0.0 {
            return Some(k);
        }
        if d <= 2.0 * shell && near.is_none_or(|(b, _)| d < b) {
            near = Some((d, k));
        }
    }
    near.map(|(_, k)| k)
}

/// Harmonic measure of each target seen from the pole.
pub fn wos_measure(domain: &dyn Domain, pole: &Pole, targets: &[Target], cfg: &WosConfig) -> Result<HarmonicEstimate> {
    let exits = run_walkers(domain, pole, cfg)?;
    let locators: Vec<Locator> = targets
        .iter()
        .map(|t| match &t.region {
            Region::Ball(b) => Locator::Ball(b.clone()),
            Region::Cloud { points, tolerance } => {
                let coords: Vec<f64> = points.iter().flatten().copied().collect();
                Locator::Cloud(KdTree::new(&coords, domain.dim()), *tolerance)
            }
        })
        .collect();
    let mut counts = vec![0usize; targets.len()];
    let mut other = 0usize;
    let mut escaped = 0usize;
    for e in &exits {
        match e.point() {
            None => escaped += 1,
            Some(x) => match attribute(&locators, x, cfg.shell) {
                Some(k) => counts[k] += 1,
                None => other += 1,
            },
        }
    }
    let w = cfg.walkers as f64;
    Ok(HarmonicEstimate {
        pole: pole.clone(),
        walkers: cfg.walkers,
        base_seed: cfg.base_seed,
        shell: cfg.shell,
        targets: targets
            .iter()
            .zip(&counts)
            .map(|(t, &c)| TargetMass { id: t.id.clone(), mass: c as f64 / w, stderr: stderr_of(c as f64 / w, cfg.walkers) })
            .collect(),
        other: other as f64 / w,
        escaped: escaped as f64 / w,
    })
}

/// Fundamental solution of `−Δ`: `−log|x|/2π` in the plane, `c_n|x|^{2−n}` otherwise.
pub fn fundamental_solution(x: &[f64]) -> f64 {
    let n = x.len();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 2 {
        -r.ln() / std::f64::consts::TAU
    } else {
        let half = n as f64 / 2.0;
        let area = 2.0 * std::f64::consts::PI.powf(half) / gamma(half);
        r.powf(2.0 - n as f64) / ((n as f64 - 2.0) * area)
    }
}

/// Γ at positive integers and half-integers.
fn gamma(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as u64).map(|k| k as f64).product()
    } else {
        let mut v = std::f64::consts::PI.sqrt();
        let mut t = 0.5;
        while t < x - 1e-12 {
            v *= t;
            t += 1.0;
        }
        v
    }
}

/// Per-walker Green samples `Φ(q − p) − Φ(X_τ − p)` for each query, all
/// queries sharing the same walker seeds.
#[derive(Clone, Debug)]
pub struct GreenSamples {
    pub queries: Vec<Vec<f64>>,
    /// `values[j][i]`: walker `i` started at query `j`.
    pub values: Vec<Vec<f64>>,
}

impl GreenSamples {
    pub fn mean(&self, j: usize) -> f64 {
        let v = &self.values[j];
        v.iter().sum::<f64>() / v.len() as f64
    }

    pub fn stderr(&self, j: usize) -> f64 {
        let v = &self.values[j];
        let m = self.mean(j);
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len().max(2) - 1) as f64;
        (var / v.len() as f64).sqrt()
    }
}

pub fn green_samples(domain: &dyn Domain, pole: &[f64], queries: &[Vec<f64>], cfg: &WosConfig) -> Result<GreenSamples> {
    cfg.validate()?;
    if matches!(domain.kind(), DomainKind::ExteriorOfCompact { .. }) {
        return Err(Error::Unsupported("Green functions of exterior domains".into()));
    }
    if !domain.inside(pole) {
        return Err(Error::PoleOutsideDomain);
    }
    for q in queries {
        if !domain.inside(q) {
            return Err(Error::PoleOutsideDomain);
        }
        if dist(q, pole) == 0.0 {
            return Err(invalid("query coincides with the pole"));
        }
    }
    let rel = |a: &[f64]| -> Vec<f64> { a.iter().zip(pole).map(|(x, p)| x - p).collect() };
    let values = queries
        .iter()
        .map(|q| {
            let base = fundamental_solution(&rel(q));
            (0..cfg.walkers as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(walker_seed(cfg.base_seed, i));
                    let x = match walk(domain, q, cfg, &None, &mut rng) {
                        Exit::Absorbed(x) => x,
                        Exit::Escaped => return 0.0,
                    };
                    base - fundamental_solution(&rel(&x))
                })
                .collect()
        })
        .collect();
    Ok(GreenSamples { queries: queries.to_vec(), values })
}

/// One walker's Green sample `Φ(q − p) − Φ(X_τ − p)` drawn from `rng`.
pub(crate) fn green_sample(domain: &dyn Domain, pole: &[f64], q: &[f64], cfg: &WosConfig, rng: &mut ChaCha8Rng) -> f64 {
    let rel = |a: &[f64]| -> Vec<f64> { a.iter().zip(pole).map(|(x, p)| x - p).collect() };
    match walk(domain, q, cfg, &None, rng) {
        Exit::Absorbed(x) => fundamental_solution(&rel(q)) - fundamental_solution(&rel(&x)),
        Exit::Escaped => 0.0,
    }
}

/// Estimate and standard error of `G_Ω(pole, query)`.
pub fn wos_green(domain: &dyn Domain, pole: &[f64], query: &[f64], cfg: &WosConfig) -> Result<(f64, f64)> {
    let s = green_samples(domain, pole, &[query.to_vec()], cfg)?;
    Ok((s.mean(0), s.stderr(0)))
}
