use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::dist;
use crate::harmonic::{green_sample, walker_seed, Domain, DomainKind, WosConfig};

/// Value and Hessian of a Green function at a point, row-major `n×n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianEstimate {
    pub g: f64,
    pub g_stderr: f64,
    pub hessian: Vec<f64>,
    pub hessian_stderr: Vec<f64>,
}

/// Source of `g` and `∇²g` at Whitney-cell centers.
pub trait GreenField: Sync {
    /// `step` is the stencil spacing for difference schemes; `key` seeds
    /// random estimators.
    fn hessian(&self, x: &[f64], step: f64, key: u64) -> Result<HessianEstimate>;

    fn pole(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Exact values of a closed-form `g`, differentiated by second-order central
/// differences.
pub struct AnalyticGreen<F: Fn(&[f64]) -> f64 + Sync> {
    pub g: F,
    pub dim: usize,
}

impl<F: Fn(&[f64]) -> f64 + Sync> GreenField for AnalyticGreen<F> {
    fn hessian(&self, x: &[f64], step: f64, _key: u64) -> Result<HessianEstimate> {
        let n = self.dim;
        let at = |di: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(a, s) in di {
                y[a] += s * step;
            }
            (self.g)(&y)
        };
        let g0 = (self.g)(x);
        let mut h = vec![0.0; n * n];
        let s2 = step * step;
        for i in 0..n {
            h[i * n + i] = (at(&[(i, 1.0)]) - 2.0 * g0 + at(&[(i, -1.0)])) / s2;
            for j in i + 1..n {
                let v = (at(&[(i, 1.0), (j, 1.0)]) - at(&[(i, 1.0), (j, -1.0)]) - at(&[(i, -1.0), (j, 1.0)])
                    + at(&[(i, -1.0), (j, -1.0)]))
                    / (4.0 * s2);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        Ok(HessianEstimate { g: g0, g_stderr: 0.0, hessian: h, hessian_stderr: vec![0.0; n * n] })
    }
}

/// Walk-on-spheres field of `G_Ω(pole, ·)` in the plane. The Hessian uses
/// the mean-value identity `∇²g(x) = (8/r²)·E[g(x + r·u)(uuᵀ − I/2)]` on a
/// circle inside the harmonicity region, sampled with antithetic quadruples
/// `±u, ±u^⊥` whose continuations are independent walks.
pub struct WosGreenField<'a> {
    pub domain: &'a dyn Domain,
    pub pole: Vec<f64>,
    pub cfg: WosConfig,
    /// Circle radius as a fraction of `min(δ_Ω(x), |x − pole|)`.
    pub radius_fraction: f64,
}

impl<'a> WosGreenField<'a> {
    pub fn new(domain: &'a dyn Domain, pole: &[f64], cfg: WosConfig) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::Unsupported("walk-on-spheres Hessians outside the plane".into()));
        }
        if matches!(domain.kind(), DomainKind::ExteriorOfCompact { .. }) {
            return Err(Error::Unsupported("Green functions of exterior domains".into()));
        }
        if !domain.inside(pole) {
            return Err(Error::PoleOutsideDomain);
        }
        cfg.validate()?;
        Ok(WosGreenField { domain, pole: pole.to_vec(), cfg, radius_fraction: 0.9 })
    }
}

impl GreenField for WosGreenField<'_> {
    fn hessian(&self, x: &[f64], _step: f64, key: u64) -> Result<HessianEstimate> {
        if !self.domain.inside(x) || dist(x, &self.pole) == 0.0 {
            return Err(invalid("Hessian point must be inside the domain and away from the pole"));
        }
        let r = self.radius_fraction * self.domain.dist_boundary(x).min(dist(x, &self.pole));
        let base = walker_seed(self.cfg.base_seed, key);
        let w = self.cfg.walkers;
        // one quadruple per walker index: directions and continuation seeds
        let samples: Vec<[f64; 4]> = (0..w as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(walker_seed(base, i));
                let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let (c, s) = (t.cos(), t.sin());
                let dirs = [[c, s], [-s, c], [-c, -s], [s, -c]];
                let pts: Vec<Vec<f64>> = dirs.iter().map(|u| vec![x[0] + r * u[0], x[1] + r * u[1]]).collect();
                let mut g = [0.0; 4];
                for (gk, p) in g.iter_mut().zip(&pts) {
                    *gk = green_sample(self.domain, &self.pole, p, &self.cfg, &mut rng);
                }
                // packed as (g mean, h_xx, h_xy, spare)
                let comb = g[0] + g[2] - g[1] - g[3];
                let scale = 8.0 / (r * r) / 4.0;
                [(g[0] + g[1] + g[2] + g[3]) / 4.0, scale * (c * c - 0.5) * comb, scale * c * s * comb, 0.0]
            })
            .collect();
        let mean = |k: usize| samples.iter().map(|v| v[k]).sum::<f64>() / w as f64;
        let se = |k: usize, m: f64| {
            let var = samples.iter().map(|v| (v[k] - m).powi(2)).sum::<f64>() / (w.max(2) - 1) as f64;
            (var / w as f64).sqrt()
        };
        let (g, hxx, hxy) = (mean(0), mean(1), mean(2));
        let (sg, sxx, sxy) = (se(0, g), se(1, hxx), se(2, hxy));
        Ok(HessianEstimate {
            g,
            g_stderr: sg,
            hessian: vec![hxx, hxy, hxy, -hxx],
            hessian_stderr: vec![sxx, sxy, sxy, sxx],
        })
    }

    fn pole(&self) -> Option<Vec<f64>> {
        Some(self.pole.clone())
    }
}
