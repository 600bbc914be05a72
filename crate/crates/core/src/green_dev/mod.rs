//! Whitney decompositions and the affine deviation of Green functions.

mod field;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::{linear_deviation, BetaParams};
use crate::cubes::{CubeId, CubeLattice};
use crate::error::{invalid, Error, Result};
use crate::geometry::Ball;
use crate::harmonic::{walker_seed, Domain, WosConfig};

pub use field::{AnalyticGreen, GreenField, HessianEstimate, WosGreenField};

/// Dyadic cube `corner + [0, side]^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub corner: Vec<f64>,
    pub side: f64,
}

impl WhitneyCube {
    pub fn center(&self) -> Vec<f64> {
        self.corner.iter().map(|c| c + self.side / 2.0).collect()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.corner.len() as i32)
    }

    /// Distance from `x` to the closed cube.
    pub fn dist_to(&self, x: &[f64]) -> f64 {
        self.corner
            .iter()
            .zip(x)
            .map(|(c, xi)| (c - xi).max(xi - c - self.side).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Mean of `f` over the cube by the two-point Gauss rule in each axis.
    pub fn gauss_mean(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let n = self.corner.len();
        let off = self.side / (2.0 * 3f64.sqrt());
        let c = self.center();
        let mut y = vec![0.0; n];
        let mut s = 0.0;
        for mask in 0..1usize << n {
            for a in 0..n {
                y[a] = c[a] + if mask >> a & 1 == 1 { off } else { -off };
            }
            s += f(&y);
        }
        s / (1usize << n) as f64
    }

    fn children(&self) -> Vec<WhitneyCube> {
        let n = self.corner.len();
        let h = self.side / 2.0;
        (0..1usize << n)
            .map(|mask| WhitneyCube {
                corner: (0..n).map(|a| self.corner[a] + if mask >> a & 1 == 1 { h } else { 0.0 }).collect(),
                side: h,
            })
            .collect()
    }
}

/// Maximal dyadic subcubes `I` of the root box with `N·I ⊆ Ω`, certified by
/// `δ_Ω(x_I) ≥ N·(√n/2)·ℓ(I)`; cubes are split down to `min_side`.
pub fn whitney_cubes(domain: &dyn Domain, root: &WhitneyCube, inflation: f64, min_side: f64) -> Result<Vec<WhitneyCube>> {
    if inflation < 2.0 || !(min_side > 0.0) {
        return Err(invalid("Whitney cubes need N >= 2 and a positive minimum side"));
    }
    let half_diag = (root.corner.len() as f64).sqrt() / 2.0;
    let mut out = Vec::new();
    let mut stack = vec![root.clone()];
    while let Some(q) = stack.pop() {
        let x = q.center();
        let delta = domain.dist_boundary(&x);
        let inside = domain.inside(&x);
        if !inside && delta >= half_diag * q.side {
            continue;
        }
        if inside && delta >= inflation * half_diag * q.side {
            out.push(q);
        } else if q.side / 2.0 >= min_side {
            stack.extend(q.children());
        }
    }
    out.sort_by(|a, b| b.side.total_cmp(&a.side).then_with(|| a.corner.partial_cmp(&b.corner).expect("finite")));
    Ok(out)
}

/// Square root box `[lo, lo + side]^n` containing the bounding box of the boundary.
pub fn bounding_cube(domain: &dyn Domain) -> WhitneyCube {
    let (lo, hi) = domain.bbox();
    let side = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    WhitneyCube { corner: lo, side }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationParams {
    /// Whitney inflation `N`.
    pub inflation: f64,
    pub min_side: f64,
}

impl Default for DeviationParams {
    fn default() -> Self {
        DeviationParams { inflation: 4.0, min_side: 1.0 / 128.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationCell {
    pub cube: WhitneyCube,
    pub delta: f64,
    pub g: f64,
    pub hessian_norm: f64,
    pub noise: f64,
    pub contribution: f64,
    pub clamped: bool,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationIntegral {
    /// `Σ per_cell` in cell order.
    pub value: f64,
    pub per_cell: Vec<DeviationCell>,
    /// Contributions zeroed because the Hessian was below twice its noise.
    pub clamped_mass: f64,
    /// Volume of cells skipped for a non-positive Green estimate.
    pub skipped_mass: f64,
    pub resolution: f64,
    pub pole: Option<Vec<f64>>,
    pub excluded: Option<Ball>,
}

impl DeviationIntegral {
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": self.value,
            "clamped_mass": self.clamped_mass,
            "skipped_mass": self.skipped_mass,
            "resolution": self.resolution,
            "pole": self.pole,
            "excluded": self.excluded,
            "cells": self.per_cell.len(),
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.per_cell.first().map_or(0, |c| c.cube.corner.len());
        let mut header: Vec<String> = (0..n).map(|a| format!("corner{a}")).collect();
        header.extend(["side", "delta", "g", "hessian_norm", "noise", "contribution", "clamped", "skipped"].map(String::from));
        wr.write_record(&header)?;
        for c in &self.per_cell {
            let mut row: Vec<String> = c.cube.corner.iter().map(|v| v.to_string()).collect();
            row.extend([
                c.cube.side.to_string(),
                c.delta.to_string(),
                c.g.to_string(),
                c.hessian_norm.to_string(),
                c.noise.to_string(),
                c.contribution.to_string(),
                c.clamped.to_string(),
                c.skipped.to_string(),
            ]);
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Quadrature of `∫_{Ω∖B} |∇²g/g|² δ_Ω³` over Whitney cells, one term
/// `|∇²g/g|²(x_I)·⨍_I δ_Ω³·|I|` per cell, the cube mean of `δ_Ω³` taken by
/// the tensor Gauss rule.
pub fn affine_deviation_integral(
    domain: &dyn Domain,
    field: &dyn GreenField,
    root: &WhitneyCube,
    excluded: Option<&Ball>,
    params: &DeviationParams,
) -> Result<DeviationIntegral> {
    if let Some(b) = excluded {
        let probe = b.scaled(2.0);
        if !domain.inside(&b.center) || domain.dist_boundary(&b.center) < probe.radius {
            return Err(invalid("twice the excluded ball must lie in the domain"));
        }
    }
    let cubes: Vec<WhitneyCube> = whitney_cubes(domain, root, params.inflation, params.min_side)?
        .into_iter()
        .filter(|q| excluded.is_none_or(|b| !b.contains(&q.center())))
        .collect();
    let per_cell: Vec<DeviationCell> = cubes
        .into_par_iter()
        .enumerate()
        .map(|(i, cube)| -> Result<DeviationCell> {
            let x = cube.center();
            let delta = domain.dist_boundary(&x);
            let est = field.hessian(&x, cube.side / 4.0, i as u64)?;
            let hn = frobenius(&est.hessian);
            let noise = 2.0 * frobenius(&est.hessian_stderr);
            let skipped = !(est.g > 0.0);
            let weight = cube.gauss_mean(|y| domain.dist_boundary(y).powi(3));
            let raw = if skipped { 0.0 } else { (hn / est.g).powi(2) * weight * cube.volume() };
            let clamped = !skipped && hn < noise;
            Ok(DeviationCell {
                contribution: if clamped { 0.0 } else { raw },
                noise: if clamped { raw } else { 0.0 },
                cube,
                delta,
                g: est.g,
                hessian_norm: hn,
                clamped,
                skipped,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DeviationIntegral {
        value: per_cell.iter().map(|c| c.contribution).sum(),
        clamped_mass: per_cell.iter().map(|c| c.noise).sum(),
        skipped_mass: per_cell.iter().filter(|c| c.skipped).map(|c| c.cube.volume()).sum(),
        per_cell,
        resolution: params.min_side,
        pole: field.pole(),
        excluded: excluded.cloned(),
    })
}

/// `γ(Q) = (⨍_{U} |∇²g/g|² ℓ(Q)⁴)^{1/2}` over the Whitney cubes meeting
/// `K'·B_Q` with side at least `ℓ(Q)/K'`, `K' = 2K/ρ`.
pub fn gamma_coefficient(
    field: &dyn GreenField,
    whitney: &[WhitneyCube],
    lattice: &CubeLattice,
    q: CubeId,
    k: f64,
) -> Result<f64> {
    let cube = lattice.cube(q);
    let kk = 2.0 * k / lattice.rho;
    let ball = cube.inflated_ball(kk);
    let region: Vec<&WhitneyCube> =
        whitney.iter().filter(|w| w.side >= cube.side / kk && w.dist_to(&ball.center) <= ball.radius).collect();
    if region.is_empty() {
        return Err(Error::EmptyWhitneyRegion(q));
    }
    let seed0 = ((q.level as u64) << 40) ^ q.index as u64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, w) in region.iter().enumerate() {
        let est = field.hessian(&w.center(), w.side / 4.0, walker_seed(seed0, i as u64))?;
        if !(est.g > 0.0) {
            continue;
        }
        num += (frobenius(&est.hessian) / est.g).powi(2) * w.volume();
        den += w.volume();
    }
    if den == 0.0 {
        return Err(Error::EmptyWhitneyRegion(q));
    }
    Ok((num / den * cube.side.powi(4)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenBetaReport {
    pub boundary_diam: f64,
    pub integral: f64,
    pub clamped_mass: f64,
    pub skipped_mass: f64,
    pub deviation: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub excluded: Ball,
    pub params: DeviationParams,
    pub walkers: usize,
    pub base_seed: u64,
}

/// `(diam ∂Ω)^d + ∫ |∇²g/g|²δ³` against the linear deviation of the whole
/// boundary, for `g = G_Ω(pole, ·)`.
pub fn compare_green_beta(
    domain: &dyn Domain,
    lattice: &CubeLattice,
    pole: &[f64],
    excluded_fraction: f64,
    params: &DeviationParams,
    beta: &BetaParams,
    cfg: &WosConfig,
) -> Result<GreenBetaReport> {
    let set = &lattice.source;
    let d = set.target_dim() as i32;
    let diam = lattice.diam;
    let radius = (excluded_fraction * diam).min(0.45 * domain.dist_boundary(pole));
    let excluded = Ball { center: crate::geometry::Point::new(pole.to_vec())?, radius };
    let field = WosGreenField::new(domain, pole, *cfg)?;
    let integral = affine_deviation_integral(domain, &field, &bounding_cube(domain), Some(&excluded), params)?;
    let deviation = linear_deviation(lattice, CubeId::new(0, 0), beta)?.total;
    let lhs = diam.powi(d) + integral.value;
    Ok(GreenBetaReport {
        boundary_diam: diam,
        integral: integral.value,
        clamped_mass: integral.clamped_mass,
        skipped_mass: integral.skipped_mass,
        deviation,
        lhs,
        rhs: deviation,
        ratio: lhs / deviation,
        excluded,
        params: *params,
        walkers: cfg.walkers,
        base_seed: cfg.base_seed,
    })
}

#[cfg(test)]
mod tests;
