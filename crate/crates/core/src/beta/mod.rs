//! β-numbers, best planes, linear deviation, BLWG sums and the union-of-planes test.

mod baup;
mod deviation;
pub mod search;

pub use baup::{baup_test, BaupResult};
pub use deviation::{beta_table, blwg_sum, cube_beta, linear_deviation, BetaParams, BetaRecord, DeviationReport};

use crate::geometry::{profile_of_points, Ball, DistanceProfile, Plane, SampledSet, DEFAULT_DEPTH};
use search::{pca_plane, refine, SearchControl};

/// `(r^{-d} ∫₀¹ profile(t) t^{p-1} dt)^{1/p}` for a step profile; below the
/// sampling scale `h/r` the profile is held at its value there.
pub fn beta_of_profile(profile: &DistanceProfile, r: f64, d: usize, p: f64, h: f64) -> f64 {
    let t_min = (h / r).min(1.0);
    let mut sum = profile.at(t_min) * t_min.powf(p) / p;
    for (i, &c) in profile.content.iter().enumerate() {
        let a = profile.t[i].max(t_min);
        let b = profile.t[i + 1].min(1.0);
        if b > a && c > 0.0 {
            sum += c * (b.powf(p) - a.powf(p)) / p;
        }
    }
    (sum / r.powi(d as i32)).max(0.0).powf(1.0 / p)
}

/// `β^{d,p}(B, L)` from an explicit point list at resolution `h`.
pub fn beta_content_points(pts: &[&[f64]], ball: &Ball, plane: &Plane, p: f64, h: f64, depth: usize) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let prof = profile_of_points(pts, ball, plane, depth, h);
    beta_of_profile(&prof, ball.radius, plane.dim(), p, h)
}

/// `β^{d,p}_E(B, L)` with `d = dim L`.
pub fn beta_content(set: &SampledSet, ball: &Ball, plane: &Plane, p: f64) -> f64 {
    let pts = set.points_in_ball(ball);
    beta_content_points(&pts, ball, plane, p, set.resolution(), DEFAULT_DEPTH)
}

/// Upper bound on `inf_L β^{d,p}(B, L)` over an explicit point list.
///
/// `candidates` are extra planes evaluated alongside the refined fit.
pub fn beta_inf_points(
    pts: &[&[f64]],
    ball: &Ball,
    d: usize,
    p: f64,
    h: f64,
    depth: usize,
    budget: usize,
    candidates: &[Plane],
) -> (f64, Plane) {
    let n = ball.center.dim();
    let (start, rank) = pca_plane(pts, d, n);
    if rank < d || pts.len() <= d {
        return (0.0, start);
    }
    let ctl = SearchControl { budget: budget.max(1), angle: 0.25, shift: 0.25 * ball.radius, translate: true };
    let (mut best_plane, mut best) = refine(&start, ctl, |l| beta_content_points(pts, ball, l, p, h, depth));
    for c in candidates {
        let v = beta_content_points(pts, ball, c, p, h, depth);
        if v < best {
            best = v;
            best_plane = c.clone();
        }
    }
    (best, best_plane)
}

/// `β^{d,p}_E(B)` with `d` the target dimension of the set.
pub fn beta_inf(set: &SampledSet, ball: &Ball, p: f64, budget: usize) -> (f64, Plane) {
    let pts = set.points_in_ball(ball);
    beta_inf_points(&pts, ball, set.target_dim(), p, set.resolution(), DEFAULT_DEPTH, budget, &[])
}

/// Points per axis used to sample a plane inside a ball.
fn grid_per_axis(d: usize) -> usize {
    match d {
        1 => 129,
        2 => 33,
        _ => 11,
    }
}

/// Grid of points of `L ∩ B`.
pub fn plane_grid(plane: &Plane, ball: &Ball) -> Vec<Vec<f64>> {
    let foot = plane.project(&ball.center);
    let off = crate::geometry::dist(&foot, &ball.center);
    if off > ball.radius {
        return Vec::new();
    }
    let a = (ball.radius * ball.radius - off * off).sqrt();
    let d = plane.dim();
    let g = grid_per_axis(d);
    let step = if g > 1 { 2.0 * a / (g - 1) as f64 } else { 0.0 };
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let coords: Vec<f64> = idx.iter().map(|&i| -a + i as f64 * step).collect();
        if coords.iter().map(|c| c * c).sum::<f64>() <= a * a * (1.0 + 1e-12) {
            let mut x = foot.clone();
            for (c, b) in coords.iter().zip(&plane.basis) {
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += c * bi);
            }
            out.push(x);
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < g {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    out
}

/// `d_B(E, L)` with the plane side sampled on a grid.
pub fn bilateral_objective(set: &SampledSet, pts: &[&[f64]], ball: &Ball, plane: &Plane) -> f64 {
    let e_to_p = pts.iter().map(|x| plane.dist(x)).fold(0.0, f64::max);
    let p_to_e = plane_grid(plane, ball).iter().map(|y| set.distance(y)).fold(0.0, f64::max);
    e_to_p.max(p_to_e) / ball.radius
}

/// Upper bound on `bβ_E(B) = inf_L d_B(E, L)`.
pub fn bilateral_beta(set: &SampledSet, ball: &Ball, budget: usize) -> (f64, Plane) {
    let d = set.target_dim();
    let n = set.dim();
    let pts = set.points_in_ball(ball);
    if pts.is_empty() {
        let (start, _) = pca_plane(&[&ball.center[..]], d, n);
        let ctl = SearchControl { budget: budget.max(1), angle: 0.25, shift: 0.0, translate: false };
        let obj = |l: &Plane| plane_grid(l, ball).iter().map(|y| set.distance(y)).fold(0.0, f64::max) / ball.radius;
        let (pl, v) = refine(&start, ctl, obj);
        return (v, pl);
    }
    let stride = (pts.len() / 2000).max(1);
    let sample: Vec<&[f64]> = pts.iter().step_by(stride).copied().collect();
    let (start, rank) = pca_plane(&sample, d, n);
    let start = if rank == 0 { start.through(&ball.center) } else { start };
    let obj = |l: &Plane| bilateral_objective(set, &pts, ball, l);
    let mut starts: Vec<(f64, Plane)> = coarse_starts(&start, ball).into_iter().map(|l| (obj(&l), l)).collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ctl = SearchControl { budget: (budget / 2).max(1), angle: 0.25, shift: 0.25 * ball.radius, translate: true };
    let mut best: Option<(f64, Plane)> = None;
    for (_, l) in starts.into_iter().take(2) {
        let (pl, v) = refine(&l, ctl, obj);
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, pl));
        }
    }
    let (v, pl) = best.expect("at least one start");
    (v, pl)
}

/// Starting planes for the bilateral search: the principal fit and, for
/// lines in the plane, a coarse grid of directions and offsets.
fn coarse_starts(pca: &Plane, ball: &Ball) -> Vec<Plane> {
    let mut out = vec![pca.clone()];
    if pca.dim() == 1 && pca.ambient_dim() == 2 {
        for a in 0..12 {
            let theta = std::f64::consts::PI * a as f64 / 12.0;
            let nrm = [-theta.sin(), theta.cos()];
            for o in -3..=3 {
                let s = ball.radius * o as f64 / 4.0;
                let base = crate::geometry::Point::xy(ball.center[0] + s * nrm[0], ball.center[1] + s * nrm[1]);
                out.push(Plane::line(base, theta));
            }
        }
    } else {
        let frame = search::Frame::from_plane(pca);
        let n = frame.axes.len();
        for i in 0..frame.d {
            for j in frame.d..n {
                for sign in [-1.0, 1.0] {
                    out.push(frame.rotated(i, j, sign * std::f64::consts::FRAC_PI_4).plane());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
