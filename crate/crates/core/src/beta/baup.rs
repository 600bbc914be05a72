use serde::{Deserialize, Serialize};

use super::plane_grid;
use super::search::pca_plane;
use crate::geometry::{dist2, Ball, Plane, SampledSet};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaupResult {
    pub passes: bool,
    /// Smallest `d_B(E, ∪ planes)` found.
    pub achieved: f64,
    pub planes: Vec<Plane>,
}

fn union_distance(set: &SampledSet, pts: &[&[f64]], ball: &Ball, planes: &[Plane]) -> f64 {
    let e_to_u = pts
        .iter()
        .map(|x| planes.iter().map(|l| l.dist(x)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let u_to_e = planes
        .iter()
        .flat_map(|l| plane_grid(l, ball))
        .map(|y| set.distance(&y))
        .fold(0.0, f64::max);
    e_to_u.max(u_to_e) / ball.radius
}

/// Alternating assignment / refit clustering into `k` planes.
fn cluster(pts: &[&[f64]], k: usize, d: usize, n: usize, seeds: &[usize]) -> Vec<Plane> {
    let mut labels: Vec<usize> = pts
        .iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (c, &s) in seeds.iter().enumerate() {
                let v = dist2(x, pts[s]);
                if v < best.0 {
                    best = (v, c);
                }
            }
            best.1
        })
        .collect();
    let mut planes: Vec<Plane> = Vec::new();
    for _ in 0..50 {
        planes = (0..k)
            .map(|c| {
                let members: Vec<&[f64]> = pts.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(p, _)| *p).collect();
                let members = if members.is_empty() { vec![pts[seeds[c]]] } else { members };
                pca_plane(&members, d, n).0
            })
            .collect();
        let next: Vec<usize> = pts
            .iter()
            .map(|x| {
                let mut best = (f64::INFINITY, 0);
                for (c, l) in planes.iter().enumerate() {
                    let v = l.dist(x);
                    if v < best.0 {
                        best = (v, c);
                    }
                }
                best.1
            })
            .collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    planes
}

/// Tests whether `E ∩ B` is within `ε` of a union of at most `max_planes` d-planes.
pub fn baup_test(set: &SampledSet, ball: &Ball, epsilon: f64, max_planes: usize, budget: usize) -> BaupResult {
    let d = set.target_dim();
    let n = set.dim();
    let all = set.points_in_ball(ball);
    if all.is_empty() {
        return BaupResult { passes: true, achieved: 0.0, planes: Vec::new() };
    }
    let stride = (all.len() / 4000).max(1);
    let pts: Vec<&[f64]> = all.iter().step_by(stride).copied().collect();
    let mut best: Option<(f64, Vec<Plane>)> = None;
    for k in 1..=max_planes.max(1) {
        let restarts = budget.max(1).min(pts.len());
        for r in 0..restarts {
            // farthest-point seeding from a rotating first seed
            let mut seeds = vec![r * pts.len() / restarts];
            while seeds.len() < k {
                let far = (0..pts.len())
                    .max_by(|&a, &b| {
                        let da = seeds.iter().map(|&s| dist2(pts[a], pts[s])).fold(f64::INFINITY, f64::min);
                        let db = seeds.iter().map(|&s| dist2(pts[b], pts[s])).fold(f64::INFINITY, f64::min);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("nonempty");
                seeds.push(far);
            }
            let planes = cluster(&pts, k, d, n, &seeds);
            let v = union_distance(set, &all, ball, &planes);
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, planes));
            }
        }
    }
    let (achieved, planes) = best.expect("at least one configuration");
    BaupResult { passes: achieved < epsilon, achieved, planes }
}
