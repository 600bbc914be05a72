use serde::{Deserialize, Serialize};

use super::content::{content_of_points, IncrementalCover};
use super::point::{Ball, Plane};
use super::sampled::SampledSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedDistance {
    pub value: f64,
    /// True when one of the sets misses the ball and its sup was taken as 0.
    pub empty_side: bool,
}

/// Largest distance from a sample of `from` inside `ball` to the set `to`.
fn one_sided(from: &SampledSet, to: &SampledSet, ball: &Ball) -> Option<f64> {
    let idx = from.indices_in_ball(ball);
    if idx.is_empty() {
        return None;
    }
    Some(idx.iter().map(|&i| to.distance(from.point(i))).fold(0.0, f64::max))
}

/// Two-sided normalized distance `d_B(E, F)`.
pub fn normalized_distance(e: &SampledSet, f: &SampledSet, ball: &Ball) -> NormalizedDistance {
    let a = one_sided(e, f, ball);
    let b = one_sided(f, e, ball);
    let sup = a.unwrap_or(0.0).max(b.unwrap_or(0.0));
    NormalizedDistance {
        value: 2.0 / ball.diam() * sup,
        empty_side: a.is_none() || b.is_none(),
    }
}

/// Step profile `t ↦ ℋ^d_∞({x ∈ B∩E : dist(x,L) > t·r_B})`.
///
/// The profile is right-continuous and non-increasing; on `[t[i], t[i+1])`
/// it equals `content[i]` (an upper bound when thresholds were thinned).
/// `t[0] = 0` and the profile vanishes from `t.last()` onward.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub max_dist: f64,
    pub t: Vec<f64>,
    pub content: Vec<f64>,
}

impl DistanceProfile {
    pub fn at(&self, t: f64) -> f64 {
        match self.t.partition_point(|&s| s <= t) {
            0 => self.content.first().copied().unwrap_or(0.0),
            k if k >= self.content.len() + 1 => 0.0,
            k => self.content[k - 1],
        }
    }
}

/// Upper limit on content evaluations per profile.
pub const MAX_PROFILE_STEPS: usize = 256;

/// Distance statistics of the samples in `ball` relative to the plane.
pub fn plane_distance_stats(set: &SampledSet, ball: &Ball, plane: &Plane, depth: usize) -> DistanceProfile {
    let pts = set.points_in_ball(ball);
    profile_of_points(&pts, ball, plane, depth, set.resolution())
}

pub fn profile_of_points(pts: &[&[f64]], ball: &Ball, plane: &Plane, depth: usize, h: f64) -> DistanceProfile {
    let d = plane.dim();
    let r = ball.radius;
    let mut scored: Vec<(f64, &[f64])> = pts.iter().map(|p| (plane.dist(p) / r, *p)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let max_dist = scored.first().map_or(0.0, |s| s.0 * r);
    let positive = scored.partition_point(|s| s.0 > 0.0);
    let scored = &scored[..positive];
    if scored.len() <= INCREMENTAL_LIMIT {
        return incremental_profile(scored, ball, d, depth, h, max_dist);
    }
    let mut levels: Vec<f64> = scored.iter().map(|s| s.0).collect();
    levels.dedup();
    levels.reverse();
    if levels.len() > MAX_PROFILE_STEPS {
        let m = levels.len();
        levels = (0..MAX_PROFILE_STEPS)
            .map(|i| levels[i * (m - 1) / (MAX_PROFILE_STEPS - 1)])
            .collect();
    }
    let mut t = vec![0.0];
    t.extend(levels.iter().copied());
    let content = t[..t.len() - 1]
        .iter()
        .map(|&s| {
            let above: Vec<&[f64]> = scored.iter().take_while(|q| q.0 > s).map(|q| q.1).collect();
            content_of_points(&above, ball, d, depth, h)
        })
        .collect();
    DistanceProfile { max_dist, t, content }
}

/// Largest cloud for which every distance level is evaluated exactly.
pub const INCREMENTAL_LIMIT: usize = 6000;

fn incremental_profile(scored: &[(f64, &[f64])], ball: &Ball, d: usize, depth: usize, h: f64, max_dist: f64) -> DistanceProfile {
    let mut cover = IncrementalCover::new(ball, d, depth, h);
    // (threshold, content of points strictly above it), in decreasing threshold order
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < scored.len() {
        let u = scored[i].0;
        steps.push((u, cover.value()));
        while i < scored.len() && scored[i].0 == u {
            cover.insert(scored[i].1);
            i += 1;
        }
    }
    let mut t = vec![0.0];
    let mut content = vec![cover.value()];
    for &(u, c) in steps.iter().rev() {
        t.push(u);
        content.push(c);
    }
    content.pop();
    DistanceProfile { max_dist, t, content }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point::Point;

    fn line_cloud(y: f64, vertical: bool) -> SampledSet {
        let coords = (-300..=300)
            .flat_map(|i| {
                let s = i as f64 * 0.01;
                if vertical { [y, s] } else { [s, y] }
            })
            .collect();
        SampledSet::new(coords, 2, 0.01, 1).unwrap()
    }

    #[test]
    fn identical_sets_are_at_distance_zero() {
        let e = line_cloud(0.0, false);
        let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
        assert_eq!(normalized_distance(&e, &e, &b).value, 0.0);
    }

    #[test]
    fn parallel_and_crossing_lines() {
        let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
        let x_axis = line_cloud(0.0, false);
        let shifted = line_cloud(0.1, false);
        let r = normalized_distance(&x_axis, &shifted, &b);
        assert!((r.value - 0.1).abs() < 1e-9 && !r.empty_side);
        let y_axis = line_cloud(0.0, true);
        assert!((normalized_distance(&x_axis, &y_axis, &b).value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_side_is_flagged() {
        let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
        let far = SampledSet::new(vec![5.0, 5.0, 5.01, 5.0], 2, 0.01, 1).unwrap();
        let r = normalized_distance(&line_cloud(0.0, false), &far, &b);
        assert!(r.empty_side);
        assert!(r.value > 0.0);
    }

    #[test]
    fn profiles_of_flat_and_point_sets_vanish() {
        let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
        let l = Plane::line(Point::xy(0.0, 0.0), 0.0);
        let p = plane_distance_stats(&line_cloud(0.0, false), &b, &l, 8);
        assert_eq!(p.max_dist, 0.0);
        assert!(p.content.iter().all(|&c| c == 0.0));
        let one = SampledSet::new(vec![0.0, 0.3], 2, 0.01, 1).unwrap();
        let q = plane_distance_stats(&one, &b, &l, 8);
        assert!((q.max_dist - 0.3).abs() < 1e-15);
        assert!(q.content.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn two_parallel_segments_profile_is_a_step() {
        let h = 1e-3;
        let coords: Vec<f64> = (0..=1000)
            .flat_map(|i| {
                let x = -0.5 + i as f64 * h;
                [x, 0.2, x, -0.2]
            })
            .collect();
        let s = SampledSet::new(coords, 2, h, 1).unwrap();
        let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
        let p = plane_distance_stats(&s, &b, &Plane::line(Point::xy(0.0, 0.0), 0.0), 8);
        let joint = (1.0f64 + 0.16).sqrt();
        assert!((p.at(0.1) - joint).abs() < 0.01, "{}", p.at(0.1));
        assert_eq!(p.at(0.25), 0.0);
    }
}
