//! Dyadic-cover estimates of the Hausdorff content ℋ^d_∞.

use std::collections::HashMap;

use super::point::{dist2, Ball};
use super::sampled::SampledSet;

/// Default number of dyadic levels below the bounding cube of the ball.
pub const DEFAULT_DEPTH: usize = 8;

/// Diameter of a finite point set.
pub fn diameter(points: &[&[f64]]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    if points.len() > 48 && points[0].len() == 2 {
        return planar_diameter(points);
    }
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dist2(a, b));
        }
    }
    best.sqrt()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, counter-clockwise, no repeated endpoint.
pub fn convex_hull(points: &[&[f64]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.iter().map(|q| [q[0], q[1]]).collect();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    hull
}

fn planar_diameter(points: &[&[f64]]) -> f64 {
    let h = convex_hull(points);
    let m = h.len();
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    if m < 3 {
        return if m == 2 { d2(h[0], h[1]).sqrt() } else { 0.0 };
    }
    if m <= 64 {
        let mut best = 0.0f64;
        for i in 0..m {
            for j in i + 1..m {
                best = best.max(d2(h[i], h[j]));
            }
        }
        return best.sqrt();
    }
    // rotating calipers
    let mut best = 0.0f64;
    let mut j = 1;
    for i in 0..m {
        let ni = (i + 1) % m;
        while cross(h[i], h[ni], h[(j + 1) % m]).abs() > cross(h[i], h[ni], h[j]).abs() {
            j = (j + 1) % m;
        }
        best = best.max(d2(h[i], h[j])).max(d2(h[ni], h[j]));
    }
    best.sqrt()
}

/// Dyadic-cover content of an explicit point list inside `ball`.
///
/// Every dyadic cell of the bounding cube of `ball` is either covered whole,
/// by a set of diameter `diam(points in cell) + pad`, or split into its
/// children; the cheapest choice wins. `pad` is `h` for cells with at least
/// two samples and zero for singletons, so isolated samples carry no mass.
/// Cells never shrink below side `2h`.
pub fn content_of_points(points: &[&[f64]], ball: &Ball, d: usize, depth: usize, h: f64) -> f64 {
    let inside: Vec<&[f64]> = points.iter().copied().filter(|p| ball.contains(p)).collect();
    if inside.len() < 2 {
        return 0.0;
    }
    let n = ball.center.dim();
    let side = 2.0 * ball.radius;
    let max_depth = if h > 0.0 {
        let levels = (side / (2.0 * h)).log2().floor();
        depth.min(levels.max(0.0) as usize)
    } else {
        depth
    };
    let lo: Vec<f64> = ball.center.iter().map(|c| c - ball.radius).collect();
    let mut idx: Vec<usize> = (0..inside.len()).collect();
    let mut ctx = CoverCtx { pts: &inside, d: d as i32, h, n, max_depth, codes: vec![0; inside.len()] };
    let dp = ctx.cost(&mut idx, &lo, side, 0);
    dp.min(ball.diam().powi(d as i32))
}

struct CoverCtx<'a> {
    pts: &'a [&'a [f64]],
    d: i32,
    h: f64,
    n: usize,
    max_depth: usize,
    codes: Vec<usize>,
}

impl CoverCtx<'_> {
    fn whole(&self, idx: &[usize]) -> f64 {
        if idx.len() < 2 {
            return 0.0;
        }
        let cell: Vec<&[f64]> = idx.iter().map(|&i| self.pts[i]).collect();
        (diameter(&cell) + self.h).powi(self.d)
    }

    fn cost(&mut self, idx: &mut [usize], lo: &[f64], side: f64, level: usize) -> f64 {
        if idx.len() < 2 {
            return 0.0;
        }
        let whole = self.whole(idx);
        if level >= self.max_depth {
            return whole;
        }
        let half = side / 2.0;
        for &i in idx.iter() {
            let p = self.pts[i];
            let mut code = 0;
            for a in 0..self.n {
                if p[a] >= lo[a] + half {
                    code |= 1 << a;
                }
            }
            self.codes[i] = code;
        }
        idx.sort_by_key(|&i| (self.codes[i], i));
        let mut total = 0.0;
        let mut start = 0;
        while start < idx.len() {
            let code = self.codes[idx[start]];
            let mut end = start;
            while end < idx.len() && self.codes[idx[end]] == code {
                end += 1;
            }
            let child_lo: Vec<f64> = (0..self.n)
                .map(|a| if code >> a & 1 == 1 { lo[a] + half } else { lo[a] })
                .collect();
            total += self.cost(&mut idx[start..end], &child_lo, half, level + 1);
            if total >= whole {
                return whole;
            }
            start = end;
        }
        total.min(whole)
    }
}

/// Dyadic-cover content maintained under point insertion.
///
/// Produces the same value as [`content_of_points`] on the inserted points,
/// at a cost per insertion proportional to the sizes of the cells on the
/// new point's path.
pub struct IncrementalCover<'a> {
    ball: &'a Ball,
    d: i32,
    h: f64,
    max_depth: usize,
    cells: HashMap<(usize, u64), Cell>,
    count: usize,
}

#[derive(Default)]
struct Cell {
    pts: Vec<Vec<f64>>,
    diam: f64,
    child_sum: f64,
    cost: f64,
}

impl<'a> IncrementalCover<'a> {
    pub fn new(ball: &'a Ball, d: usize, depth: usize, h: f64) -> Self {
        let side = 2.0 * ball.radius;
        let levels = (side / (2.0 * h)).log2().floor().max(0.0) as usize;
        IncrementalCover {
            ball,
            d: d as i32,
            h,
            max_depth: depth.min(levels),
            cells: HashMap::new(),
            count: 0,
        }
    }

    /// Inserts a point; points outside the ball are ignored.
    pub fn insert(&mut self, p: &[f64]) {
        if !self.ball.contains(p) {
            return;
        }
        self.count += 1;
        let n = p.len();
        let mut lo: Vec<f64> = self.ball.center.iter().map(|c| c - self.ball.radius).collect();
        let mut side = 2.0 * self.ball.radius;
        let mut path = Vec::with_capacity(self.max_depth + 1);
        let mut key = 0u64;
        path.push((0, key));
        for level in 1..=self.max_depth {
            let half = side / 2.0;
            let mut code = 0u64;
            for a in 0..n {
                if p[a] >= lo[a] + half {
                    code |= 1 << a;
                    lo[a] += half;
                }
            }
            key = key * ((1u64 << n) + 1) + code + 1;
            path.push((level, key));
            side = half;
        }
        let mut delta_below = 0.0;
        for &(level, key) in path.iter().rev() {
            let cell = self.cells.entry((level, key)).or_default();
            for q in &cell.pts {
                cell.diam = cell.diam.max(dist2(q, p).sqrt());
            }
            cell.pts.push(p.to_vec());
            cell.child_sum += delta_below;
            let whole = if cell.pts.len() >= 2 { (cell.diam + self.h).powi(self.d) } else { 0.0 };
            let cost = if level == self.max_depth { whole } else { whole.min(cell.child_sum) };
            delta_below = cost - cell.cost;
            cell.cost = cost;
        }
    }

    pub fn value(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let root = self.cells.get(&(0, 0)).map_or(0.0, |c| c.cost);
        root.min(self.ball.diam().powi(self.d))
    }
}

/// Estimate of ℋ^d_∞(E ∩ B) from the samples of `set`.
pub fn hausdorff_content(set: &SampledSet, ball: &Ball, d: usize, depth: usize) -> f64 {
    let pts = set.points_in_ball(ball);
    content_of_points(&pts, ball, d, depth, set.resolution())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point::Point;
    use proptest::prelude::*;

    fn segment(h: f64) -> SampledSet {
        let n = (1.0 / h).round() as usize;
        let coords = (0..=n).flat_map(|i| [i as f64 * h, 0.0]).collect();
        SampledSet::new(coords, 2, h, 1).unwrap()
    }

    #[test]
    fn unit_segment_has_unit_content() {
        let s = segment(1e-3);
        let b = Ball::new(Point::xy(0.5, 0.0), 1.0).unwrap();
        let c = hausdorff_content(&s, &b, 1, DEFAULT_DEPTH);
        assert!((c - 1.0).abs() < 0.05, "{c}");
    }

    #[test]
    fn empty_and_singleton_are_zero() {
        let s = segment(1e-2);
        let far = Ball::new(Point::xy(10.0, 10.0), 1.0).unwrap();
        assert_eq!(hausdorff_content(&s, &far, 1, 8), 0.0);
        let one = SampledSet::new(vec![0.3, 0.3], 2, 0.01, 1).unwrap();
        let b = Ball::new(Point::xy(0.0, 0.0), 1.0).unwrap();
        assert_eq!(hausdorff_content(&one, &b, 1, 8), 0.0);
    }

    #[test]
    fn planar_diameter_matches_brute_force() {
        let pts: Vec<[f64; 2]> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.7;
                [t.cos() * (1.0 + 0.3 * (3.0 * t).sin()), t.sin()]
            })
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let mut brute = 0.0f64;
        for a in &refs {
            for b in &refs {
                brute = brute.max(dist2(a, b));
            }
        }
        assert!((diameter(&refs) - brute.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn incremental_matches_batch() {
        let pts: Vec<[f64; 2]> = (0..120).map(|i| {
            let t = i as f64 * 0.37;
            [0.8 * t.sin(), 0.5 * (1.3 * t).cos()]
        }).collect();
        let b = Ball::new(Point::xy(0.05, 0.0), 1.0).unwrap();
        let mut inc = IncrementalCover::new(&b, 1, 7, 0.02);
        for k in 0..pts.len() {
            inc.insert(&pts[k]);
            let refs: Vec<&[f64]> = pts[..=k].iter().map(|p| &p[..]).collect();
            let batch = content_of_points(&refs, &b, 1, 7, 0.02);
            assert!((inc.value() - batch).abs() <= 1e-12 * batch.max(1.0), "{k}: {} vs {batch}", inc.value());
        }
    }

    fn cloud() -> impl Strategy<Value = Vec<[f64; 2]>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| [x, y]), 2..60)
    }

    proptest! {
        #[test]
        fn content_is_monotone_and_bounded(pts in cloud(), keep in proptest::collection::vec(any::<bool>(), 60)) {
            let b = Ball::new(Point::xy(0.0, 0.0), 1.2).unwrap();
            let all: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
            let sub: Vec<&[f64]> = all.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
            let c_all = content_of_points(&all, &b, 1, 6, 0.01);
            let c_sub = content_of_points(&sub, &b, 1, 6, 0.01);
            prop_assert!(c_sub <= c_all + 1e-15);
            prop_assert!(c_all <= b.diam() + 1e-15);
        }

        #[test]
        fn content_scales_exactly(pts in cloud(), e in -3i32..4) {
            let lambda = 2f64.powi(e);
            let b = Ball::new(Point::xy(0.1, -0.2), 1.3).unwrap();
            let all: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
            let scaled: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] * lambda, p[1] * lambda]).collect();
            let sref: Vec<&[f64]> = scaled.iter().map(|p| &p[..]).collect();
            let bs = Ball::new(Point::xy(0.1 * lambda, -0.2 * lambda), 1.3 * lambda).unwrap();
            let c = content_of_points(&all, &b, 1, 6, 0.01);
            let cs = content_of_points(&sref, &bs, 1, 6, 0.01 * lambda);
            prop_assert_eq!(cs, c * lambda);
        }
    }
}
