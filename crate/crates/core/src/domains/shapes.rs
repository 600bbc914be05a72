//! Half-plane, ball, slab, polygon, Lipschitz-graph and snowflake domains.

use std::sync::Arc;

use serde_json::json;

use super::segments::{Segment, SegmentTree};
use crate::error::{invalid, Result};
use crate::geometry::{dist, DistanceOracle, SampledSet};
use crate::harmonic::{Domain, DomainKind};

fn sampled_from_segments(segs: &[Segment], h: f64, oracle: Arc<dyn DistanceOracle>, spec: serde_json::Value) -> Result<SampledSet> {
    let mut coords = Vec::new();
    for s in segs {
        for p in s.samples(h) {
            coords.extend_from_slice(&p);
        }
    }
    if let Some(last) = segs.last() {
        coords.extend_from_slice(&last.b);
    }
    Ok(SampledSet::new(coords, 2, h, 1)?.with_oracle(oracle, Some(spec)))
}

/// Upper half-space `{x_n > 0}`; boundary samples cover `[-window, window]^{n-1}`.
#[derive(Clone, Debug)]
pub struct HalfSpace {
    pub dim: usize,
    pub window: f64,
}

impl HalfSpace {
    pub fn plane(window: f64) -> Self {
        HalfSpace { dim: 2, window }
    }
}

impl Domain for HalfSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn inside(&self, x: &[f64]) -> bool {
        x[self.dim - 1] > 0.0
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        x[self.dim - 1].abs()
    }
    fn nearest_boundary_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut p = x.to_vec();
        p[self.dim - 1] = 0.0;
        Some(p)
    }
    fn kind(&self) -> DomainKind {
        DomainKind::Unbounded
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![-self.window; self.dim];
        let mut hi = vec![self.window; self.dim];
        lo[self.dim - 1] = 0.0;
        hi[self.dim - 1] = 0.0;
        (lo, hi)
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        if self.dim != 2 {
            return Err(crate::Error::Unsupported("boundary samples of half-spaces beyond the plane".into()));
        }
        let seg = Segment::new([-self.window, 0.0], [self.window, 0.0]);
        let oracle: Arc<dyn DistanceOracle> = Arc::new(|x: &[f64]| x[1].abs());
        sampled_from_segments(&[seg], h, oracle, self.spec())
    }
    fn spec(&self) -> serde_json::Value {
        json!({"kind": "half-space", "dim": self.dim, "window": self.window})
    }
}

/// Open ball `B(center, radius)` in ℝⁿ.
#[derive(Clone, Debug)]
pub struct BallDomain {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallDomain {
    pub fn unit_disk() -> Self {
        BallDomain { center: vec![0.0, 0.0], radius: 1.0 }
    }
}

impl Domain for BallDomain {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn inside(&self, x: &[f64]) -> bool {
        dist(x, &self.center) < self.radius
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        (self.radius - dist(x, &self.center)).abs()
    }
    fn nearest_boundary_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r = dist(x, &self.center);
        (r > 0.0).then(|| self.center.iter().zip(x).map(|(c, xi)| c + (xi - c) * self.radius / r).collect())
    }
    fn kind(&self) -> DomainKind {
        DomainKind::Bounded
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        (self.center.iter().map(|c| c - self.radius).collect(), self.center.iter().map(|c| c + self.radius).collect())
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        if self.dim() != 2 {
            return Err(crate::Error::Unsupported("boundary samples of balls beyond the plane".into()));
        }
        let n = (2.0 * std::f64::consts::PI * self.radius / h).ceil().max(3.0) as usize;
        let coords = (0..n)
            .flat_map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [self.center[0] + self.radius * t.cos(), self.center[1] + self.radius * t.sin()]
            })
            .collect();
        let me = self.clone();
        let oracle: Arc<dyn DistanceOracle> = Arc::new(move |x: &[f64]| me.dist_boundary(x));
        Ok(SampledSet::new(coords, 2, h, 1)?.with_oracle(oracle, Some(self.spec())))
    }
    fn spec(&self) -> serde_json::Value {
        json!({"kind": "ball", "center": self.center, "radius": self.radius})
    }
}

/// Horizontal strip `{0 < y < width}`.
#[derive(Clone, Debug)]
pub struct Slab {
    pub width: f64,
    pub window: f64,
}

impl Domain for Slab {
    fn dim(&self) -> usize {
        2
    }
    fn inside(&self, x: &[f64]) -> bool {
        x[1] > 0.0 && x[1] < self.width
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        x[1].abs().min((self.width - x[1]).abs())
    }
    fn kind(&self) -> DomainKind {
        DomainKind::Unbounded
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-self.window, 0.0], vec![self.window, self.width])
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        let segs = [
            Segment::new([-self.window, 0.0], [self.window, 0.0]),
            Segment::new([-self.window, self.width], [self.window, self.width]),
        ];
        let me = self.clone();
        let oracle: Arc<dyn DistanceOracle> = Arc::new(move |x: &[f64]| me.dist_boundary(x));
        let mut coords = Vec::new();
        for s in &segs {
            for p in s.samples(h) {
                coords.extend_from_slice(&p);
            }
            coords.extend_from_slice(&s.b);
        }
        Ok(SampledSet::new(coords, 2, h, 1)?.with_oracle(oracle, Some(self.spec())))
    }
    fn spec(&self) -> serde_json::Value {
        json!({"kind": "slab", "width": self.width, "window": self.window})
    }
}

/// Interior of a simple polygon.
#[derive(Clone, Debug)]
pub struct PolygonDomain {
    pub vertices: Vec<[f64; 2]>,
    tree: Arc<SegmentTree>,
    label: serde_json::Value,
}

fn closed_segments(v: &[[f64; 2]]) -> Vec<Segment> {
    (0..v.len()).map(|i| Segment::new(v[i], v[(i + 1) % v.len()])).collect()
}

impl PolygonDomain {
    /// Validates simplicity (no two non-adjacent edges meet).
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(invalid("a polygon needs at least three vertices"));
        }
        let segs = closed_segments(&vertices);
        let tree = SegmentTree::new(segs.clone());
        let m = segs.len();
        for i in 0..m {
            let s = segs[i];
            let pad = s.length();
            let c = [(s.a[0] + s.b[0]) / 2.0, (s.a[1] + s.b[1]) / 2.0];
            for j in i + 1..m {
                if j == i + 1 || (i == 0 && j == m - 1) {
                    continue;
                }
                let t = segs[j];
                if t.dist2(&c) > (pad + t.length()).powi(2) {
                    continue;
                }
                if s.intersects(&t) {
                    return Err(invalid(format!("polygon edges {i} and {j} intersect")));
                }
            }
        }
        let label = json!({"kind": "polygon", "vertices": vertices});
        Ok(PolygonDomain { vertices, tree: Arc::new(tree), label })
    }

    pub(crate) fn trusted(vertices: Vec<[f64; 2]>, label: serde_json::Value) -> Self {
        let tree = SegmentTree::new(closed_segments(&vertices));
        PolygonDomain { vertices, tree: Arc::new(tree), label }
    }

    pub fn square(side: f64) -> Self {
        let a = side / 2.0;
        Self::new(vec![[-a, -a], [a, -a], [a, a], [-a, a]]).expect("square is simple")
    }

    pub fn perimeter(&self) -> f64 {
        self.tree.segments().iter().map(|s| s.length()).sum()
    }

    pub fn segments(&self) -> &[Segment] {
        self.tree.segments()
    }
}

fn point_in_polygon(v: &[[f64; 2]], p: &[f64]) -> bool {
    let mut inside = false;
    let n = v.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

impl Domain for PolygonDomain {
    fn dim(&self) -> usize {
        2
    }
    fn inside(&self, x: &[f64]) -> bool {
        point_in_polygon(&self.vertices, x) && self.tree.dist(x) > 0.0
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        self.tree.dist(x)
    }
    fn nearest_boundary_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.tree.nearest(x).map(|(_, p)| p.to_vec())
    }
    fn kind(&self) -> DomainKind {
        DomainKind::Bounded
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.tree.bbox();
        (lo.to_vec(), hi.to_vec())
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        let tree = self.tree.clone();
        let oracle: Arc<dyn DistanceOracle> = Arc::new(move |x: &[f64]| tree.dist(x));
        sampled_from_segments(&closed_segments(&self.vertices), h, oracle, self.spec())
    }
    fn spec(&self) -> serde_json::Value {
        self.label.clone()
    }
}

/// Koch snowflake iterate of a unit-side equilateral triangle.
pub fn koch_snowflake(iter: usize) -> Result<PolygonDomain> {
    if iter > 6 {
        return Err(invalid("snowflake iterates are limited to 6"));
    }
    let s3 = 3f64.sqrt();
    let mut v: Vec<[f64; 2]> = vec![[-0.5, -s3 / 6.0], [0.5, -s3 / 6.0], [0.0, s3 / 3.0]];
    let (c, s) = ((-std::f64::consts::FRAC_PI_3).cos(), (-std::f64::consts::FRAC_PI_3).sin());
    for _ in 0..iter {
        let mut next = Vec::with_capacity(4 * v.len());
        for i in 0..v.len() {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            let d = [(b[0] - a[0]) / 3.0, (b[1] - a[1]) / 3.0];
            let p1 = [a[0] + d[0], a[1] + d[1]];
            let p3 = [a[0] + 2.0 * d[0], a[1] + 2.0 * d[1]];
            let p2 = [p1[0] + c * d[0] - s * d[1], p1[1] + s * d[0] + c * d[1]];
            next.extend([a, p1, p2, p3]);
        }
        v = next;
    }
    Ok(PolygonDomain::trusted(v, json!({"kind": "snowflake", "iter": iter})))
}

/// Region above the graph of a piecewise-linear function, extended beyond
/// its end vertices by the end slopes.
#[derive(Clone, Debug)]
pub struct LipschitzGraphDomain {
    pub vertices: Vec<[f64; 2]>,
    tree: Arc<SegmentTree>,
}

impl LipschitzGraphDomain {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 2 || vertices.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(invalid("graph vertices need strictly increasing abscissae"));
        }
        let segs = vertices.windows(2).map(|w| Segment::new(w[0], w[1])).collect();
        Ok(LipschitzGraphDomain { vertices, tree: Arc::new(SegmentTree::new(segs)) })
    }

    /// Graph of `f` on `[a, b]` with `pieces` linear pieces.
    pub fn from_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> Result<Self> {
        let v = (0..=pieces)
            .map(|i| {
                let x = a + (b - a) * i as f64 / pieces as f64;
                [x, f(x)]
            })
            .collect();
        Self::new(v)
    }

    fn end_rays(&self) -> [([f64; 2], [f64; 2]); 2] {
        let v = &self.vertices;
        let n = v.len();
        let unit = |p: [f64; 2], q: [f64; 2]| {
            let l = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            [(q[0] - p[0]) / l, (q[1] - p[1]) / l]
        };
        [(v[0], unit(v[1], v[0])), (v[n - 1], unit(v[n - 2], v[n - 1]))]
    }

    pub fn height(&self, x: f64) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let (i, j) = if x <= v[0][0] {
            (0, 1)
        } else if x >= v[n - 1][0] {
            (n - 2, n - 1)
        } else {
            let k = v.partition_point(|p| p[0] <= x).max(1);
            (k - 1, k)
        };
        let t = (x - v[i][0]) / (v[j][0] - v[i][0]);
        v[i][1] + t * (v[j][1] - v[i][1])
    }
}

impl Domain for LipschitzGraphDomain {
    fn dim(&self) -> usize {
        2
    }
    fn inside(&self, x: &[f64]) -> bool {
        x[1] > self.height(x[0])
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        let mut best = self.tree.dist(x);
        for (o, u) in self.end_rays() {
            let t = ((x[0] - o[0]) * u[0] + (x[1] - o[1]) * u[1]).max(0.0);
            let c = [o[0] + t * u[0], o[1] + t * u[1]];
            best = best.min(((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt());
        }
        best
    }
    fn kind(&self) -> DomainKind {
        DomainKind::Unbounded
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.tree.bbox();
        (lo.to_vec(), hi.to_vec())
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        let me = self.clone();
        let oracle: Arc<dyn DistanceOracle> = Arc::new(move |x: &[f64]| me.dist_boundary(x));
        let segs: Vec<Segment> = self.vertices.windows(2).map(|w| Segment::new(w[0], w[1])).collect();
        sampled_from_segments(&segs, h, oracle, self.spec())
    }
    fn spec(&self) -> serde_json::Value {
        json!({"kind": "graph", "vertices": self.vertices})
    }
}
