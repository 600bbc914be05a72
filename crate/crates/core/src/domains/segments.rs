//! Planar segment soups with a bounding-volume hierarchy for exact distance queries.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        ((self.b[0] - self.a[0]).powi(2) + (self.b[1] - self.a[1]).powi(2)).sqrt()
    }

    pub fn closest(&self, p: &[f64]) -> [f64; 2] {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 > 0.0 {
            (((p[0] - self.a[0]) * d[0] + (p[1] - self.a[1]) * d[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        [self.a[0] + t * d[0], self.a[1] + t * d[1]]
    }

    pub fn dist2(&self, p: &[f64]) -> f64 {
        let c = self.closest(p);
        (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)
    }

    /// Proper or touching intersection test between two segments.
    pub fn intersects(&self, other: &Segment) -> bool {
        fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
            (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        }
        fn on_seg(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
            q[0] >= p[0].min(r[0]) && q[0] <= p[0].max(r[0]) && q[1] >= p[1].min(r[1]) && q[1] <= p[1].max(r[1])
        }
        let (p1, q1, p2, q2) = (self.a, self.b, other.a, other.b);
        let o1 = orient(p1, q1, p2);
        let o2 = orient(p1, q1, q2);
        let o3 = orient(p2, q2, p1);
        let o4 = orient(p2, q2, q1);
        if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
            return true;
        }
        (o1 == 0.0 && on_seg(p1, p2, q1))
            || (o2 == 0.0 && on_seg(p1, q2, q1))
            || (o3 == 0.0 && on_seg(p2, p1, q2))
            || (o4 == 0.0 && on_seg(p2, q1, q2))
    }

    /// Points along the segment with spacing at most `h`, excluding the end point.
    pub fn samples(&self, h: f64) -> Vec<[f64; 2]> {
        let k = (self.length() / h).ceil().max(1.0) as usize;
        (0..k)
            .map(|i| {
                let t = i as f64 / k as f64;
                [self.a[0] + t * (self.b[0] - self.a[0]), self.a[1] + t * (self.b[1] - self.a[1])]
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Node {
    lo: [f64; 2],
    hi: [f64; 2],
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

fn box_dist2(lo: &[f64; 2], hi: &[f64; 2], p: &[f64]) -> f64 {
    let dx = (lo[0] - p[0]).max(0.0).max(p[0] - hi[0]);
    let dy = (lo[1] - p[1]).max(0.0).max(p[1] - hi[1]);
    dx * dx + dy * dy
}

/// Bounding-volume hierarchy over segments.
#[derive(Clone, Debug)]
pub struct SegmentTree {
    segs: Vec<Segment>,
    nodes: Vec<Node>,
}

impl SegmentTree {
    pub fn new(mut segs: Vec<Segment>) -> Self {
        let mut nodes = Vec::new();
        if !segs.is_empty() {
            let n = segs.len();
            Self::build(&mut segs, &mut nodes, 0, n);
        }
        SegmentTree { segs, nodes }
    }

    fn build(segs: &mut [Segment], nodes: &mut Vec<Node>, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in &segs[start..end] {
            for p in [s.a, s.b] {
                for a in 0..2 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
        }
        let id = nodes.len();
        nodes.push(Node { lo, hi, start, end, children: None });
        if end - start > 4 {
            let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
            segs[start..end].sort_by(|x, y| (x.a[axis] + x.b[axis]).total_cmp(&(y.a[axis] + y.b[axis])));
            let mid = (start + end) / 2;
            let l = Self::build(segs, nodes, start, mid);
            let r = Self::build(segs, nodes, mid, end);
            nodes[id].children = Some((l, r));
        }
        id
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn dist(&self, p: &[f64]) -> f64 {
        self.nearest(p).map_or(f64::INFINITY, |(d2, _)| d2.sqrt())
    }

    /// Squared distance and closest point.
    pub fn nearest(&self, p: &[f64]) -> Option<(f64, [f64; 2])> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if box_dist2(&node.lo, &node.hi, p) >= best.0 {
                continue;
            }
            match node.children {
                None => {
                    for s in &self.segs[node.start..node.end] {
                        let c = s.closest(p);
                        let d2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                        if d2 < best.0 {
                            best = (d2, c);
                        }
                    }
                }
                Some((l, r)) => {
                    let dl = box_dist2(&self.nodes[l].lo, &self.nodes[l].hi, p);
                    let dr = box_dist2(&self.nodes[r].lo, &self.nodes[r].hi, p);
                    if dl < dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        Some(best)
    }

    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        (self.nodes[0].lo, self.nodes[0].hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn tree_distance_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let segs: Vec<Segment> = (0..300)
            .map(|_| {
                let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                Segment::new(a, [a[0] + rng.random_range(-0.1..0.1), a[1] + rng.random_range(-0.1..0.1)])
            })
            .collect();
        let tree = SegmentTree::new(segs.clone());
        for _ in 0..500 {
            let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let brute = segs.iter().map(|s| s.dist2(&p)).fold(f64::INFINITY, f64::min).sqrt();
            assert!((tree.dist(&p) - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn crossing_segments_intersect() {
        let s = Segment::new([0.0, 0.0], [1.0, 1.0]);
        assert!(s.intersects(&Segment::new([0.0, 1.0], [1.0, 0.0])));
        assert!(!s.intersects(&Segment::new([0.0, 1.0], [0.4, 0.9])));
    }
}
