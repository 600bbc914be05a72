//! Static k-d tree over a flat coordinate buffer.
//!
//! Built once, read-only afterwards. Answers exact nearest-point and
//! fixed-radius queries; ties in nearest-point queries resolve to the
//! smaller point index so results never depend on traversal order.

const LEAF: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// `coords` holds `coords.len() / dim` points, row-major.
    pub fn new(coords: &[f64], dim: usize) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0);
        let n = coords.len() / dim;
        let mut tree = KdTree {
            dim,
            coords: coords.to_vec(),
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // widest axis
        let mut axis = 0;
        let mut widest = -1.0;
        for a in 0..self.dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.coords[i * self.dim + a];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        let mid = (start + end) / 2;
        let dim = self.dim;
        let coords = &self.coords;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a * dim + axis]
                .total_cmp(&coords[b * dim + axis])
                .then(a.cmp(&b))
        });
        let value = self.coords[self.order[mid] * dim + axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Nearest point: `(index, distance)`, or `None` for an empty tree.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, x, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn nearest_rec(&self, node: usize, x: &[f64], best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = super::point::dist2(self.point(i), x);
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = x[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, x, best);
                if diff * diff <= best.1 {
                    self.nearest_rec(far, x, best);
                }
            }
        }
    }

    /// Calls `f(index, dist²)` for every point with `|p - x| <= r`.
    pub fn for_each_within(&self, x: &[f64], r: f64, mut f: impl FnMut(usize, f64)) {
        if self.is_empty() {
            return;
        }
        self.within_rec(0, x, r * r, &mut f);
    }

    fn within_rec(&self, node: usize, x: &[f64], r2: f64, f: &mut impl FnMut(usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = super::point::dist2(self.point(i), x);
                    if d2 <= r2 {
                        f(i, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = x[axis] - value;
                if diff <= 0.0 || diff * diff <= r2 {
                    self.within_rec(left, x, r2, f);
                }
                if diff >= 0.0 || diff * diff <= r2 {
                    self.within_rec(right, x, r2, f);
                }
            }
        }
    }

    /// Indices within radius `r`, sorted ascending.
    pub fn within(&self, x: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(x, r, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn count_within(&self, x: &[f64], r: f64) -> usize {
        let mut n = 0;
        self.for_each_within(x, r, |_, _| n += 1);
        n
    }
}
