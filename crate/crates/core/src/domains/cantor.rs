//! Four-corner Cantor iterates `K_j` and their complements.

use std::sync::Arc;

use serde_json::json;

use crate::error::{invalid, Result};
use crate::geometry::{DistanceOracle, SampledSet};
use crate::harmonic::{Domain, DomainKind};

/// Deepest supported generation.
pub const MAX_GENERATION: usize = 8;

/// Axis-aligned square `center ± side/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Square {
    pub center: [f64; 2],
    pub side: f64,
}

impl Square {
    /// Distance from `p` to the closed square (0 inside).
    pub fn dist(&self, p: &[f64]) -> f64 {
        let a = self.side / 2.0;
        let dx = ((p[0] - self.center[0]).abs() - a).max(0.0);
        let dy = ((p[1] - self.center[1]).abs() - a).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }

    /// Distance from an interior point to the square's edges.
    pub fn depth(&self, p: &[f64]) -> f64 {
        let a = self.side / 2.0;
        (a - (p[0] - self.center[0]).abs()).min(a - (p[1] - self.center[1]).abs())
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let a = self.side / 2.0;
        (p[0] - self.center[0]).abs() <= a && (p[1] - self.center[1]).abs() <= a
    }

    /// Perimeter samples with spacing at most `h`, starting at the lower-left corner.
    pub fn perimeter_samples(&self, h: f64) -> Vec<[f64; 2]> {
        let a = self.side / 2.0;
        let (cx, cy) = (self.center[0], self.center[1]);
        let corners = [[cx - a, cy - a], [cx + a, cy - a], [cx + a, cy + a], [cx - a, cy + a]];
        let k = (self.side / h).ceil().max(1.0) as usize;
        let mut out = Vec::with_capacity(4 * k);
        for e in 0..4 {
            let (p, q) = (corners[e], corners[(e + 1) % 4]);
            for i in 0..k {
                let t = i as f64 / k as f64;
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        out
    }
}

/// One generation of the construction: squares in word order, with the
/// rotation `i^r` of the composed similarity carried along.
#[derive(Clone, Debug)]
struct Generation {
    squares: Vec<Square>,
    rotation: Vec<u8>,
}

/// The squares of `K_0, …, K_j`. The square with word `α = α₁…α_m` is
/// `f_{α₁}∘…∘f_{α_m}(K_0)` with `f_k(z) = (z/4 + (1+i)/4)·i^k`; its index in
/// generation `m` is the base-4 number `α₁…α_m`.
#[derive(Clone, Debug)]
pub struct CantorSpec {
    pub level: usize,
    gens: Vec<Generation>,
}

fn rot(v: [f64; 2], r: u8) -> [f64; 2] {
    match r % 4 {
        0 => v,
        1 => [-v[1], v[0]],
        2 => [-v[0], -v[1]],
        _ => [v[1], -v[0]],
    }
}

impl CantorSpec {
    pub fn new(level: usize) -> Result<Self> {
        if level > MAX_GENERATION {
            return Err(invalid(format!("Cantor generation {level} exceeds {MAX_GENERATION}")));
        }
        let mut gens = vec![Generation { squares: vec![Square { center: [0.0, 0.0], side: 1.0 }], rotation: vec![0] }];
        for m in 1..=level {
            let prev = &gens[m - 1];
            let mut squares = Vec::with_capacity(4 * prev.squares.len());
            let mut rotation = Vec::with_capacity(4 * prev.squares.len());
            for (sq, &r) in prev.squares.iter().zip(&prev.rotation) {
                for k in 0..4u8 {
                    // f_α(f_k(0)) = b_α + a_α·(1+i)i^k/4, with |a_α| = side
                    let off = rot(rot([0.25, 0.25], k), r);
                    squares.push(Square {
                        center: [sq.center[0] + sq.side * off[0], sq.center[1] + sq.side * off[1]],
                        side: sq.side / 4.0,
                    });
                    rotation.push((r + k) % 4);
                }
            }
            gens.push(Generation { squares, rotation });
        }
        Ok(CantorSpec { level, gens })
    }

    pub fn squares(&self, generation: usize) -> &[Square] {
        &self.gens[generation].squares
    }

    pub fn leaves(&self) -> &[Square] {
        self.squares(self.level)
    }

    /// Base-4 word of a generation-`m` square index.
    pub fn word(m: usize, mut index: usize) -> String {
        let mut w = vec![b'0'; m];
        for c in w.iter_mut().rev() {
            *c = b'0' + (index % 4) as u8;
            index /= 4;
        }
        String::from_utf8(w).expect("ascii digits")
    }

    /// Index of the generation-`m` square containing (or nearest to) `p`.
    pub fn square_of(&self, m: usize, p: &[f64]) -> usize {
        let mut idx = 0;
        for g in 1..=m {
            let sq = &self.gens[g].squares;
            idx = (0..4)
                .map(|k| 4 * idx + k)
                .min_by(|&a, &b| sq[a].dist(p).total_cmp(&sq[b].dist(p)).then(a.cmp(&b)))
                .expect("four children");
        }
        idx
    }

    /// Distance to `K_j` (0 inside) and, for points inside, the leaf containing them.
    fn union_distance(&self, p: &[f64]) -> (f64, Option<usize>) {
        let mut best = f64::INFINITY;
        let mut leaf = None;
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        while let Some((g, i)) = stack.pop() {
            if leaf.is_some() {
                break;
            }
            let d = self.gens[g].squares[i].dist(p);
            if d >= best {
                continue;
            }
            if g == self.level {
                best = d;
                if d == 0.0 {
                    leaf = Some(i);
                }
                continue;
            }
            let mut kids: Vec<(f64, usize)> =
                (0..4).map(|k| (self.gens[g + 1].squares[4 * i + k].dist(p), 4 * i + k)).collect();
            kids.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (_, c) in kids {
                stack.push((g + 1, c));
            }
        }
        (best, leaf)
    }

    /// Distance to `∂K_j`, the boundary of the complement.
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        match self.union_distance(p) {
            (_, Some(leaf)) => self.gens[self.level].squares[leaf].depth(p),
            (d, None) => d,
        }
    }

    /// Total boundary length `4^j · 4 · 4^{-j} = 4`.
    pub fn perimeter(&self) -> f64 {
        self.leaves().iter().map(|s| 4.0 * s.side).sum()
    }
}

/// Complement of `K_j`, a domain containing the point at infinity.
#[derive(Clone, Debug)]
pub struct CantorComplement {
    pub spec: Arc<CantorSpec>,
}

impl Domain for CantorComplement {
    fn dim(&self) -> usize {
        2
    }
    fn inside(&self, x: &[f64]) -> bool {
        self.spec.union_distance(x).0 > 0.0
    }
    fn dist_boundary(&self, x: &[f64]) -> f64 {
        self.spec.boundary_distance(x)
    }
    fn kind(&self) -> DomainKind {
        DomainKind::ExteriorOfCompact { center: vec![0.0, 0.0], radius: std::f64::consts::FRAC_1_SQRT_2 }
    }
    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in self.spec.leaves() {
            for a in 0..2 {
                lo[a] = lo[a].min(s.center[a] - s.side / 2.0);
                hi[a] = hi[a].max(s.center[a] + s.side / 2.0);
            }
        }
        (lo.to_vec(), hi.to_vec())
    }
    fn boundary_samples(&self, h: f64) -> Result<SampledSet> {
        let coords: Vec<f64> = self.spec.leaves().iter().flat_map(|s| s.perimeter_samples(h)).flatten().collect();
        let spec = self.spec.clone();
        let oracle: Arc<dyn DistanceOracle> = Arc::new(move |x: &[f64]| spec.boundary_distance(x));
        Ok(SampledSet::new(coords, 2, h, 1)?.with_oracle(oracle, Some(self.spec())))
    }
    fn spec(&self) -> serde_json::Value {
        json!({"kind": "cantor", "j": self.spec.level})
    }
}

/// Boundary samples of `∂(K_j^c)` and the complement domain.
pub fn four_corner_cantor(j: usize, h: f64) -> Result<(SampledSet, CantorComplement)> {
    let dom = CantorComplement { spec: Arc::new(CantorSpec::new(j)?) };
    Ok((dom.boundary_samples(h)?, dom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_zero_is_the_centered_unit_square() {
        let s = CantorSpec::new(0).unwrap();
        assert_eq!(s.leaves(), &[Square { center: [0.0, 0.0], side: 1.0 }]);
    }

    #[test]
    fn counts_and_sides() {
        let s = CantorSpec::new(3).unwrap();
        assert_eq!(s.leaves().len(), 64);
        assert!(s.leaves().iter().all(|q| q.side == 1.0 / 64.0));
        for (i, a) in s.leaves().iter().enumerate() {
            for b in &s.leaves()[i + 1..] {
                let gap = (a.center[0] - b.center[0]).abs().max((a.center[1] - b.center[1]).abs());
                assert!(gap > a.side);
            }
        }
        assert!((s.perimeter() - 4.0).abs() < 1e-12);
        assert!(CantorSpec::new(9).is_err());
    }

    #[test]
    fn first_maps_follow_the_rotations() {
        let s = CantorSpec::new(1).unwrap();
        let c: Vec<[f64; 2]> = s.leaves().iter().map(|q| q.center).collect();
        assert_eq!(c, vec![[0.25, 0.25], [-0.25, 0.25], [-0.25, -0.25], [0.25, -0.25]]);
        // f_1∘f_0(0) = i·(0.25(1+i)/4 + (1+i)/4)
        let t = CantorSpec::new(2).unwrap();
        let q = t.squares(2)[4];
        assert!((q.center[0] + 0.3125).abs() < 1e-15 && (q.center[1] - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn origin_distance_matches_brute_force() {
        let s = CantorSpec::new(1).unwrap();
        let brute = s.leaves().iter().map(|q| q.dist(&[0.0, 0.0])).fold(f64::INFINITY, f64::min);
        assert_eq!(s.boundary_distance(&[0.0, 0.0]), brute);
        assert!((brute - (2.0f64).sqrt() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_agrees_with_samples() {
        use rand::{Rng, SeedableRng};
        let h = 1e-3;
        let (set, dom) = four_corner_cantor(2, h).unwrap();
        set.check_invariants().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = [rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7)];
            let exact = dom.dist_boundary(&p);
            let sampled = set.nearest_sample_distance(&p);
            assert!(exact <= sampled + 1e-12 && sampled <= exact + 2.0 * h, "{p:?}: {exact} vs {sampled}");
        }
    }
}
