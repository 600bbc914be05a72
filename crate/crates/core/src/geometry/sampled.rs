use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::content::diameter;
use super::kdtree::KdTree;
use super::point::{Ball, Point};
use crate::error::{invalid, Result};

/// Exact distance from a point to the underlying set `E`.
pub trait DistanceOracle: Send + Sync {
    fn distance(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> DistanceOracle for F {
    fn distance(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Finite h-net of a set `E ⊂ ℝⁿ`.
///
/// Points are stored deduplicated and in lexicographic order, which is the
/// scan order every greedy construction downstream relies on.
#[derive(Clone)]
pub struct SampledSet {
    dim: usize,
    target_dim: usize,
    resolution: f64,
    coords: Vec<f64>,
    oracle: Option<Arc<dyn DistanceOracle>>,
    oracle_spec: Option<serde_json::Value>,
    index: OnceLock<KdTree>,
}

impl std::fmt::Debug for SampledSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledSet")
            .field("len", &self.len())
            .field("dim", &self.dim)
            .field("target_dim", &self.target_dim)
            .field("resolution", &self.resolution)
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

/// JSON sidecar accompanying the CSV point file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledSetMeta {
    pub resolution: f64,
    pub ambient_dim: usize,
    pub target_dim: usize,
    pub oracle: Option<serde_json::Value>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

impl SampledSet {
    pub fn new(coords: Vec<f64>, dim: usize, resolution: f64, target_dim: usize) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(invalid("coordinate buffer does not match ambient dimension"));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(invalid("resolution must be positive"));
        }
        if target_dim == 0 || target_dim > dim {
            return Err(invalid(format!("target dimension {target_dim} must lie in 1..={dim}")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lex_cmp(&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]));
        let mut sorted = Vec::with_capacity(coords.len());
        for &i in &order {
            let p = &coords[i * dim..(i + 1) * dim];
            let m = sorted.len();
            if m >= dim && sorted[m - dim..] == *p {
                continue;
            }
            sorted.extend_from_slice(p);
        }
        Ok(SampledSet {
            dim,
            target_dim,
            resolution,
            coords: sorted,
            oracle: None,
            oracle_spec: None,
            index: OnceLock::new(),
        })
    }

    pub fn from_points(points: &[Point], resolution: f64, target_dim: usize) -> Result<Self> {
        let dim = points.first().map(|p| p.dim()).ok_or_else(|| invalid("empty point list"))?;
        if points.iter().any(|p| p.dim() != dim) {
            return Err(invalid("mixed point dimensions"));
        }
        let coords = points.iter().flat_map(|p| p.iter().copied()).collect();
        Self::new(coords, dim, resolution, target_dim)
    }

    /// Attaches an exact distance oracle and the generator spec that produced it.
    pub fn with_oracle(mut self, oracle: Arc<dyn DistanceOracle>, spec: Option<serde_json::Value>) -> Self {
        self.oracle = Some(oracle);
        self.oracle_spec = spec;
        self
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn oracle(&self) -> Option<&Arc<dyn DistanceOracle>> {
        self.oracle.as_ref()
    }

    pub fn oracle_spec(&self) -> Option<&serde_json::Value> {
        self.oracle_spec.as_ref()
    }

    pub fn index(&self) -> &KdTree {
        self.index.get_or_init(|| KdTree::new(&self.coords, self.dim))
    }

    /// Distance to `E`: exact via the oracle when present, else nearest sample.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.oracle {
            Some(o) => o.distance(x),
            None => self.nearest_sample_distance(x),
        }
    }

    pub fn nearest_sample_distance(&self, x: &[f64]) -> f64 {
        self.index().nearest(x).map_or(f64::INFINITY, |(_, d)| d)
    }

    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.index().nearest(x)
    }

    /// Indices of samples inside the closed ball, ascending.
    pub fn indices_in_ball(&self, ball: &Ball) -> Vec<usize> {
        self.index().within(&ball.center, ball.radius)
    }

    pub fn points_in_ball(&self, ball: &Ball) -> Vec<&[f64]> {
        self.indices_in_ball(ball).into_iter().map(|i| self.point(i)).collect()
    }

    pub fn diam(&self) -> f64 {
        let pts: Vec<&[f64]> = self.points().collect();
        diameter(&pts)
    }

    /// Sub-cloud with the given indices (kept in index order).
    pub fn subset(&self, indices: &[usize], resolution: f64) -> Result<SampledSet> {
        let coords = indices.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        let mut s = SampledSet::new(coords, self.dim, resolution, self.target_dim)?;
        s.oracle = self.oracle.clone();
        s.oracle_spec = self.oracle_spec.clone();
        Ok(s)
    }

    /// Uniformly scaled copy (points and resolution); the oracle is dropped.
    pub fn scaled(&self, factor: f64) -> Result<SampledSet> {
        SampledSet::new(
            self.coords.iter().map(|c| c * factor).collect(),
            self.dim,
            self.resolution * factor,
            self.target_dim,
        )
    }

    /// Checks the net invariants: every sample has a neighbour within `h`
    /// (unless singleton) and, with an oracle, lies on `E` within `h/100`.
    pub fn check_invariants(&self) -> Result<()> {
        if self.len() > 1 {
            let tree = self.index();
            for (i, p) in self.points().enumerate() {
                let mut ok = false;
                tree.for_each_within(p, self.resolution, |j, _| ok |= j != i);
                if !ok {
                    return Err(invalid(format!("sample {i} has no neighbour within resolution")));
                }
            }
        }
        if let Some(o) = &self.oracle {
            for (i, p) in self.points().enumerate() {
                if o.distance(p) > self.resolution / 100.0 {
                    return Err(invalid(format!("sample {i} is off the set per the oracle")));
                }
            }
        }
        Ok(())
    }

    pub fn meta(&self) -> SampledSetMeta {
        SampledSetMeta {
            resolution: self.resolution,
            ambient_dim: self.dim,
            target_dim: self.target_dim,
            oracle: self.oracle_spec.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        wtr.write_record(&header)?;
        for p in self.points() {
            wtr.write_record(p.iter().map(|c| format!("{c:?}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, meta: &SampledSetMeta) -> Result<SampledSet> {
        let mut rdr = csv::Reader::from_reader(r);
        let width = rdr.headers()?.len();
        if width != meta.ambient_dim {
            return Err(invalid(format!(
                "CSV has {width} columns, sidecar says ambient_dim = {}",
                meta.ambient_dim
            )));
        }
        let mut coords = Vec::new();
        for rec in rdr.records() {
            for field in rec?.iter() {
                coords.push(field.trim().parse::<f64>().map_err(|e| invalid(format!("bad coordinate {field:?}: {e}")))?);
            }
        }
        let mut s = SampledSet::new(coords, meta.ambient_dim, meta.resolution, meta.target_dim)?;
        s.oracle_spec = meta.oracle.clone();
        Ok(s)
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(stem.with_extension("csv"))?)?;
        let f = std::fs::File::create(stem.with_extension("json"))?;
        serde_json::to_writer_pretty(f, &self.meta())?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<SampledSet> {
        let meta: SampledSetMeta = serde_json::from_reader(std::fs::File::open(stem.with_extension("json"))?)?;
        Self::read_csv(std::fs::File::open(stem.with_extension("csv"))?, &meta)
    }
}
