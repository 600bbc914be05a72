use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::SampledSet;

/// Global shape of a domain, used by the random walk to handle far-field behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Bounded,
    Unbounded,
    /// Complement of a compact set contained in `B(center, radius)`.
    ExteriorOfCompact { center: Vec<f64>, radius: f64 },
}

/// An open set `Ω ⊂ ℝⁿ` seen through a membership test and a boundary distance.
pub trait Domain: Send + Sync {
    fn dim(&self) -> usize;

    fn inside(&self, x: &[f64]) -> bool;

    /// `δ_Ω(x) = dist(x, ∂Ω)`, exact unless [`Domain::distance_is_lower_bound`].
    fn dist_boundary(&self, x: &[f64]) -> f64;

    fn distance_is_lower_bound(&self) -> bool {
        false
    }

    /// Nearest boundary point, when the geometry makes it cheap.
    fn nearest_boundary_point(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn kind(&self) -> DomainKind;

    /// Bounding box `(lo, hi)` of the boundary (or of the sampled window of it).
    fn bbox(&self) -> (Vec<f64>, Vec<f64>);

    /// An h-net of `∂Ω` (restricted to the bounding box for unbounded boundaries).
    fn boundary_samples(&self, h: f64) -> Result<SampledSet>;

    /// Generator spec that reproduces this domain.
    fn spec(&self) -> serde_json::Value;

    /// Characteristic length of the boundary, used for default shells.
    fn scale(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }
}

/// Domain whose boundary is known only through samples: the distance is the
/// nearest-sample distance minus the resolution (a certified lower bound).
pub struct SampledBoundaryDomain {
    pub boundary: std::sync::Arc<SampledSet>,
    pub inside_fn: Box<dyn Fn(&[f64]) -> bool + Send + Sync>,
    pub kind: DomainKind,
}

impl Domain for SampledBoundaryDomain {
    fn dim(&self) -> usize {
        self.boundary.dim()
    }

    fn inside(&self, x: &[f64]) -> bool {
        (self.inside_fn)(x)
    }

    fn dist_boundary(&self, x: &[f64]) -> f64 {
        (self.boundary.nearest_sample_distance(x) - self.boundary.resolution()).max(0.0)
    }

    fn distance_is_lower_bound(&self) -> bool {
        true
    }

    fn kind(&self) -> DomainKind {
        self.kind.clone()
    }

    fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for p in self.boundary.points() {
            for a in 0..n {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    fn boundary_samples(&self, _h: f64) -> Result<SampledSet> {
        Ok((*self.boundary).clone())
    }

    fn spec(&self) -> serde_json::Value {
        serde_json::json!({"kind": "sampled", "points": self.boundary.len(), "resolution": self.boundary.resolution()})
    }
}
