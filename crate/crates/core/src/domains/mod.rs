//! Test-domain generators with exact distance oracles.

mod batakis;
mod cantor;
mod segments;
mod shapes;
mod spec;

pub use batakis::{batakis_domain, BatakisDomain, BatakisParams, BatakisSpec, StageRecord};
pub use cantor::{four_corner_cantor, CantorComplement, CantorSpec, Square, MAX_GENERATION};
pub use segments::{Segment, SegmentTree};
pub use shapes::{koch_snowflake, BallDomain, HalfSpace, LipschitzGraphDomain, PolygonDomain, Slab};
pub use spec::{parse_pairs, DomainSpec};
