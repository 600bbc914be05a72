//! Points, balls, planes, sampled sets, content and distances.

pub mod content;
pub mod distance;
pub mod kdtree;
pub mod point;
pub mod sampled;

pub use content::{content_of_points, convex_hull, diameter, hausdorff_content, IncrementalCover, DEFAULT_DEPTH};
pub use distance::{normalized_distance, plane_distance_stats, profile_of_points, DistanceProfile, NormalizedDistance};
pub use kdtree::KdTree;
pub use point::{dist, dist2, dot, norm, sub, Ball, Plane, Point};
pub use sampled::{DistanceOracle, SampledSet, SampledSetMeta};
