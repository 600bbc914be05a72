//! Christ–David cubes and stopping-time regions.

mod lattice;
mod nets;
mod stopping;

pub use lattice::{build_cubes, Cube, CubeId, CubeLattice};
pub use nets::{build_nets, build_nets_scaled, deepest_valid_level, Nets};
pub use stopping::{stopping_region, StoppingRegion};
