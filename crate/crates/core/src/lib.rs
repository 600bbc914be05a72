//! Dyadic cubes, β-numbers, walk-on-spheres harmonic measure and corona
//! decompositions on sampled boundaries.

pub mod beta;
pub mod corona;
pub mod cubes;
pub mod domains;
pub mod error;
pub mod geometry;
pub mod green_dev;
pub mod harmonic;
pub mod suite;

pub use error::{Error, Result};
