//! Harmonic measure and Green functions by walk-on-spheres.

mod checks;
mod domain;
pub mod exact;
mod wos;

pub use checks::{
    check_bourgain, check_doubling, density, hruscev_bound, log_integral, BourgainReport, CubeTerm, DoublingEntry,
    DoublingReport, LogIntegral, PoleSample,
};
pub use domain::{Domain, DomainKind, SampledBoundaryDomain};
pub(crate) use wos::green_sample;
pub use wos::{
    fundamental_solution, green_samples, run_walkers, stderr_of, walker_seed, wos_green, wos_measure, Exit,
    GreenSamples, HarmonicEstimate, Pole, Region, Target, TargetMass, WosConfig,
};

#[cfg(test)]
mod tests;
