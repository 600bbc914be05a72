use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::beta::{beta_table, BetaParams, BetaRecord};
use crate::corona::{corona_decompose, CoronaParams, CoronaResult};
use crate::cubes::{build_cubes, build_nets, build_nets_scaled, CubeId, CubeLattice};
use crate::domains::{four_corner_cantor, CantorComplement, DomainSpec};
use crate::error::Result;
use crate::geometry::SampledSet;
use crate::harmonic::{walker_seed, Domain, WosConfig};

/// Top scale of every Cantor lattice: the diameter of the unit square.
pub const CANTOR_SCALE: f64 = std::f64::consts::SQRT_2;

/// Samples per side of the finest Cantor cubes.
const CANTOR_SAMPLES_PER_SIDE: f64 = 12.0;

pub struct CantorFixture {
    pub j: usize,
    pub domain: CantorComplement,
    pub lattice: CubeLattice,
    pub records: Vec<BetaRecord>,
    pub params: BetaParams,
}

impl CantorFixture {
    pub fn root(&self) -> CubeId {
        CubeId::new(0, 0)
    }

    pub fn config(&self) -> serde_json::Value {
        serde_json::json!({
            "j": self.j,
            "k_max": self.lattice.max_level(),
            "top_scale": CANTOR_SCALE,
            "resolution": self.lattice.source.resolution(),
            "samples": self.lattice.source.len(),
            "beta": self.params,
        })
    }
}

/// `∂(K_j^c)` truncated at level `2j` of a lattice with top scale `√2`.
/// The β records use `C₀ = M` so that they also drive the corona.
pub fn cantor_fixture(j: usize) -> Result<CantorFixture> {
    let k_max = 2 * j;
    let h = 0.5f64.powi(k_max as i32) * CANTOR_SCALE / CANTOR_SAMPLES_PER_SIDE;
    let (set, domain) = four_corner_cantor(j, h)?;
    let set = Arc::new(set);
    let lattice = build_cubes(&build_nets_scaled(&set, 0.5, k_max, Some(CANTOR_SCALE))?, set)?;
    let params = BetaParams { c0: 3.0, ..BetaParams::default() };
    let records = beta_table(&lattice, CubeId::new(0, 0), &params);
    Ok(CantorFixture { j, domain, lattice, records, params })
}

/// Lattice over a sampled curve with the root at level 0.
pub fn curve_lattice(set: SampledSet, k_max: usize) -> Result<CubeLattice> {
    let set = Arc::new(set);
    build_cubes(&build_nets(&set, 0.5, k_max)?, set)
}

/// Lattice of a domain boundary. Cantor sets use the fixture lattice (top
/// scale `√2`, depth `2j`) unless `h` or `k_max` is given; other boundaries
/// are sampled at `h` (default `1e-3`) to depth `k_max` (default 6).
pub fn domain_lattice(spec: &DomainSpec, domain: &dyn Domain, h: Option<f64>, k_max: Option<usize>) -> Result<(CubeLattice, serde_json::Value)> {
    if let (Some(j), None, None) = (spec.is_cantor(), h, k_max) {
        let fx = cantor_fixture(j)?;
        let info = fx.config();
        return Ok((fx.lattice, info));
    }
    let h = h.unwrap_or(1e-3);
    let k_max = k_max.unwrap_or(6);
    let set = domain.boundary_samples(h)?;
    let samples = set.len();
    let lattice = curve_lattice(set, k_max)?;
    Ok((lattice, serde_json::json!({"h": h, "k_max": k_max, "samples": samples})))
}

/// Samples of the segment `[0,1]×{0}` at spacing `h`.
pub fn segment_samples(h: f64) -> Result<SampledSet> {
    let n = (1.0 / h).round() as usize;
    let coords: Vec<f64> = (0..=n).flat_map(|i| [i as f64 / n as f64, 0.0]).collect();
    SampledSet::new(coords, 2, 1.0 / n as f64, 1)
}

/// Fixtures shared between criteria within one suite run.
#[derive(Default)]
pub struct Fixtures {
    cantor: Mutex<BTreeMap<usize, Arc<CantorFixture>>>,
    corona: Mutex<BTreeMap<usize, Arc<CoronaResult>>>,
}

impl Fixtures {
    pub fn cantor(&self, j: usize) -> Result<Arc<CantorFixture>> {
        if let Some(f) = self.cantor.lock().expect("fixture lock").get(&j) {
            return Ok(f.clone());
        }
        let f = Arc::new(cantor_fixture(j)?);
        self.cantor.lock().expect("fixture lock").insert(j, f.clone());
        Ok(f)
    }

    /// Corona decomposition of `∂(K_j^c)` with default parameters.
    pub fn cantor_corona(&self, j: usize, walkers: usize, seed: u64) -> Result<(Arc<CantorFixture>, Arc<CoronaResult>)> {
        let fx = self.cantor(j)?;
        if let Some(c) = self.corona.lock().expect("fixture lock").get(&j) {
            if c.walkers == walkers && c.base_seed == walker_seed(seed, j as u64) {
                return Ok((fx, c.clone()));
            }
        }
        let cfg = WosConfig::for_domain(&fx.domain, walkers, walker_seed(seed, j as u64));
        let res = Arc::new(corona_decompose(&fx.domain, &fx.lattice, &fx.records, fx.root(), &CoronaParams::default(), &cfg)?);
        self.corona.lock().expect("fixture lock").insert(j, res.clone());
        Ok((fx, res))
    }
}
