//! Python bindings. Structured results cross the boundary as JSON text and
//! are decoded by the `corona_tst` package.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use corona_tst::beta::{linear_deviation, BetaParams};
use corona_tst::cubes::CubeId;
use corona_tst::domains::DomainSpec;
use corona_tst::geometry::{Ball, Point};
use corona_tst::harmonic::{log_integral, wos_measure, Pole, Target, WosConfig};
use corona_tst::suite::{domain_lattice, run_suite, Suite, SuiteConfig, DEFAULT_SEED};
use corona_tst::Error;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        3 => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_spec(spec_json: &str) -> PyResult<DomainSpec> {
    serde_json::from_str(spec_json).map_err(json_err)
}

fn pole_of(pole: Option<Vec<f64>>) -> Pole {
    pole.map_or(Pole::AtInfinity, Pole::Point)
}

/// Spec JSON of a generated domain; Batakis specs carry their classification.
#[pyfunction]
#[pyo3(signature = (kind, params = Vec::new()))]
pub fn generate_domain(py: Python<'_>, kind: &str, params: Vec<(String, String)>) -> PyResult<String> {
    let spec = py.detach(|| DomainSpec::from_params(kind, &params)?.generate()).map_err(to_py)?;
    serde_json::to_string(&spec).map_err(json_err)
}

/// Per-cube β-numbers and the deviation total as JSON.
#[pyfunction]
#[pyo3(signature = (spec_json, h = None, k_max = None))]
pub fn deviation(py: Python<'_>, spec_json: &str, h: Option<f64>, k_max: Option<usize>) -> PyResult<String> {
    let spec = parse_spec(spec_json)?;
    py.detach(|| {
        let domain = spec.build()?;
        let (lattice, info) = domain_lattice(&spec, domain.as_ref(), h, k_max)?;
        let c0 = if spec.is_cantor().is_some() { 3.0 } else { BetaParams::default().c0 };
        let report = linear_deviation(&lattice, CubeId::new(0, 0), &BetaParams { c0, ..BetaParams::default() })?;
        let cubes: Vec<_> = report.per_cube.iter().map(|(q, c)| (q.to_string(), *c)).collect();
        Ok(serde_json::json!({"lattice": info, "summary": report.summary_json(), "per_cube": cubes}).to_string())
    })
    .map_err(to_py)
}

/// Harmonic measure of boundary balls `(centre, radius)`; `pole=None` starts
/// the walkers at infinity.
#[pyfunction]
#[pyo3(signature = (spec_json, targets, pole = None, walkers = 10_000, seed = DEFAULT_SEED))]
pub fn harmonic_measure(
    py: Python<'_>,
    spec_json: &str,
    targets: Vec<(Vec<f64>, f64)>,
    pole: Option<Vec<f64>>,
    walkers: usize,
    seed: u64,
) -> PyResult<String> {
    let spec = parse_spec(spec_json)?;
    py.detach(|| {
        let domain = spec.build()?;
        let targets = targets
            .into_iter()
            .enumerate()
            .map(|(k, (c, r))| Ok(Target::ball(format!("t{k}"), Ball::new(Point::new(c)?, r)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let cfg = WosConfig::for_domain(domain.as_ref(), walkers, seed);
        let est = wos_measure(domain.as_ref(), &pole_of(pole), &targets, &cfg)?;
        Ok(serde_json::to_string(&est)?)
    })
    .map_err(to_py)
}

/// Logarithmic integral of the harmonic density over the lattice bottom.
#[pyfunction]
#[pyo3(signature = (spec_json, pole = None, walkers = 100_000, seed = DEFAULT_SEED))]
pub fn log_integral_value(py: Python<'_>, spec_json: &str, pole: Option<Vec<f64>>, walkers: usize, seed: u64) -> PyResult<f64> {
    let spec = parse_spec(spec_json)?;
    py.detach(|| {
        let domain = spec.build()?;
        let (lattice, _) = domain_lattice(&spec, domain.as_ref(), None, None)?;
        let cfg = WosConfig::for_domain(domain.as_ref(), walkers, seed);
        let li = log_integral(domain.as_ref(), &lattice, CubeId::new(0, 0), &pole_of(pole), lattice.max_level(), 1.0, &cfg)?;
        Ok(li.value)
    })
    .map_err(to_py)
}

/// Runs an acceptance suite and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (suite = "trivial", quick = true, only = Vec::new(), seed = DEFAULT_SEED))]
pub fn verify(py: Python<'_>, suite: &str, quick: bool, only: Vec<String>, seed: u64) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let config = SuiteConfig { seed, quick, only, ..SuiteConfig::default() };
    let report = py.detach(|| run_suite(suite, &config, |_| {}));
    serde_json::to_string(&report).map_err(json_err)
}

#[pymodule]
pub fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(generate_domain, m)?)?;
    m.add_function(wrap_pyfunction!(deviation, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_measure, m)?)?;
    m.add_function(wrap_pyfunction!(log_integral_value, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
