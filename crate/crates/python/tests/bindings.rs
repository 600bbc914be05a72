use pyo3::prelude::*;
use serde_json::Value;

use corona_tst_py::{deviation, generate_domain, harmonic_measure, verify};

fn with_py<T>(f: impl FnOnce(Python<'_>) -> T) -> T {
    Python::initialize();
    Python::attach(f)
}

#[test]
fn generated_spec_feeds_the_deviation() {
    with_py(|py| {
        let spec = generate_domain(py, "cantor", vec![("j".into(), "1".into())]).unwrap();
        let dev: Value = serde_json::from_str(&deviation(py, &spec, None, None).unwrap()).unwrap();
        let total = dev["summary"]["total"].as_f64().unwrap();
        assert!((total - 1.5223).abs() < 1e-3, "{total}");
    });
}

#[test]
fn quarter_arc_of_the_disk() {
    with_py(|py| {
        let spec = generate_domain(py, "disk", Vec::new()).unwrap();
        let r = 2.0 * (std::f64::consts::PI / 8.0).sin();
        let est = harmonic_measure(py, &spec, vec![(vec![1.0, 0.0], r)], Some(vec![0.0, 0.0]), 20_000, 3).unwrap();
        let est: Value = serde_json::from_str(&est).unwrap();
        let mass = est["targets"][0]["mass"].as_f64().unwrap();
        assert!((mass - 0.25).abs() < 0.02, "{mass}");
    });
}

#[test]
fn errors_become_python_exceptions() {
    with_py(|py| {
        let err = generate_domain(py, "cantor", vec![("j".into(), "x".into())]).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = verify(py, "everything", true, Vec::new(), 1).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

#[test]
fn trivial_suite_passes_through_the_bindings() {
    with_py(|py| {
        let report: Value = serde_json::from_str(&verify(py, "trivial", true, Vec::new(), 1729).unwrap()).unwrap();
        let outcomes = report["outcomes"].as_array().unwrap();
        assert_eq!(outcomes.len(), 21);
        assert!(outcomes.iter().all(|o| o["passed"] == Value::Bool(true)));
    });
}
