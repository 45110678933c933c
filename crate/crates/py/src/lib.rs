//! Python bindings: concept classes, the exponential mechanism, the
//! amplification sizes, and the JSON-driven experiment and audit runners.

use std::sync::Arc;

use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pssl_core::concepts::{ClassSpec, Point};
use pssl_core::error::Error;
use pssl_core::harness::{self, AuditExperiment, ExperimentConfig};
use pssl_core::mechanisms::{self, Exponential};
use pssl_core::rng::rng_from_seed;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Resource(_) => PyMemoryError::new_err(e.to_string()),
        Error::Domain(_) | Error::Config(_) | Error::Json(_) => PyValueError::new_err(e.to_string()),
        e if e.is_resource() => PyMemoryError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn points(class: &pssl_core::concepts::ConceptClass, pts: Vec<u32>) -> PyResult<Vec<Point>> {
    let pts: Vec<Point> = pts.into_iter().map(Point).collect();
    class.check_points(&pts).map_err(to_py)?;
    Ok(pts)
}

/// A finite concept class built from a spec such as `"thresh:3"`,
/// `"rect:2x2"` or `"xor(interval:3)"`, or a JSON spec object.
#[pyclass(name = "ConceptClass", module = "pssl", frozen)]
struct PyConceptClass {
    inner: Arc<pssl_core::concepts::ConceptClass>,
}

#[pymethods]
impl PyConceptClass {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let spec: ClassSpec = spec.parse().map_err(to_py)?;
        let inner = spec.build().map_err(to_py)?;
        Ok(PyConceptClass { inner: Arc::new(inner) })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id().to_string()
    }

    #[getter]
    fn domain_size(&self) -> usize {
        self.inner.domain().cardinality()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("ConceptClass('{}', members={})", self.inner.id(), self.inner.len())
    }

    fn eval(&self, index: usize, point: u32) -> PyResult<bool> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err(format!("no member {index}")));
        }
        let p = points(&self.inner, vec![point])?;
        Ok(self.inner.eval(index, p[0]))
    }

    fn vc_dimension(&self) -> PyResult<usize> {
        self.inner.vc_dimension().map_err(to_py)
    }

    /// Dichotomies realized on `pts`, as sorted 0/1 lists.
    fn projection(&self, pts: Vec<u32>) -> PyResult<Vec<Vec<u32>>> {
        let pts = points(&self.inner, pts)?;
        let proj = self.inner.projection(&pts).map_err(to_py)?;
        Ok(proj
            .vectors()
            .into_iter()
            .map(|v| v.into_iter().map(u32::from).collect())
            .collect())
    }

    /// Lowest-index member realizing each dichotomy on `pts`.
    fn canonical_hypotheses(&self, pts: Vec<u32>) -> PyResult<Vec<usize>> {
        let pts = points(&self.inner, pts)?;
        Ok(self.inner.canonical_hypotheses(&pts))
    }

    fn xor_class(&self) -> PyResult<Self> {
        let inner = self.inner.xor_class().map_err(to_py)?;
        Ok(PyConceptClass { inner: Arc::new(inner) })
    }
}

/// Brute-force VC dimension of a class spec.
#[pyfunction]
fn vc_dimension(spec: &str) -> PyResult<usize> {
    PyConceptClass::new(spec)?.vc_dimension()
}

/// Selection probabilities of the exponential mechanism.
#[pyfunction]
#[pyo3(signature = (scores, epsilon, sensitivity = 1))]
fn exponential_probabilities(scores: Vec<i64>, epsilon: f64, sensitivity: u64) -> PyResult<Vec<f64>> {
    let m = Exponential::new(epsilon).map_err(to_py)?.with_sensitivity(sensitivity);
    m.probabilities(&scores).map_err(to_py)
}

/// `draws` seeded selections from the exponential mechanism.
#[pyfunction]
#[pyo3(signature = (scores, epsilon, seed, draws = 1, sensitivity = 1))]
fn exponential_sample(
    py: Python<'_>,
    scores: Vec<i64>,
    epsilon: f64,
    seed: u64,
    draws: usize,
    sensitivity: u64,
) -> PyResult<Vec<usize>> {
    let m = Exponential::new(epsilon).map_err(to_py)?.with_sensitivity(sensitivity);
    py.detach(|| {
        let mut rng = rng_from_seed(seed);
        (0..draws).map(|_| m.select(&scores, &mut rng)).collect::<Result<_, _>>()
    })
    .map_err(to_py)
}

/// `min(1, |H| exp(-eps gap m / 2))`.
#[pyfunction]
fn utility_bound(candidates: usize, epsilon: f64, m: usize, gap: f64) -> f64 {
    mechanisms::utility_bound(candidates, epsilon, m, gap)
}

/// Outer input size that subsampling needs to take an `eps_star` mechanism to `eps`.
#[pyfunction]
fn subsample_input_size(n: usize, eps_star: f64, eps: f64) -> usize {
    mechanisms::subsample_input_size(n, eps_star, eps)
}

/// Pool size of the subsampling active wrapper.
#[pyfunction]
fn active_pool_size(n: usize, eps_star: f64, eps: f64) -> usize {
    mechanisms::active_pool_size(n, eps_star, eps)
}

/// Runs an experiment config (JSON) and returns the report as JSON, with
/// the per-trial rows under `"rows"`.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config).map_err(to_py)?;
    let report = py.detach(|| harness::run_experiment(&cfg)).map_err(to_py)?;
    let mut value = serde_json::to_value(&report).map_err(|e| to_py(e.into()))?;
    value["rows"] = serde_json::to_value(&report.trials).map_err(|e| to_py(e.into()))?;
    serde_json::to_string(&value).map_err(|e| to_py(e.into()))
}

/// Runs an audit config (JSON) and returns the audit report as JSON.
#[pyfunction]
fn run_audit(py: Python<'_>, config: &str) -> PyResult<String> {
    let exp = AuditExperiment::from_json(config).map_err(to_py)?;
    let report = py.detach(|| harness::run_audit(&exp)).map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| to_py(e.into()))
}

#[pymodule]
fn pssl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConceptClass>()?;
    m.add_function(wrap_pyfunction!(vc_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(exponential_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(exponential_sample, m)?)?;
    m.add_function(wrap_pyfunction!(utility_bound, m)?)?;
    m.add_function(wrap_pyfunction!(subsample_input_size, m)?)?;
    m.add_function(wrap_pyfunction!(active_pool_size, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_audit, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
