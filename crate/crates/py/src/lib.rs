//! Python bindings. Structured results cross the boundary as JSON strings.

use std::path::PathBuf;

use fejerlab::config::{Experiment, ExperimentConfig};
use fejerlab::harness::{curves_csv, export_results, render_report, AuditReport, EnsembleStats};
use fejerlab::moduli::RateCertificate;
use fejerlab::spaces::{self, Point};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: fejerlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyclass(name = "Point", module = "fejerlab_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPoint(Point);

#[pymethods]
impl PyPoint {
    #[staticmethod]
    fn euclidean(coords: Vec<f64>) -> Self {
        PyPoint(Point::euclidean(&coords))
    }

    #[staticmethod]
    fn tripod(ray: u8, coord: f64) -> PyResult<Self> {
        Point::tripod(ray, coord).map(PyPoint).map_err(value_err)
    }

    #[staticmethod]
    fn half_plane(x: f64, y: f64) -> PyResult<Self> {
        Point::half_plane(x, y).map(PyPoint).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyPoint).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }

    #[getter]
    fn space(&self) -> String {
        self.0.space().to_string()
    }

    fn __repr__(&self) -> PyResult<String> {
        Ok(format!("Point({})", self.to_json()?))
    }
}

#[pyfunction]
fn distance(a: &PyPoint, b: &PyPoint) -> PyResult<f64> {
    spaces::distance(&a.0, &b.0).map_err(value_err)
}

#[pyfunction]
fn geodesic_point(a: &PyPoint, b: &PyPoint, t: f64) -> PyResult<PyPoint> {
    spaces::geodesic_point(&a.0, &b.0, t).map(PyPoint).map_err(value_err)
}

#[pyclass(name = "Certificate", module = "fejerlab_py", frozen)]
struct PyCertificate(RateCertificate);

#[pymethods]
impl PyCertificate {
    fn rho(&self, eps: f64) -> PyResult<u64> {
        self.0.rho(eps).map_err(value_err)
    }

    fn liminf_bound(&self, eps: f64, start: u64) -> PyResult<u64> {
        self.0.liminf_bound(eps, start).map_err(value_err)
    }

    /// Returns `(n_mean, n_as, n_dist_mean, n_dist_as)`.
    fn metric_rates(&self, eps: f64, lam: f64) -> PyResult<(u64, u64, u64, u64)> {
        let m = self.0.metric_rates(eps, lam).map_err(value_err)?;
        Ok((m.n_mean, m.n_as, m.n_dist_mean, m.n_dist_as))
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }
}

#[pyclass(name = "Ensemble", module = "fejerlab_py", frozen)]
struct PyEnsemble(EnsembleStats);

#[pymethods]
impl PyEnsemble {
    #[getter]
    fn paths(&self) -> u64 {
        self.0.paths
    }

    #[getter]
    fn horizon(&self) -> u64 {
        self.0.horizon
    }

    #[getter]
    fn mean_dist(&self) -> Vec<f64> {
        self.0.mean_dist.clone()
    }

    #[getter]
    fn mean_sq_dist(&self) -> Vec<f64> {
        self.0.mean_sq_dist.clone()
    }

    #[getter]
    fn mean_gap(&self) -> Vec<f64> {
        self.0.mean_gap.clone()
    }

    fn tail_probability(&self, n: u64, eps: f64) -> PyResult<f64> {
        self.0.tail_probability(n, eps).map_err(value_err)
    }

    fn curves_csv(&self) -> String {
        curves_csv(&self.0)
    }
}

#[pyclass(name = "AuditReport", module = "fejerlab_py", frozen)]
struct PyAuditReport(AuditReport);

#[pymethods]
impl PyAuditReport {
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed()
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }

    fn render(&self, ensemble: &PyEnsemble) -> String {
        render_report(&self.0, &ensemble.0)
    }
}

#[pyclass(name = "Experiment", module = "fejerlab_py", frozen)]
struct PyExperiment(Experiment);

#[pymethods]
impl PyExperiment {
    #[staticmethod]
    #[pyo3(signature = (text, seed_override=None))]
    fn from_json(text: &str, seed_override: Option<u64>) -> PyResult<Self> {
        let mut cfg = ExperimentConfig::from_json(text).map_err(value_err)?;
        if let Some(s) = seed_override {
            cfg.ensemble.seed = s;
        }
        cfg.build().map(PyExperiment).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ExperimentConfig::load(&path).and_then(ExperimentConfig::build).map(PyExperiment).map_err(value_err)
    }

    #[getter]
    fn algorithm(&self) -> String {
        self.0.config.algorithm.to_string()
    }

    #[getter]
    fn start(&self) -> PyPoint {
        PyPoint(self.0.config.start.clone())
    }

    /// Geometry suite report as JSON.
    fn validate(&self, py: Python<'_>) -> PyResult<String> {
        let rep = py.detach(|| self.0.validate()).map_err(value_err)?;
        json(&rep)
    }

    fn run(&self, py: Python<'_>) -> PyResult<PyEnsemble> {
        py.detach(|| self.0.run()).map(PyEnsemble).map_err(value_err)
    }

    fn certificate(&self) -> PyResult<PyCertificate> {
        self.0.certificate().map(PyCertificate).map_err(value_err)
    }

    fn audit(&self, py: Python<'_>, certificate: &PyCertificate, ensemble: &PyEnsemble) -> PyResult<PyAuditReport> {
        py.detach(|| self.0.audit(&certificate.0, &ensemble.0)).map(PyAuditReport).map_err(value_err)
    }

    /// Writes `curves.csv`, `meta.json` and, when given, `audit.json` to `out`.
    #[pyo3(signature = (ensemble, out, report=None))]
    fn export(&self, ensemble: &PyEnsemble, out: PathBuf, report: Option<&PyAuditReport>) -> PyResult<()> {
        export_results(&ensemble.0, report.map(|r| &r.0), &out).map_err(value_err)
    }
}

#[pymodule]
fn fejerlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoint>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyAuditReport>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic_point, m)?)?;
    Ok(())
}
