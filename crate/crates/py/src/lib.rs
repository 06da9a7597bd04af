//! Python bindings. Reports and estimates cross the boundary as plain dicts
//! (serialized through `json`), models and matrices as opaque handles.

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use modesense_core::classifiers::{Algorithm, ProbabilityVector};
use modesense_core::datagen::{generate_dataset, GenSpec};
use modesense_core::dataset::extract_matrix;
use modesense_core::eval::{cross_validate as cv, CvConfig, Framework};
use modesense_core::features::{FeatureCatalog, FeatureConfig, FeatureDomain};
use modesense_core::hierarchy::{self, collect_benefit_outcomes, estimate_benefit, BetaPrior, HierarchyConfig};
use modesense_core::{io, Error};

fn py_err(e: Error) -> PyErr {
    if e.is_format_error() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse<T: FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| PyValueError::new_err(e.to_string()))
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

/// Windowed feature vectors with their mode labels.
#[pyclass(module = "modesense")]
#[derive(Clone)]
struct FeatureMatrix(modesense_core::dataset::FeatureMatrix);

#[pymethods]
impl FeatureMatrix {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_matrix_csv(&path, &FeatureCatalog::standard())
            .map(FeatureMatrix)
            .map_err(py_err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_matrix_csv(&path, &self.0, &FeatureCatalog::standard(), None).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.0.n_features()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        let catalog = FeatureCatalog::standard();
        self.0.feature_ids.iter().map(|&id| catalog.name(id)).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<&'static str> {
        self.0.labels.iter().map(|m| m.name()).collect()
    }

    #[getter]
    fn groups(&self) -> Vec<usize> {
        self.0.groups.clone()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        self.0
            .rows
            .get(i)
            .cloned()
            .ok_or_else(|| PyValueError::new_err(format!("row {i} out of range")))
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows.clone()
    }

    fn __repr__(&self) -> String {
        format!("FeatureMatrix({} rows x {} features)", self.0.len(), self.0.n_features())
    }
}

/// Synthesizes traces and featurizes them in one step.
#[pyfunction]
#[pyo3(signature = (duration_s = 1800.0, seed = 0, domain = "pooled"))]
fn generate(duration_s: f64, seed: u64, domain: &str) -> PyResult<FeatureMatrix> {
    let spec = GenSpec {
        seed,
        ..GenSpec::default().with_duration(duration_s)
    };
    let traces = generate_dataset(&spec).map_err(py_err)?;
    extract_matrix(&traces, &FeatureCatalog::standard(), parse(domain)?, FeatureConfig::default())
        .map(FeatureMatrix)
        .map_err(py_err)
}

/// Writes synthetic traces as CSV files plus a manifest.
#[pyfunction]
#[pyo3(signature = (out_dir, duration_s = 1800.0, seed = 0))]
fn generate_traces(out_dir: PathBuf, duration_s: f64, seed: u64) -> PyResult<()> {
    let spec = GenSpec {
        seed,
        ..GenSpec::default().with_duration(duration_s)
    };
    let traces = generate_dataset(&spec).map_err(py_err)?;
    io::write_traces(&out_dir, &traces, &spec).map(|_| ()).map_err(py_err)
}

/// Featurizes a trace directory written by `generate_traces` or the CLI.
#[pyfunction]
#[pyo3(signature = (traces_dir, domain = "pooled"))]
fn extract(traces_dir: PathBuf, domain: &str) -> PyResult<FeatureMatrix> {
    let (_, traces) = io::read_traces(&traces_dir).map_err(py_err)?;
    extract_matrix(&traces, &FeatureCatalog::standard(), parse(domain)?, FeatureConfig::default())
        .map(FeatureMatrix)
        .map_err(py_err)
}

/// Feature names of a domain, in column order.
#[pyfunction]
#[pyo3(signature = (domain = "pooled"))]
fn catalog(domain: &str) -> PyResult<Vec<String>> {
    let c = FeatureCatalog::standard();
    let d: FeatureDomain = parse(domain)?;
    Ok(c.ids(d).into_iter().map(|id| c.name(id)).collect())
}

/// Bayes fusion of first-layer probabilities with a pair specialist's
/// probabilities for the (top, runner-up) candidates.
#[pyfunction]
fn fuse(py: Python<'_>, first: Vec<f64>, second: (f64, f64)) -> PyResult<PyObject> {
    if first.len() != 5 {
        return Err(PyValueError::new_err("first-layer vector must have five entries"));
    }
    to_py(py, &hierarchy::fuse(ProbabilityVector(first), [second.0, second.1]))
}

/// The two-layer classifier.
#[pyclass(module = "modesense")]
struct HierarchicalModel(hierarchy::HierarchicalModel);

#[pymethods]
impl HierarchicalModel {
    #[staticmethod]
    #[pyo3(signature = (matrix, first_layer = "rf", second_layer = "svm", subset_size = 100, seed = 0))]
    fn train(
        py: Python<'_>,
        matrix: &FeatureMatrix,
        first_layer: &str,
        second_layer: &str,
        subset_size: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let config = HierarchyConfig {
            first_layer: parse::<Algorithm>(first_layer)?,
            second_layer: parse::<Algorithm>(second_layer)?,
            subset_size,
            ..HierarchyConfig::default()
        };
        let m = &matrix.0;
        let rows: Vec<usize> = (0..m.len()).collect();
        py.allow_threads(|| hierarchy::train_hierarchy(m, &rows, &config, seed))
            .map(HierarchicalModel)
            .map_err(py_err)
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        io::read_bundle(&dir).map(|(_, m)| HierarchicalModel(m)).map_err(py_err)
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        io::write_bundle(&dir, &self.0, &self.0.config).map_err(py_err)
    }

    /// Both layers' outputs for one feature vector.
    fn classify(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<PyObject> {
        to_py(py, &self.0.classify(&x).map_err(py_err)?)
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<&'static str> {
        Ok(self.0.classify(&x).map_err(py_err)?.mode.name())
    }

    /// Second-layer benefit estimate on `matrix`, whose columns must match
    /// the training columns.
    #[pyo3(signature = (matrix, prior_a = 1.0, prior_b = 1.0))]
    fn benefit(&self, py: Python<'_>, matrix: &FeatureMatrix, prior_a: f64, prior_b: f64) -> PyResult<PyObject> {
        if matrix.0.feature_ids != self.0.feature_ids {
            return Err(PyValueError::new_err("matrix columns differ from the model's"));
        }
        let rows: Vec<usize> = (0..matrix.0.len()).collect();
        let outcomes = collect_benefit_outcomes(&self.0, &matrix.0, &rows).map_err(py_err)?;
        let est = estimate_benefit(&outcomes, BetaPrior { a: prior_a, b: prior_b }).map_err(py_err)?;
        to_py(py, &est)
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.0.feature_ids.len()
    }
}

/// Stratified k-fold cross-validation; returns the full report as a dict.
#[pyfunction]
#[pyo3(signature = (matrix, framework = "hierarchical", algorithm = "rf", second_layer = "svm", domain = "pooled", k = 10, seed = 0, rf_trees = None, ranking_trees = None))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    py: Python<'_>,
    matrix: &FeatureMatrix,
    framework: &str,
    algorithm: &str,
    second_layer: &str,
    domain: &str,
    k: usize,
    seed: u64,
    rf_trees: Option<usize>,
    ranking_trees: Option<usize>,
) -> PyResult<PyObject> {
    let mut config = CvConfig {
        framework: parse::<Framework>(framework)?,
        algorithm: parse(algorithm)?,
        second_layer: parse(second_layer)?,
        domain: parse(domain)?,
        k,
        seed,
        ..CvConfig::default()
    };
    if let Some(n) = rf_trees {
        config.params.rf.n_trees = n;
    }
    if let Some(n) = ranking_trees {
        config.ranking_trees = n;
    }
    let m = &matrix.0;
    let report = py.allow_threads(|| cv(m, &config)).map_err(py_err)?;
    to_py(py, &report)
}

#[pymodule]
fn modesense(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<FeatureMatrix>()?;
    m.add_class::<HierarchicalModel>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_traces, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(fuse, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    Ok(())
}
