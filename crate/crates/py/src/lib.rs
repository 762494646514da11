//! Python bindings. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use ::synthcurate::alignment::{self, OptimizerConfig, ProjectionSet};
use ::synthcurate::corpus_io::{self, EmbeddingMatrix};
use ::synthcurate::evaluation::{self, Point2D, ProjectionMode};
use ::synthcurate::gp_sampler::{self, DemonstrationBatch, ExponentForm, KernelConfig, TrackerState};
use ::synthcurate::Matrix;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(err)
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn kernel(tau: f64, squared: bool) -> PyResult<KernelConfig> {
    let form = if squared { ExponentForm::Squared } else { ExponentForm::Unsquared };
    KernelConfig::with_form(tau, form).map_err(err)
}

fn projection_set(rows: Vec<Vec<f64>>, seed: u64) -> PyResult<ProjectionSet> {
    Ok(ProjectionSet::from_matrix(matrix(rows)?, seed))
}

fn points_2d(points: &[(f64, f64)]) -> Vec<Point2D> {
    points.iter().enumerate().map(|(i, &(x, y))| Point2D::new(x, y, i)).collect()
}

/// Labeled text corpus.
#[pyclass(name = "Corpus", module = "synthcurate", from_py_object)]
#[derive(Clone)]
struct PyCorpus {
    inner: corpus_io::Corpus,
}

#[pymethods]
impl PyCorpus {
    /// Builds a corpus from `(id, text, label)` tuples.
    #[new]
    #[pyo3(signature = (records, label_set=None))]
    fn new(records: Vec<(String, String, String)>, label_set: Option<Vec<String>>) -> PyResult<Self> {
        let records = records
            .into_iter()
            .map(|(id, text, label)| corpus_io::TextRecord::new(id, text, label))
            .collect();
        Ok(Self { inner: corpus_io::Corpus::new(records, label_set).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: corpus_io::load_corpus(path).map_err(err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        corpus_io::save_corpus(path, &self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, index: usize) -> PyResult<(String, String, String)> {
        let r = self.inner.get(index).ok_or_else(|| PyIndexError::new_err(index))?;
        Ok((r.id.clone(), r.text.clone(), r.label.clone()))
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.records().iter().map(|r| r.id.clone()).collect()
    }

    #[getter]
    fn texts(&self) -> Vec<String> {
        self.inner.records().iter().map(|r| r.text.clone()).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.records().iter().map(|r| r.label.clone()).collect()
    }

    #[getter]
    fn label_set(&self) -> Vec<String> {
        self.inner.label_set().to_vec()
    }

    /// Parent record id for each record (its own id unless it is a resampled copy).
    #[getter]
    fn parent_ids(&self) -> Vec<String> {
        self.inner
            .records()
            .iter()
            .map(|r| r.meta.get("parent_id").unwrap_or(&r.id).clone())
            .collect()
    }

    fn fingerprint(&self) -> u64 {
        corpus_io::corpus_fingerprint(&self.inner)
    }

    fn vocabulary_size(&self) -> usize {
        evaluation::vocabulary_size(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Corpus(len={}, labels={:?})", self.inner.len(), self.inner.label_set())
    }
}

/// One sampling round: the anchor and its members (anchor first).
#[pyclass(name = "Batch", module = "synthcurate", from_py_object)]
#[derive(Clone)]
struct PyBatch {
    inner: DemonstrationBatch,
}

#[pymethods]
impl PyBatch {
    #[getter]
    fn anchor(&self) -> usize {
        self.inner.anchor
    }

    #[getter]
    fn members(&self) -> Vec<usize> {
        self.inner.members.clone()
    }

    #[getter]
    fn round(&self) -> usize {
        self.inner.round
    }

    fn __repr__(&self) -> String {
        format!(
            "Batch(round={}, anchor={}, members={:?})",
            self.inner.round, self.inner.anchor, self.inner.members
        )
    }
}

fn wrap_batches(batches: Vec<DemonstrationBatch>) -> Vec<PyBatch> {
    batches.into_iter().map(|inner| PyBatch { inner }).collect()
}

/// Gaussian-process uncertainty tracker over a fixed point set.
#[pyclass(name = "Tracker", module = "synthcurate")]
struct PyTracker {
    inner: TrackerState,
}

#[pymethods]
impl PyTracker {
    #[new]
    #[pyo3(signature = (points, tau=0.9, squared=false))]
    fn new(points: Vec<Vec<f64>>, tau: f64, squared: bool) -> PyResult<Self> {
        let inner = TrackerState::new(matrix(points)?, kernel(tau, squared)?).map_err(err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn variance(&self) -> Vec<f64> {
        self.inner.variance().to_vec()
    }

    #[getter]
    fn selected(&self) -> Vec<usize> {
        self.inner.selected().to_vec()
    }

    #[getter]
    fn history(&self) -> Vec<PyBatch> {
        wrap_batches(self.inner.history().to_vec())
    }

    fn unselected_count(&self) -> usize {
        self.inner.unselected_count()
    }

    fn max_unselected_variance(&self) -> f64 {
        self.inner.max_unselected_variance()
    }

    fn select(&self, k: usize) -> PyResult<PyBatch> {
        Ok(PyBatch { inner: self.inner.select(k).map_err(err)? })
    }

    fn update(&mut self, batch: &PyBatch) -> PyResult<()> {
        self.inner.update(&batch.inner).map_err(err)
    }

    /// Copy whose variances are all shifted by `offset`.
    fn with_variance_offset(&self, offset: f64) -> Self {
        Self { inner: self.inner.with_variance_offset(offset) }
    }

    #[pyo3(signature = (k, sigma=0.5, max_rounds=200))]
    fn run_sampling(&mut self, k: usize, sigma: f64, max_rounds: usize) -> PyResult<Vec<PyBatch>> {
        Ok(wrap_batches(self.inner.run_sampling(k, sigma, max_rounds).map_err(err)?))
    }

    fn take_rounds(&mut self, k: usize, rounds: usize) -> PyResult<Vec<PyBatch>> {
        Ok(wrap_batches(self.inner.take_rounds(k, rounds).map_err(err)?))
    }
}

/// Feature-hashing embeddings of `texts`, one unit-norm row per text.
#[pyfunction]
#[pyo3(signature = (texts, dim=256, seed=0))]
fn hash_embed(texts: Vec<String>, dim: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let m = corpus_io::hash_embed(&refs, dim, seed).map_err(err)?;
    Ok(rows_of(&Matrix::from(&m)))
}

#[pyfunction]
fn fingerprint(corpus: &PyCorpus) -> u64 {
    corpus.fingerprint()
}

/// Reads a binary embedding file; returns `(rows, fingerprint)`.
#[pyfunction]
fn read_embeddings(path: &str) -> PyResult<(Vec<Vec<f64>>, u64)> {
    let m = corpus_io::read_embeddings(path).map_err(err)?;
    Ok((rows_of(&Matrix::from(&m)), m.fingerprint()))
}

#[pyfunction]
fn write_embeddings(path: &str, rows: Vec<Vec<f64>>, fingerprint: u64) -> PyResult<()> {
    let m = EmbeddingMatrix::from_rows_f64(&rows, fingerprint).map_err(err)?;
    corpus_io::save_embeddings(path, &m).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, tau=0.9, squared=false))]
fn rbf_kernel(a: Vec<f64>, b: Vec<f64>, tau: f64, squared: bool) -> PyResult<f64> {
    gp_sampler::rbf_kernel(&a, &b, &kernel(tau, squared)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (dim, count, seed=0))]
fn gram_schmidt_projections(dim: usize, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let p = alignment::gram_schmidt_projections(dim, count, seed).map_err(err)?;
    Ok(rows_of(p.vectors()))
}

#[pyfunction]
fn mmd_loss(
    real: Vec<Vec<f64>>,
    generated: Vec<Vec<f64>>,
    weights: Vec<f64>,
    projections: Vec<Vec<f64>>,
) -> PyResult<f64> {
    let p = projection_set(projections, 0)?;
    alignment::mmd_loss(&matrix(real)?, &matrix(generated)?, &weights, &p).map_err(err)
}

#[pyfunction]
fn mmd_gradient(
    real: Vec<Vec<f64>>,
    generated: Vec<Vec<f64>>,
    weights: Vec<f64>,
    projections: Vec<Vec<f64>>,
) -> PyResult<Vec<f64>> {
    let p = projection_set(projections, 0)?;
    alignment::mmd_gradient(&matrix(real)?, &matrix(generated)?, &weights, &p).map_err(err)
}

/// Learns per-sample weights; returns `(weights, loss_trace)`.
#[pyfunction]
#[pyo3(signature = (real, generated, projections, learning_rate=0.1, max_iters=2000, tol=1e-8, nonneg=true))]
#[allow(clippy::too_many_arguments)]
fn learn_weights(
    real: Vec<Vec<f64>>,
    generated: Vec<Vec<f64>>,
    projections: Vec<Vec<f64>>,
    learning_rate: f64,
    max_iters: usize,
    tol: f64,
    nonneg: bool,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = OptimizerConfig { learning_rate, max_iters, tol, nonneg_projection: nonneg };
    let p = projection_set(projections, 0)?;
    let fit = alignment::learn_weights(&matrix(real)?, &matrix(generated)?, &p, &cfg).map_err(err)?;
    Ok((fit.weights, fit.loss_trace))
}

#[pyfunction]
#[pyo3(signature = (corpus, weights, target_size, seed=0))]
fn resample(corpus: &PyCorpus, weights: Vec<f64>, target_size: usize, seed: u64) -> PyResult<PyCorpus> {
    let inner = alignment::resample(&corpus.inner, &weights, target_size, seed).map_err(err)?;
    Ok(PyCorpus { inner })
}

#[pyfunction]
#[pyo3(signature = (a, b, n_slices=evaluation::DEFAULT_SLICES, seed=0))]
fn sliced_wasserstein(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, n_slices: usize, seed: u64) -> PyResult<f64> {
    evaluation::sliced_wasserstein(&matrix(a)?, &matrix(b)?, n_slices, seed).map_err(err)
}

/// Area of the convex hull of 2-D points.
#[pyfunction]
fn hull_area(points: Vec<(f64, f64)>) -> f64 {
    let raw: Vec<[f64; 2]> = points.iter().map(|&(x, y)| [x, y]).collect();
    evaluation::hull_of(&raw).area()
}

/// Coverage rate after each of the first `steps` entries of `order`.
#[pyfunction]
fn coverage_curve(points: Vec<(f64, f64)>, order: Vec<usize>, k: usize, steps: usize) -> PyResult<Vec<f64>> {
    let report = evaluation::coverage_curve(&points_2d(&points), &order, k, steps).map_err(err)?;
    Ok(report.rates)
}

/// Scores on the two leading principal components.
#[pyfunction]
fn project_2d(embeddings: Vec<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
    let pts = evaluation::project_2d(&matrix(embeddings)?, ProjectionMode::Pca, None).map_err(err)?;
    Ok(pts.into_iter().map(|p| (p.x, p.y)).collect())
}

#[pyfunction]
fn vocabulary_size(texts: Vec<String>) -> usize {
    evaluation::vocabulary(texts.iter().map(String::as_str)).len()
}

#[pymodule(name = "synthcurate")]
fn synthcurate_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyBatch>()?;
    m.add_class::<PyTracker>()?;
    m.add_function(wrap_pyfunction!(hash_embed, m)?)?;
    m.add_function(wrap_pyfunction!(fingerprint, m)?)?;
    m.add_function(wrap_pyfunction!(read_embeddings, m)?)?;
    m.add_function(wrap_pyfunction!(write_embeddings, m)?)?;
    m.add_function(wrap_pyfunction!(rbf_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(gram_schmidt_projections, m)?)?;
    m.add_function(wrap_pyfunction!(mmd_loss, m)?)?;
    m.add_function(wrap_pyfunction!(mmd_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(learn_weights, m)?)?;
    m.add_function(wrap_pyfunction!(resample, m)?)?;
    m.add_function(wrap_pyfunction!(sliced_wasserstein, m)?)?;
    m.add_function(wrap_pyfunction!(hull_area, m)?)?;
    m.add_function(wrap_pyfunction!(coverage_curve, m)?)?;
    m.add_function(wrap_pyfunction!(project_2d, m)?)?;
    m.add_function(wrap_pyfunction!(vocabulary_size, m)?)?;
    m.add("JITTER", gp_sampler::JITTER)?;
    Ok(())
}
