//! Python module `rbam`.
//!
//! Relations cross the boundary as the strings `"support"` and `"attack"`,
//! label policies as `"ignore"` and `"count_as_error"`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use rbam_core::corpus::SourceFormat;
use rbam_core::labeling::{self, apply_policy, LabelPolicy};
use rbam_core::metrics;
use rbam_core::runner::{self, RunConfig, RunOptions};
use rbam_core::{DatasetDescriptor, DatasetName, Relation};

create_exception!(rbam, RbamError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    RbamError::new_err(e.to_string())
}

fn relation(s: &str) -> PyResult<Relation> {
    s.parse()
        .map_err(|_| PyValueError::new_err(format!("expected 'support' or 'attack', got {s:?}")))
}

fn policy(s: &str) -> PyResult<LabelPolicy> {
    match s {
        "ignore" => Ok(LabelPolicy::Ignore),
        "count_as_error" => Ok(LabelPolicy::CountAsError),
        other => Err(PyValueError::new_err(format!("unknown label policy {other:?}"))),
    }
}

fn format_by_id(id: &str) -> PyResult<SourceFormat> {
    SourceFormat::from_id(id).ok_or_else(|| PyValueError::new_err(format!("unknown source format {id:?}")))
}

/// One argument pair; `child` supports or attacks `parent`.
#[pyclass(module = "rbam", name = "ArgumentPair", frozen, from_py_object)]
#[derive(Clone)]
struct PyArgumentPair {
    inner: rbam_core::ArgumentPair,
}

#[pymethods]
impl PyArgumentPair {
    #[new]
    fn new(id: String, dataset: String, parent: &str, child: &str, gold: &str) -> PyResult<Self> {
        let inner = rbam_core::ArgumentPair::new(id, dataset, parent, child, relation(gold)?).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn id(&self) -> &str {
        &self.inner.id
    }

    #[getter]
    fn dataset(&self) -> &str {
        &self.inner.dataset
    }

    #[getter]
    fn parent(&self) -> &str {
        &self.inner.parent_text
    }

    #[getter]
    fn child(&self) -> &str {
        &self.inner.child_text
    }

    #[getter]
    fn gold(&self) -> &'static str {
        self.inner.gold.as_str()
    }

    fn __repr__(&self) -> String {
        format!("ArgumentPair(id={:?}, gold={:?})", self.inner.id, self.gold())
    }
}

/// Few-shot prompt configuration; the bundled default without a path.
#[pyclass(module = "rbam", name = "PromptConfig", frozen)]
struct PyPromptConfig {
    inner: rbam_core::PromptConfig,
}

#[pymethods]
impl PyPromptConfig {
    #[new]
    #[pyo3(signature = (path=None))]
    fn new(path: Option<PathBuf>) -> PyResult<Self> {
        let inner = match path {
            Some(p) => rbam_core::PromptConfig::from_path(&p).map_err(err)?,
            None => rbam_core::PromptConfig::default(),
        };
        Ok(Self { inner })
    }

    /// Problems with the configuration, empty when it is usable.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(ToString::to_string).collect()
    }

    fn build_prompt(&self, parent: &str, child: &str) -> PyResult<String> {
        self.inner.build_prompt_for("query", parent, child).map_err(err)
    }
}

#[pyclass(module = "rbam", name = "DatasetScores", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDatasetScores {
    inner: metrics::DatasetScores,
}

#[pymethods]
impl PyDatasetScores {
    #[getter]
    fn dataset(&self) -> &str {
        &self.inner.dataset
    }

    #[getter]
    fn f1_support(&self) -> Option<f64> {
        self.inner.f1_support
    }

    #[getter]
    fn f1_attack(&self) -> Option<f64> {
        self.inner.f1_attack
    }

    #[getter]
    fn f1_both(&self) -> f64 {
        self.inner.f1_both
    }

    #[getter]
    fn n_support(&self) -> usize {
        self.inner.n_support
    }

    #[getter]
    fn n_attack(&self) -> usize {
        self.inner.n_attack
    }

    #[getter]
    fn n_ignored(&self) -> usize {
        self.inner.n_ignored
    }

    #[getter]
    fn n_failed(&self) -> usize {
        self.inner.n_failed
    }

    #[getter]
    fn ignored_labels(&self) -> std::collections::BTreeMap<String, usize> {
        self.inner.ignored_labels.clone()
    }

    #[getter]
    fn mean_latency_seconds(&self) -> Option<f64> {
        self.inner.latency.map(|l| l.mean_seconds)
    }

    fn __repr__(&self) -> String {
        format!("DatasetScores({:?}, both={:.4})", self.inner.dataset, self.inner.f1_both)
    }
}

#[pyclass(module = "rbam", name = "SummaryTable", frozen)]
struct PySummaryTable {
    inner: metrics::SummaryTable,
}

#[pymethods]
impl PySummaryTable {
    #[getter]
    fn rows(&self) -> Vec<PyDatasetScores> {
        self.inner
            .rows
            .iter()
            .map(|r| PyDatasetScores { inner: r.clone() })
            .collect()
    }

    #[getter]
    fn avg_support(&self) -> f64 {
        self.inner.avg_support
    }

    #[getter]
    fn avg_attack(&self) -> f64 {
        self.inner.avg_attack
    }

    #[getter]
    fn avg_both(&self) -> f64 {
        self.inner.avg_both
    }

    #[getter]
    fn macro_f1(&self) -> f64 {
        self.inner.macro_f1
    }

    #[getter]
    fn mean_latency_seconds(&self) -> Option<f64> {
        self.inner.latency.map(|l| l.mean_seconds)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_text_table(&self) -> String {
        self.inner.to_text_table()
    }

    fn __str__(&self) -> String {
        self.inner.to_text_table()
    }
}

/// Loads a corpus and keeps its support/attack pairs.
#[pyfunction]
#[pyo3(signature = (name, path, format=None))]
fn load_dataset(name: &str, path: PathBuf, format: Option<&str>) -> PyResult<Vec<PyArgumentPair>> {
    let dataset =
        DatasetName::from_id(name).ok_or_else(|| PyValueError::new_err(format!("unknown dataset {name:?}")))?;
    let mut desc = DatasetDescriptor::new(dataset);
    if let Some(f) = format {
        desc = desc.with_format(format_by_id(f)?);
    }
    let corpus = rbam_core::load_dataset(&desc, &path).map_err(err)?;
    Ok(corpus.pairs.into_iter().map(|inner| PyArgumentPair { inner }).collect())
}

/// `(n_support, n_attack, avg_words, avg_chars)` over both texts of every pair.
#[pyfunction]
fn compute_stats(pairs: Vec<PyArgumentPair>) -> (usize, usize, f64, f64) {
    let pairs: Vec<_> = pairs.into_iter().map(|p| p.inner).collect();
    let s = rbam_core::compute_stats(&pairs);
    (s.n_support, s.n_attack, s.avg_words, s.avg_chars)
}

/// Prompt for one pair under the bundled default configuration.
#[pyfunction]
fn build_prompt(parent: &str, child: &str) -> PyResult<String> {
    rbam_core::PromptConfig::default()
        .build_prompt_for("query", parent, child)
        .map_err(err)
}

/// `(kind, other_text)` for a raw model answer.
#[pyfunction]
fn normalize_label(raw: &str) -> (String, Option<String>) {
    let label = labeling::normalize(raw);
    (label.kind().to_string(), label.other_text().map(str::to_owned))
}

/// F1 of `class` over gold labels and raw model answers; `None` when the
/// class has no gold instance among the scored pairs.
#[pyfunction]
#[pyo3(signature = (gold, answers, class_, policy="ignore"))]
fn class_f1(gold: Vec<String>, answers: Vec<String>, class_: &str, policy: &str) -> PyResult<Option<f64>> {
    if gold.len() != answers.len() {
        return Err(PyValueError::new_err("gold and answers differ in length"));
    }
    let policy = self::policy(policy)?;
    let items = gold
        .iter()
        .zip(&answers)
        .map(|(g, a)| Ok((relation(g)?, apply_policy(&labeling::normalize(a), policy))))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(metrics::class_f1(&items, relation(class_)?))
}

#[pyfunction]
fn both_f1(f1_support: Option<f64>, f1_attack: Option<f64>, n_support: usize, n_attack: usize) -> PyResult<f64> {
    metrics::both_f1(f1_support, f1_attack, n_support, n_attack).map_err(err)
}

/// `(dataset, f1_support, f1_attack, n_support, n_attack)`
type ClassScoreRow = (String, Option<f64>, Option<f64>, usize, usize);

/// Summary over per-dataset rows given as
/// `(dataset, f1_support, f1_attack, n_support, n_attack)`.
#[pyfunction]
fn summarize(rows: Vec<ClassScoreRow>) -> PyResult<PySummaryTable> {
    let rows = rows
        .into_iter()
        .map(|(d, s, a, ns, na)| metrics::DatasetScores::from_class_scores(d, s, a, ns, na))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    Ok(PySummaryTable {
        inner: metrics::summarize(rows).map_err(err)?,
    })
}

/// Scores a `records.jsonl` file.
#[pyfunction]
#[pyo3(signature = (path, policy="ignore"))]
fn score_predictions_file(path: PathBuf, policy: &str) -> PyResult<PySummaryTable> {
    let inner = metrics::score_predictions_file(&path, self::policy(policy)?).map_err(err)?;
    Ok(PySummaryTable { inner })
}

/// Runs a config file end to end. The GIL is released while running.
#[pyfunction]
#[pyo3(signature = (config, force=false))]
fn run(py: Python<'_>, config: PathBuf, force: bool) -> PyResult<PySummaryTable> {
    let outcome = py.detach(|| {
        let config = RunConfig::from_path(&config)?;
        runner::run(&config, RunOptions { force })
    });
    Ok(PySummaryTable {
        inner: outcome.map_err(err)?.summary,
    })
}

#[pymodule]
fn rbam(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RbamError", m.py().get_type::<RbamError>())?;
    m.add_class::<PyArgumentPair>()?;
    m.add_class::<PyPromptConfig>()?;
    m.add_class::<PyDatasetScores>()?;
    m.add_class::<PySummaryTable>()?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(compute_stats, m)?)?;
    m.add_function(wrap_pyfunction!(build_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_label, m)?)?;
    m.add_function(wrap_pyfunction!(class_f1, m)?)?;
    m.add_function(wrap_pyfunction!(both_f1, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(score_predictions_file, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
