//! Python bindings. Random functions take an integer `seed` and draw from
//! the same replica stream the experiment runner would use for
//! `(seed, 0)`; stateful objects keep their own stream.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use crt_subaging::cli_harness::{self, derive_stream, ExperimentConfig, Stream};
use crt_subaging::crt_limit;
use crt_subaging::frag_coag_chain::{observation_index, MarkChainState};
use crt_subaging::random_trees;
use crt_subaging::stats::{self, EmpiricalSample};
use crt_subaging::{urn_model, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rng(seed: u64) -> Stream {
    derive_stream(seed, 0)
}

#[pyclass(name = "LabeledTree", module = "crt_subaging", frozen, from_py_object)]
#[derive(Clone)]
struct PyLabeledTree {
    inner: random_trees::LabeledTree,
}

#[pymethods]
impl PyLabeledTree {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        random_trees::LabeledTree::new(n, edges).map(|inner| Self { inner }).map_err(py_err)
    }

    /// Parses the `n` / `u v` dump format.
    #[staticmethod]
    fn from_dump(text: &str) -> PyResult<Self> {
        text.parse().map(|inner| Self { inner }).map_err(py_err)
    }

    fn dump(&self) -> String {
        self.inner.to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn prufer(&self) -> PyResult<Vec<usize>> {
        random_trees::prufer_encode(&self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("LabeledTree(n={}, edges={:?})", self.inner.vertex_count(), self.inner.edges())
    }
}

#[pyclass(name = "ReducedTree", module = "crt_subaging", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReducedTree {
    inner: random_trees::ReducedTree,
}

#[pymethods]
impl PyReducedTree {
    #[getter]
    fn leaf_count(&self) -> usize {
        self.inner.leaf_count()
    }

    /// Node `k < leaf_count` is label `k + 1`; higher nodes are branch points.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths().to_vec()
    }

    fn total_length(&self) -> f64 {
        self.inner.total_length()
    }

    fn is_binary(&self) -> bool {
        self.inner.is_binary()
    }

    fn distance(&self, a: usize, b: usize) -> PyResult<f64> {
        self.inner.distance(a, b).map_err(py_err)
    }

    /// Leaf partition induced by Poisson marks of intensity `r`.
    fn mark_partition(&self, r: f64, seed: u64) -> PyResult<Vec<Vec<usize>>> {
        let mut g = rng(seed);
        let marks = crt_limit::init_marks(&self.inner, r, &mut g).map_err(py_err)?;
        let p = crt_limit::partition_from_marks(&self.inner, &marks).map_err(py_err)?;
        Ok(p.blocks().to_vec())
    }
}

/// One replica of the mark/unmark chain with its own random stream.
#[pyclass(name = "MarkChain", module = "crt_subaging")]
struct PyMarkChain {
    state: MarkChainState,
    rng: Stream,
}

#[pymethods]
impl PyMarkChain {
    #[new]
    fn new(tree: &PyLabeledTree, seed: u64) -> Self {
        Self { state: MarkChainState::new(tree.inner.clone()), rng: rng(seed) }
    }

    fn step(&mut self) {
        self.state.step(&mut self.rng);
    }

    fn run_until(&mut self, k: u64) -> PyResult<()> {
        self.state.run_until(k, &mut self.rng).map_err(py_err)
    }

    #[getter]
    fn k(&self) -> u64 {
        self.state.step_count()
    }

    #[getter]
    fn mark_count(&self) -> usize {
        self.state.mark_count()
    }

    fn ranked_masses(&self) -> Vec<f64> {
        self.state.forest().ranked_masses().into_vec()
    }

    fn same_component(&self, u: usize, v: usize) -> PyResult<bool> {
        self.state.forest().same_component(u, v).map_err(py_err)
    }

    /// `(k, masses, mark_count, pair_flags)`.
    fn observe(&self, pairs: Vec<(usize, usize)>) -> PyResult<(u64, Vec<f64>, usize, Vec<bool>)> {
        let obs = self.state.observe(&pairs).map_err(py_err)?;
        Ok((obs.k, obs.masses.into_vec(), obs.mark_count, obs.pair_flags))
    }
}

#[pyfunction]
fn prufer_decode(seq: Vec<usize>, n: usize) -> PyResult<PyLabeledTree> {
    random_trees::prufer_decode(&seq, n).map(|inner| PyLabeledTree { inner }).map_err(py_err)
}

#[pyfunction]
fn sample_uniform_tree(n: usize, seed: u64) -> PyResult<PyLabeledTree> {
    random_trees::sample_uniform_tree(n, &mut rng(seed))
        .map(|inner| PyLabeledTree { inner })
        .map_err(py_err)
}

#[pyfunction]
fn reduce_to_vertices(tree: &PyLabeledTree, i: usize) -> PyResult<PyReducedTree> {
    random_trees::reduce_to_vertices(&tree.inner, i).map(|inner| PyReducedTree { inner }).map_err(py_err)
}

#[pyfunction]
fn sample_reduced_tree(i: usize, seed: u64) -> PyResult<PyReducedTree> {
    crt_limit::sample_reduced_tree(i, &mut rng(seed)).map(|inner| PyReducedTree { inner }).map_err(py_err)
}

#[pyfunction]
fn observation_step(n: usize, t: f64, s: f64) -> PyResult<u64> {
    observation_index(n, t, s).map_err(py_err)
}

#[pyfunction]
fn sample_reflected_bm(t: f64, seed: u64) -> PyResult<f64> {
    crt_limit::sample_reflected_bm(t, &mut rng(seed)).map_err(py_err)
}

#[pyfunction]
fn sample_block_sizes(leaves: usize, r: f64, seed: u64) -> PyResult<Vec<usize>> {
    crt_limit::sample_block_sizes(leaves, r, &mut rng(seed)).map_err(py_err)
}

#[pyfunction]
fn pair_joint_survival(r: f64, length: f64, delta: f64) -> PyResult<f64> {
    crt_limit::pair_joint_survival(r, length, delta).map_err(py_err)
}

#[pyfunction]
fn mixed_pair_prob(t: f64, delta: f64) -> PyResult<f64> {
    crt_limit::mixed_pair_prob(t, delta).map_err(py_err)
}

#[pyfunction]
fn mixed_survival(t: f64, s: f64) -> PyResult<f64> {
    crt_limit::mixed_survival(t, s).map_err(py_err)
}

/// Window is 1-based and inclusive.
#[pyfunction]
fn estimate_r(masses: Vec<f64>, lo: usize, hi: usize) -> PyResult<f64> {
    crt_limit::estimate_r(&masses, lo..=hi).map_err(py_err)
}

#[pyfunction]
fn urn_count_at(n: usize, t: f64, seed: u64) -> PyResult<usize> {
    urn_model::urn_count_at(n, t, &mut rng(seed)).map_err(py_err)
}

/// `(count, fraction, b_empty)`.
#[pyfunction]
fn urn_turnover(n: usize, t: f64, s: f64, seed: u64) -> PyResult<(usize, f64, bool)> {
    let out = urn_model::urn_turnover(n, t, s, &mut rng(seed)).map_err(py_err)?;
    Ok((out.count, out.fraction, out.b_empty))
}

fn empirical(values: Vec<f64>) -> PyResult<EmpiricalSample> {
    EmpiricalSample::new(values).map_err(py_err)
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    Ok(stats::ks_two_sample(&empirical(a)?, &empirical(b)?))
}

#[pyfunction]
fn ks_vs_half_normal(a: Vec<f64>, t: f64) -> PyResult<f64> {
    stats::half_normal_cdf(0.0, t).map_err(py_err)?;
    Ok(stats::ks_vs_cdf(&empirical(a)?, |x| stats::half_normal_cdf(x, t).unwrap_or(f64::NAN)))
}

#[pyfunction]
fn wasserstein1(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    Ok(stats::wasserstein1(&empirical(a)?, &empirical(b)?))
}

#[pyfunction]
fn half_normal_cdf(x: f64, t: f64) -> PyResult<f64> {
    stats::half_normal_cdf(x, t).map_err(py_err)
}

/// Runs an experiment from `key -> value` strings (the config-file keys)
/// and returns `(passed, summary_json)`. Nothing is written unless
/// `write` is true.
#[pyfunction]
#[pyo3(signature = (options, write = false))]
fn run_experiment(py: Python<'_>, options: Vec<(String, String)>, write: bool) -> PyResult<(bool, String)> {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in &options {
        cfg.set(k, v).map_err(py_err)?;
    }
    let report = py
        .detach(|| if write { cli_harness::run_experiment(&cfg) } else { cli_harness::simulate(&cfg) })
        .map_err(py_err)?;
    Ok((report.passed, report.to_json()))
}

#[pymodule]
#[pyo3(name = "crt_subaging")]
fn crt_subaging_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", cli_harness::VERSION)?;
    m.add_class::<PyLabeledTree>()?;
    m.add_class::<PyReducedTree>()?;
    m.add_class::<PyMarkChain>()?;
    m.add_function(wrap_pyfunction!(prufer_decode, m)?)?;
    m.add_function(wrap_pyfunction!(sample_uniform_tree, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_vertices, m)?)?;
    m.add_function(wrap_pyfunction!(sample_reduced_tree, m)?)?;
    m.add_function(wrap_pyfunction!(observation_step, m)?)?;
    m.add_function(wrap_pyfunction!(sample_reflected_bm, m)?)?;
    m.add_function(wrap_pyfunction!(sample_block_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(pair_joint_survival, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_pair_prob, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_survival, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_r, m)?)?;
    m.add_function(wrap_pyfunction!(urn_count_at, m)?)?;
    m.add_function(wrap_pyfunction!(urn_turnover, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(ks_vs_half_normal, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    m.add_function(wrap_pyfunction!(half_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
