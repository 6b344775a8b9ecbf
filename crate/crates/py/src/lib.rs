//! Python bindings: trace handling, the point-process predictor, the
//! privacy scheduler, the exponential mechanism and the simulator.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use ppvf_core::cdp;
use ppvf_core::predictor::{self, Gradients};
use ppvf_core::rng::stream;
use ppvf_core::scheduler::{self, CrSuite};
use ppvf_core::sim::{self, Bounds};
use ppvf_core::trace::{self, SkewedTraceConfig};

create_exception!(ppvf, PpvfError, PyException);

fn err(e: ppvf_core::Error) -> PyErr {
    PpvfError::new_err(e.to_string())
}

#[pyclass(name = "ModelParams", module = "ppvf", from_py_object)]
#[derive(Clone)]
pub struct PyModelParams {
    inner: ppvf_core::ModelParams,
}

#[pymethods]
impl PyModelParams {
    /// Every entry of `β`, `p` and `q` set to `value`.
    #[staticmethod]
    #[pyo3(signature = (catalog_size, latent_dim, delta=0.01, value=1.0))]
    fn uniform(catalog_size: usize, latent_dim: usize, delta: f64, value: f64) -> Self {
        Self {
            inner: ppvf_core::ModelParams::uniform(catalog_size, latent_dim, delta, value),
        }
    }

    #[new]
    fn new(beta: Vec<f64>, p: Vec<Vec<f64>>, q: Vec<Vec<f64>>, delta: f64) -> PyResult<Self> {
        let p = predictor::LatentMatrix::from_rows(&p).map_err(err)?;
        let q = predictor::LatentMatrix::from_rows(&q).map_err(err)?;
        Ok(Self {
            inner: ppvf_core::ModelParams::new(beta, p, q, delta).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ppvf_core::ModelParams::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.inner.beta.clone()
    }

    #[getter]
    fn p(&self) -> Vec<Vec<f64>> {
        self.inner.p.to_rows()
    }

    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        self.inner.q.to_rows()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn catalog_size(&self) -> usize {
        self.inner.catalog_size()
    }

    #[getter]
    fn latent_dim(&self) -> usize {
        self.inner.latent_dim()
    }

    fn excitation_radius(&self) -> f64 {
        self.inner.excitation_radius()
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(I={}, D={}, delta={})",
            self.inner.catalog_size(),
            self.inner.latent_dim(),
            self.inner.delta
        )
    }
}

#[pyclass(name = "EventLog", module = "ppvf", from_py_object)]
#[derive(Clone)]
pub struct PyEventLog {
    inner: ppvf_core::EventLog,
}

#[pymethods]
impl PyEventLog {
    /// Build from `(edge_id, user_id, video_id, timestamp)` tuples.
    #[new]
    #[pyo3(signature = (events, catalog_size, edge_count, horizon))]
    fn new(events: Vec<(usize, u64, usize, f64)>, catalog_size: usize, edge_count: usize, horizon: f64) -> PyResult<Self> {
        let events = events
            .into_iter()
            .map(|(e, u, v, t)| ppvf_core::RequestEvent::new(e, u, v, t))
            .collect();
        Ok(Self {
            inner: ppvf_core::EventLog::new(events, catalog_size, edge_count, horizon).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, quantize_hours=1.0))]
    fn load(path: PathBuf, quantize_hours: f64) -> PyResult<Self> {
        Ok(Self {
            inner: trace::load_trace(&path, quantize_hours).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, quantize_hours=1.0))]
    fn parse(text: &str, quantize_hours: f64) -> PyResult<Self> {
        Ok(Self {
            inner: trace::parse_trace(text, std::path::Path::new("<string>"), quantize_hours).map_err(err)?,
        })
    }

    /// Synthetic trace with Zipf-like base rates (see the CLI `gen-trace`).
    #[staticmethod]
    #[pyo3(signature = (catalog_size=500, edges=5, horizon=720.0, base_rate=1.0, branching=0.5, seed=1))]
    fn skewed(catalog_size: usize, edges: usize, horizon: f64, base_rate: f64, branching: f64, seed: u64) -> PyResult<Self> {
        let cfg = SkewedTraceConfig {
            catalog_size,
            edge_count: edges,
            horizon,
            base_rate,
            branching,
            seed,
            ..SkewedTraceConfig::default()
        };
        let spec = cfg.spec().map_err(err)?;
        Ok(Self {
            inner: trace::generate_synthetic(&spec).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn catalog_size(&self) -> usize {
        self.inner.catalog_size()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    fn events(&self) -> Vec<(usize, u64, usize, f64)> {
        self.inner
            .events()
            .iter()
            .map(|e| (e.edge_id, e.user_id, e.video_id, e.timestamp))
            .collect()
    }

    fn partition(&self) -> Vec<PyEventLog> {
        trace::partition_by_edge(&self.inner)
            .into_iter()
            .map(|inner| PyEventLog { inner })
            .collect()
    }

    fn to_trace_string(&self) -> String {
        self.inner.to_trace_string()
    }
}

#[pyclass(name = "KernelState", module = "ppvf")]
pub struct PyKernelState {
    inner: ppvf_core::KernelState,
}

#[pymethods]
impl PyKernelState {
    #[new]
    fn new(params: &PyModelParams) -> Self {
        Self {
            inner: ppvf_core::KernelState::for_params(&params.inner),
        }
    }

    /// Decay to `to_time` and fold in sorted `(video, time)` events.
    #[pyo3(signature = (params, to_time, events=Vec::new()))]
    fn advance(&mut self, params: &PyModelParams, to_time: f64, events: Vec<(usize, f64)>) -> PyResult<()> {
        self.inner.advance(&params.inner, to_time, &events).map_err(err)
    }

    fn intensity(&self, params: &PyModelParams, video: usize) -> f64 {
        self.inner.intensity(&params.inner, video)
    }

    fn intensities(&self, params: &PyModelParams) -> Vec<f64> {
        self.inner.intensities(&params.inner)
    }

    #[getter]
    fn s(&self) -> Vec<f64> {
        self.inner.s().to_vec()
    }

    #[getter]
    fn last_update(&self) -> f64 {
        self.inner.last_update()
    }
}

fn window(t_theta: f64, phi_th: f64, delta: f64) -> PyResult<predictor::TrainWindow> {
    predictor::TrainWindow::new(t_theta, phi_th, delta).map_err(err)
}

/// Truncated-window log-likelihood of one edge's log.
#[pyfunction]
#[pyo3(signature = (params, log, t_theta, phi_th=(-0.48f64).exp()))]
fn window_log_likelihood(params: &PyModelParams, log: &PyEventLog, t_theta: f64, phi_th: f64) -> PyResult<f64> {
    let w = window(t_theta, phi_th, params.inner.delta)?;
    predictor::window_log_likelihood(&params.inner, &log.inner, &w).map_err(err)
}

/// Gradients of the window log-likelihood as `{"beta", "p", "q"}`.
#[pyfunction]
#[pyo3(signature = (params, log, t_theta, phi_th=(-0.48f64).exp()))]
fn window_gradients(
    params: &PyModelParams,
    log: &PyEventLog,
    t_theta: f64,
    phi_th: f64,
) -> PyResult<BTreeMap<&'static str, Vec<Vec<f64>>>> {
    let w = window(t_theta, phi_th, params.inner.delta)?;
    let Gradients { beta, p, q } = predictor::window_gradients(&params.inner, &log.inner, &w).map_err(err)?;
    Ok(BTreeMap::from([
        ("beta", vec![beta]),
        ("p", p.to_rows()),
        ("q", q.to_rows()),
    ]))
}

#[pyfunction]
fn threshold(gamma: f64, lower: f64, upper: f64) -> PyResult<f64> {
    Ok(scheduler::ThresholdConfig::new(lower, upper).map_err(err)?.threshold(gamma))
}

#[pyclass(name = "PrivacyLedger", module = "ppvf")]
pub struct PyPrivacyLedger {
    inner: ppvf_core::PrivacyLedger,
}

#[pymethods]
impl PyPrivacyLedger {
    #[new]
    #[pyo3(signature = (catalog_size, xi=15.0, epsilon=1.0, f=4))]
    fn new(catalog_size: usize, xi: f64, epsilon: f64, f: usize) -> PyResult<Self> {
        Ok(Self {
            inner: ppvf_core::PrivacyLedger::uniform(catalog_size, xi, epsilon, f).map_err(err)?,
        })
    }

    fn gamma(&self, video: usize) -> f64 {
        self.inner.gamma(video)
    }

    fn admissions(&self, video: usize) -> u32 {
        self.inner.admissions(video)
    }

    fn can_afford(&self, video: usize) -> bool {
        self.inner.can_afford(video)
    }

    fn commit(&mut self, video: usize) -> bool {
        self.inner.commit(video)
    }

    fn budget_respected(&self) -> bool {
        self.inner.budget_respected()
    }

    /// Threshold-rule candidate selection; commits admitted videos.
    #[pyo3(signature = (utilities, lower, upper, seed=0))]
    fn select_candidates(&mut self, utilities: Vec<f64>, lower: f64, upper: f64, seed: u64) -> PyResult<Vec<usize>> {
        let cfg = scheduler::ThresholdConfig::new(lower, upper).map_err(err)?;
        let mut rng = stream(seed, "scheduler", 0);
        Ok(scheduler::select_candidates(&utilities, &mut self.inner, &cfg, &mut rng)
            .videos()
            .to_vec())
    }
}

#[pyclass(name = "CorrelationState", module = "ppvf")]
pub struct PyCorrelationState {
    inner: cdp::CorrelationState,
}

#[pymethods]
impl PyCorrelationState {
    #[new]
    fn new(catalog_size: usize) -> Self {
        Self {
            inner: cdp::CorrelationState::new(catalog_size),
        }
    }

    fn update(&mut self, utilities: Vec<f64>) -> PyResult<()> {
        if utilities.len() != self.inner.alpha().len() {
            return Err(PpvfError::new_err("utility vector length differs from the catalog size"));
        }
        self.inner.update(&utilities);
        Ok(())
    }

    fn psi(&self, i: usize, j: usize) -> f64 {
        self.inner.psi(i, j)
    }

    fn correlation_degree(&self, i: usize, j: usize) -> PyResult<f64> {
        self.inner.correlation_degree(i, j).map_err(err)
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps()
    }
}

/// Correlated sensitivity of each candidate.
#[pyfunction]
fn correlated_sensitivities(
    params: &PyModelParams,
    kernel: &PyKernelState,
    corr: &PyCorrelationState,
    candidates: Vec<usize>,
) -> PyResult<Vec<f64>> {
    cdp::correlated_sensitivities(&params.inner, &kernel.inner, &corr.inner, &candidates).map_err(err)
}

#[pyfunction]
fn em_probabilities(utilities: Vec<f64>, eps_step: f64, sensitivity: f64) -> Vec<f64> {
    cdp::em_probabilities(&utilities, eps_step, sensitivity)
}

/// Draw up to `f` candidates without replacement; returns `(chosen, charged)`.
#[pyfunction]
#[pyo3(signature = (candidates, utilities, eps_step, sensitivity, f, seed=0))]
fn em_sample(
    candidates: Vec<usize>,
    utilities: Vec<f64>,
    eps_step: f64,
    sensitivity: f64,
    f: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, f64)> {
    let mut rng = stream(seed, "em", 0);
    let d = cdp::em_sample(&candidates, &utilities, eps_step, sensitivity, f, &mut rng).map_err(err)?;
    Ok((d.chosen, d.charged))
}

#[pyfunction]
fn dp_ratio_check(utilities: Vec<f64>, adjacent: Vec<f64>, eps_step: f64, sensitivity: f64) -> PyResult<f64> {
    cdp::dp_ratio_check(&utilities, &adjacent, eps_step, sensitivity).map_err(err)
}

/// Empirical competitive ratio of the threshold rule; returns a dict with
/// `worst_ratio`, `bound`, `limit` and `passed`.
#[pyfunction]
#[pyo3(signature = (seed=1, instances=200, ratio_spread=50.0))]
fn empirical_cr(py: Python<'_>, seed: u64, instances: usize, ratio_spread: f64) -> PyResult<Py<PyAny>> {
    let suite = CrSuite {
        instances,
        ratio_spread,
        ..CrSuite::default()
    };
    let report = py
        .detach(|| {
            let inst = suite.generate(seed)?;
            scheduler::empirical_cr(&inst, seed, suite.slack)
        })
        .map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("worst_ratio", report.worst_ratio)?;
    d.set_item("bound", report.bound)?;
    d.set_item("limit", report.limit())?;
    d.set_item("passed", report.passed())?;
    Ok(d.into_any().unbind())
}

/// Run the simulator; returns `{policy: {"chr", "mean_js", "requests",
/// "hits"}}`.
#[pyfunction]
#[pyo3(signature = (log, policies=None, seed=1, xi=15.0, epsilon=1.0, f=4, c=0.01, init_horizon=240.0, test_horizon=720.0, latent_dim=10, bounds=None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    log: &PyEventLog,
    policies: Option<Vec<String>>,
    seed: u64,
    xi: f64,
    epsilon: f64,
    f: usize,
    c: f64,
    init_horizon: f64,
    test_horizon: f64,
    latent_dim: usize,
    bounds: Option<(f64, f64)>,
) -> PyResult<Py<PyAny>> {
    let policies = match policies {
        Some(names) => names
            .iter()
            .map(|n| n.parse::<ppvf_core::Policy>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?,
        None => ppvf_core::Policy::ALL.to_vec(),
    };
    let bounds = match bounds {
        Some((l, u)) => Bounds::Fixed(scheduler::ThresholdConfig::new(l, u).map_err(err)?),
        None => Bounds::Auto,
    };
    let cfg = ppvf_core::SimConfig {
        policies,
        seed,
        xi,
        epsilon,
        f,
        capacity_fraction: c,
        init_horizon,
        test_horizon,
        latent_dim,
        bounds,
        ..ppvf_core::SimConfig::default()
    };
    let log = log.inner.clone();
    let report = py.detach(|| sim::run_simulation(&cfg, &log)).map_err(err)?;
    let out = pyo3::types::PyDict::new(py);
    for r in &report.policies {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("chr", r.chr)?;
        d.set_item("mean_js", r.mean_js)?;
        d.set_item("requests", r.requests)?;
        d.set_item("hits", r.hits)?;
        out.set_item(r.policy.name(), d)?;
    }
    Ok(out.into_any().unbind())
}

#[pymodule]
#[pyo3(name = "ppvf")]
pub fn ppvf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PpvfError", m.py().get_type::<PpvfError>())?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyEventLog>()?;
    m.add_class::<PyKernelState>()?;
    m.add_class::<PyPrivacyLedger>()?;
    m.add_class::<PyCorrelationState>()?;
    m.add_function(wrap_pyfunction!(window_log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(window_gradients, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(correlated_sensitivities, m)?)?;
    m.add_function(wrap_pyfunction!(em_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(em_sample, m)?)?;
    m.add_function(wrap_pyfunction!(dp_ratio_check, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_cr, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
