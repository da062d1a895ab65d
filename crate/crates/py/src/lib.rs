//! Python bindings: density maps, dot annotations, Sinkhorn, the losses with
//! their gradients, smoothing, metrics and the toy descent.
//!
//! Maps cross the boundary as flat row-major lists; gradients come back the
//! same way. Invalid arguments raise `ValueError`, file errors `OSError` and
//! numerical failures `ArithmeticError`.

use std::fs::File;

use dmcount_core as core;
use dmcount_core::descent::{ComparePlan, DescentConfig, LossKind, ToyResult};
use dmcount_core::smoothing::KernelSpec;
use dmcount_core::{BayesianConfig, DmCountConfig, GridCost, LossEval, PixelNorm, SinkhornConfig};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    use core::Error as E;
    match e {
        E::Io(_) => PyOSError::new_err(e.to_string()),
        E::NonFinite { .. } | E::ZeroMass { .. } | E::MassMismatch { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn open(path: &str) -> PyResult<File> {
    File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))
}

/// Non-negative row-major density map.
#[pyclass(name = "DensityMap", module = "dmcount", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMap(core::DensityMap);

#[pymethods]
impl PyDensityMap {
    #[new]
    fn new(rows: usize, cols: usize, values: Vec<f64>) -> PyResult<Self> {
        core::DensityMap::new(rows, cols, values).map(Self).map_err(err)
    }

    #[staticmethod]
    fn zeros(rows: usize, cols: usize) -> PyResult<Self> {
        core::DensityMap::zeros(rows, cols).map(Self).map_err(err)
    }

    /// Builds a map from a list of equal-length rows.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PyValueError::new_err("rows have different lengths"));
        }
        let n = rows.len();
        core::DensityMap::new(n, cols, rows.concat()).map(Self).map_err(err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        core::io::read_density(open(path)?).map(Self).map_err(err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        core::io::write_density(f, &self.0).map_err(err)
    }

    #[getter]
    fn rows(&self) -> usize {
        self.0.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.0.cols()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.values().chunks(self.0.cols()).map(<[f64]>::to_vec).collect()
    }

    fn get(&self, row: usize, col: usize) -> PyResult<f64> {
        if row >= self.0.rows() || col >= self.0.cols() {
            return Err(PyValueError::new_err(format!("({row}, {col}) is outside the grid")));
        }
        Ok(self.0.get(row, col))
    }

    fn total_mass(&self) -> f64 {
        self.0.total_mass()
    }

    fn max_value(&self) -> f64 {
        self.0.max_value()
    }

    fn normalize(&self) -> Self {
        Self(self.0.normalize())
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        self.0.scaled(factor).map(Self).map_err(err)
    }

    fn l1_distance(&self, other: &Self) -> PyResult<f64> {
        self.0.l1_distance(&other.0).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMap(rows={}, cols={}, mass={:?})",
            self.0.rows(),
            self.0.cols(),
            self.0.total_mass()
        )
    }
}

/// Dot annotation: continuous `(row, col)` points on a grid.
#[pyclass(name = "DotAnnotation", module = "dmcount", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDotAnnotation(core::DotAnnotation);

#[pymethods]
impl PyDotAnnotation {
    #[new]
    fn new(rows: usize, cols: usize, points: Vec<(f64, f64)>) -> PyResult<Self> {
        core::DotAnnotation::new(rows, cols, points).map(Self).map_err(err)
    }

    /// Reads a `row,col` CSV onto a `rows x cols` grid.
    #[staticmethod]
    fn read(path: &str, rows: usize, cols: usize) -> PyResult<Self> {
        core::io::read_annotation(open(path)?, rows, cols).map(Self).map_err(err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.0.points().to_vec()
    }

    /// One unit of mass per dot at its nearest pixel.
    fn rasterize(&self) -> PyDensityMap {
        PyDensityMap(self.0.rasterize())
    }

    fn perturb(&self, max_fraction: f64, seed: u64) -> PyResult<Self> {
        self.0.perturb(max_fraction, seed).map(Self).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let (r, c) = self.0.shape();
        format!("DotAnnotation(rows={r}, cols={c}, dots={})", self.0.len())
    }
}

fn dm_config(lambda1: f64, lambda2: f64, reg: f64, sinkhorn_iters: usize, sinkhorn_tol: f64, cost_scale: f64) -> DmCountConfig {
    DmCountConfig {
        lambda1,
        lambda2,
        sinkhorn: SinkhornConfig {
            reg,
            max_iters: sinkhorn_iters,
            tolerance: sinkhorn_tol,
        },
        cost_scale,
    }
}

fn pair(e: LossEval) -> (f64, Vec<f64>) {
    (e.value, e.grad)
}

/// Entropic OT between two probability maps. Returns a dict with `value`,
/// `alpha`, `beta`, `iterations_run` and `marginal_error`.
#[pyfunction]
#[pyo3(signature = (mu, nu, reg = 10.0, max_iters = 100, tolerance = 1e-9, cost_scale = 1.0))]
fn sinkhorn<'py>(
    py: Python<'py>,
    mu: &PyDensityMap,
    nu: &PyDensityMap,
    reg: f64,
    max_iters: usize,
    tolerance: f64,
    cost_scale: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (rows, cols) = mu.0.shape();
    let cost = GridCost::with_scale(rows, cols, cost_scale).map_err(err)?;
    let cfg = SinkhornConfig::new(reg, max_iters, tolerance).map_err(err)?;
    let sol = py
        .detach(|| core::ot::sinkhorn(&mu.0, &nu.0, &cost, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", sol.value)?;
    d.set_item("alpha", sol.duals.alpha)?;
    d.set_item("beta", sol.duals.beta)?;
    d.set_item("iterations_run", sol.iterations_run)?;
    d.set_item("marginal_error", sol.marginal_error)?;
    Ok(d)
}

/// `|‖z‖₁ − ‖ẑ‖₁|` and its gradient.
#[pyfunction]
fn count_loss(z: &PyDensityMap, zhat: &PyDensityMap) -> PyResult<(f64, Vec<f64>)> {
    core::losses::count_loss(&z.0, &zhat.0).map(pair).map_err(err)
}

/// OT term between the normalized maps and its gradient.
#[pyfunction]
#[pyo3(signature = (z, zhat, reg = 10.0, sinkhorn_iters = 100, sinkhorn_tol = 1e-9, cost_scale = 1.0))]
fn ot_loss(
    py: Python<'_>,
    z: &PyDensityMap,
    zhat: &PyDensityMap,
    reg: f64,
    sinkhorn_iters: usize,
    sinkhorn_tol: f64,
    cost_scale: f64,
) -> PyResult<(f64, Vec<f64>)> {
    let cfg = dm_config(0.0, 0.0, reg, sinkhorn_iters, sinkhorn_tol, cost_scale);
    py.detach(|| core::losses::ot_loss(&z.0, &zhat.0, &cfg)).map(pair).map_err(err)
}

/// Total variation between the normalized maps and its subgradient.
#[pyfunction]
fn tv_loss(z: &PyDensityMap, zhat: &PyDensityMap) -> PyResult<(f64, Vec<f64>)> {
    core::losses::tv_loss(&z.0, &zhat.0).map(pair).map_err(err)
}

/// Count + λ₁·OT + λ₂·‖z‖₁·TV and its gradient.
#[pyfunction]
#[pyo3(signature = (
    z, zhat, lambda1 = 0.1, lambda2 = 0.01, reg = 10.0,
    sinkhorn_iters = 100, sinkhorn_tol = 1e-9, cost_scale = 1.0
))]
#[allow(clippy::too_many_arguments)]
fn dm_count_loss(
    py: Python<'_>,
    z: &PyDensityMap,
    zhat: &PyDensityMap,
    lambda1: f64,
    lambda2: f64,
    reg: f64,
    sinkhorn_iters: usize,
    sinkhorn_tol: f64,
    cost_scale: f64,
) -> PyResult<(f64, Vec<f64>)> {
    let cfg = dm_config(lambda1, lambda2, reg, sinkhorn_iters, sinkhorn_tol, cost_scale);
    py.detach(|| core::losses::dm_count_loss(&z.0, &zhat.0, &cfg))
        .map(pair)
        .map_err(err)
}

fn pixel_norm(norm: &str) -> PyResult<PixelNorm> {
    match norm {
        "l1" => Ok(PixelNorm::L1),
        "l2" => Ok(PixelNorm::L2),
        other => Err(PyValueError::new_err(format!("norm must be 'l1' or 'l2', got {other:?}"))),
    }
}

/// Pixel-wise L1 or L2 error against a target map and its gradient.
#[pyfunction]
#[pyo3(signature = (target, zhat, norm = "l2"))]
fn pixelwise_loss(target: &PyDensityMap, zhat: &PyDensityMap, norm: &str) -> PyResult<(f64, Vec<f64>)> {
    core::losses::pixelwise_loss(&target.0, &zhat.0, pixel_norm(norm)?)
        .map(pair)
        .map_err(err)
}

/// Bayesian expected-count loss against a dot annotation and its gradient.
#[pyfunction]
#[pyo3(signature = (annotation, zhat, sigma = 8.0))]
fn bayesian_loss(annotation: &PyDotAnnotation, zhat: &PyDensityMap, sigma: f64) -> PyResult<(f64, Vec<f64>)> {
    core::losses::bayesian_loss(&annotation.0, &zhat.0, &BayesianConfig { sigma })
        .map(pair)
        .map_err(err)
}

/// Gaussian pseudo ground truth with one fixed width.
#[pyfunction]
#[pyo3(signature = (annotation, sigma = 4.0))]
fn smooth_fixed(annotation: &PyDotAnnotation, sigma: f64) -> PyResult<PyDensityMap> {
    let spec = KernelSpec::new(sigma).map_err(err)?;
    core::smoothing::smooth_fixed(&annotation.0, &spec)
        .map(PyDensityMap)
        .map_err(err)
}

/// Gaussian pseudo ground truth with k-nearest-neighbour widths.
#[pyfunction]
#[pyo3(signature = (annotation, k = 3, beta = 0.3))]
fn smooth_adaptive(annotation: &PyDotAnnotation, k: usize, beta: f64) -> PyResult<PyDensityMap> {
    core::smoothing::smooth_adaptive(&annotation.0, k, beta)
        .map(PyDensityMap)
        .map_err(err)
}

/// MAE, RMSE and NAE over `(truth, predicted)` pairs. `nae` is `None` when
/// every truth is zero.
#[pyfunction]
fn count_metrics<'py>(py: Python<'py>, pairs: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let pairs = pairs
        .into_iter()
        .map(|(t, p)| core::metrics::CountPair::new(t, p))
        .collect::<core::Result<Vec<_>>>()
        .map_err(err)?;
    let m = core::metrics::count_metrics(&pairs).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mae", m.mae)?;
    d.set_item("rmse", m.rmse)?;
    d.set_item("nae", m.nae)?;
    d.set_item("nae_excluded", m.nae_excluded)?;
    Ok(d)
}

#[pyfunction]
fn psnr(a: &PyDensityMap, b: &PyDensityMap) -> PyResult<f64> {
    core::metrics::psnr(&a.0, &b.0).map_err(err)
}

#[pyfunction]
fn ssim(a: &PyDensityMap, b: &PyDensityMap) -> PyResult<f64> {
    core::metrics::ssim(&a.0, &b.0).map_err(err)
}

/// Seeded synthetic dot annotation.
#[pyfunction]
fn synth_target(rows: usize, cols: usize, n_dots: usize, seed: u64) -> PyResult<PyDotAnnotation> {
    core::descent::synth_target(rows, cols, n_dots, seed)
        .map(PyDotAnnotation)
        .map_err(err)
}

/// Seeded initial map shared by every descent run.
#[pyfunction]
fn init_source(rows: usize, cols: usize, seed: u64) -> PyResult<PyDensityMap> {
    core::descent::init_source(rows, cols, seed)
        .map(PyDensityMap)
        .map_err(err)
}

fn toy_dict<'py>(py: Python<'py>, r: ToyResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("loss", r.loss)?;
    d.set_item("count_error", r.count_error())?;
    d.set_item("final_count", r.final_count)?;
    d.set_item("target_count", r.target_count)?;
    d.set_item("final_loss", r.final_loss)?;
    d.set_item("loss_trace", r.loss_trace)?;
    d.set_item("psnr", r.psnr)?;
    d.set_item("ssim", r.ssim)?;
    d.set_item("iterations_run", r.iterations_run)?;
    d.set_item("final_map", PyDensityMap(r.final_map))?;
    Ok(d)
}

/// Descent settings shared by `descend` and `compare_losses`.
#[pyclass(name = "DescentSettings", module = "dmcount", frozen, from_py_object)]
#[derive(Clone)]
struct PySettings {
    base: DescentConfig,
    pixel_sigma: f64,
    bayesian: BayesianConfig,
    dm_count: DmCountConfig,
}

#[pymethods]
impl PySettings {
    #[new]
    #[pyo3(signature = (
        eta = 1e-5, max_iters = 200_000, stop_tol = 1e-9, window = 100, seed = 0,
        pixel_sigma = 8.0, bayes_sigma = 8.0, lambda1 = 0.1, lambda2 = 0.01,
        reg = 10.0, sinkhorn_iters = 100, sinkhorn_tol = 1e-9, cost_scale = 1.0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        eta: f64,
        max_iters: usize,
        stop_tol: f64,
        window: usize,
        seed: u64,
        pixel_sigma: f64,
        bayes_sigma: f64,
        lambda1: f64,
        lambda2: f64,
        reg: f64,
        sinkhorn_iters: usize,
        sinkhorn_tol: f64,
        cost_scale: f64,
    ) -> Self {
        Self {
            base: DescentConfig {
                eta,
                max_iters,
                stop_tol,
                window,
                seed,
                ..DescentConfig::default()
            },
            pixel_sigma,
            bayesian: BayesianConfig { sigma: bayes_sigma },
            dm_count: dm_config(lambda1, lambda2, reg, sinkhorn_iters, sinkhorn_tol, cost_scale),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "DescentSettings(eta={:?}, max_iters={}, window={}, seed={})",
            self.base.eta, self.base.max_iters, self.base.window, self.base.seed
        )
    }
}

impl PySettings {
    fn from_plan(p: ComparePlan) -> Self {
        Self {
            base: p.base,
            pixel_sigma: p.pixel_sigma,
            bayesian: p.bayesian,
            dm_count: p.dm_count,
        }
    }

    fn plan(&self) -> ComparePlan {
        ComparePlan {
            base: self.base,
            pixel_sigma: self.pixel_sigma,
            bayesian: self.bayesian,
            dm_count: self.dm_count,
        }
    }
}

/// Projected gradient descent from the seeded initial map under one loss:
/// `pixelwise_l2`, `pixelwise_l1`, `bayesian` or `dm_count`.
#[pyfunction]
#[pyo3(signature = (target, loss = "dm_count", settings = None))]
fn descend<'py>(
    py: Python<'py>,
    target: &PyDotAnnotation,
    loss: &str,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = settings.unwrap_or_else(|| PySettings::from_plan(ComparePlan::default()));
    let kind = match loss {
        "pixelwise_l2" => LossKind::PixelwiseL2 { sigma: s.pixel_sigma },
        "pixelwise_l1" => LossKind::PixelwiseL1 { sigma: s.pixel_sigma },
        "bayesian" => LossKind::Bayesian(s.bayesian),
        "dm_count" => LossKind::DmCount(s.dm_count),
        other => return Err(PyValueError::new_err(format!("unknown loss {other:?}"))),
    };
    let cfg = DescentConfig { loss: kind, ..s.base };
    let r = py.detach(|| core::descent::descend(&target.0, &cfg)).map_err(err)?;
    toy_dict(py, r)
}

/// Runs the pixel-wise, Bayesian and DM-Count descents from one shared
/// initial map. Returns `runs`, `skipped` (loss to reason) and `ranking`
/// (metric to losses, best first).
#[pyfunction]
#[pyo3(signature = (target, settings = None))]
fn compare_losses<'py>(
    py: Python<'py>,
    target: &PyDotAnnotation,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyDict>> {
    let plan = settings.map_or_else(ComparePlan::default, |s| s.plan());
    let cmp = py.detach(|| core::descent::compare_losses(&target.0, &plan)).map_err(err)?;
    let ranking = PyDict::new(py);
    for r in cmp.ranking() {
        ranking.set_item(r.metric, r.order)?;
    }
    let skipped = PyDict::new(py);
    for s in &cmp.skipped {
        skipped.set_item(s.loss, &s.reason)?;
    }
    let runs = cmp
        .runs
        .into_iter()
        .map(|r| toy_dict(py, r))
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("runs", runs)?;
    d.set_item("skipped", skipped)?;
    d.set_item("ranking", ranking)?;
    Ok(d)
}

#[pymodule]
fn dmcount(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMap>()?;
    m.add_class::<PyDotAnnotation>()?;
    m.add_class::<PySettings>()?;
    m.add("EPS_MACH", core::EPS_MACH)?;
    m.add_function(wrap_pyfunction!(sinkhorn, m)?)?;
    m.add_function(wrap_pyfunction!(count_loss, m)?)?;
    m.add_function(wrap_pyfunction!(ot_loss, m)?)?;
    m.add_function(wrap_pyfunction!(tv_loss, m)?)?;
    m.add_function(wrap_pyfunction!(dm_count_loss, m)?)?;
    m.add_function(wrap_pyfunction!(pixelwise_loss, m)?)?;
    m.add_function(wrap_pyfunction!(bayesian_loss, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_fixed, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_adaptive, m)?)?;
    m.add_function(wrap_pyfunction!(count_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(synth_target, m)?)?;
    m.add_function(wrap_pyfunction!(init_source, m)?)?;
    m.add_function(wrap_pyfunction!(descend, m)?)?;
    m.add_function(wrap_pyfunction!(compare_losses, m)?)?;
    Ok(())
}
