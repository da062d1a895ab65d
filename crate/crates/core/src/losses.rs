//! Training losses with analytic gradients with respect to the predicted map ẑ.
//!
//! Every loss returns a [`LossEval`]: the scalar value and `∂loss/∂ẑ` laid out
//! like the prediction (row-major). Subgradients use `sign(0) = 0`.

use crate::error::{Error, Result};
use crate::grid::{ensure_same_extent, DensityMap, DotAnnotation, EPS_MACH};
use crate::ot::{self, GridCost, OtSolution, SinkhornConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub value: f64,
    /// `∂loss/∂ẑ`, same extent as ẑ; entries may be negative.
    pub grad: Vec<f64>,
}

impl LossEval {
    fn constant(value: f64, n: usize, g: f64) -> Self {
        Self {
            value,
            grad: vec![g; n],
        }
    }

    /// `self + weight·other`, value and gradient alike.
    fn add_scaled(&mut self, other: &LossEval, weight: f64) {
        self.value += weight * other.value;
        for (g, o) in self.grad.iter_mut().zip(&other.grad) {
            *g += weight * o;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmCountConfig {
    /// Weight of the OT term.
    pub lambda1: f64,
    /// Weight of the count-scaled TV term.
    pub lambda2: f64,
    pub sinkhorn: SinkhornConfig,
    /// Multiplier on squared pixel distances in the transport cost.
    pub cost_scale: f64,
}

impl Default for DmCountConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 0.01,
            sinkhorn: SinkhornConfig::default(),
            cost_scale: 1.0,
        }
    }
}

impl DmCountConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(Error::invalid("lambda1", format!("{} must be >= 0", self.lambda1)));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::invalid("lambda2", format!("{} must be >= 0", self.lambda2)));
        }
        self.sinkhorn.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesianConfig {
    /// Width of the per-dot Gaussian likelihood, in pixels.
    pub sigma: f64,
}

impl Default for BayesianConfig {
    fn default() -> Self {
        Self { sigma: 8.0 }
    }
}

impl BayesianConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{} must be > 0", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelNorm {
    L1,
    L2,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nonzero_mass(m: &DensityMap, which: &'static str) -> Result<f64> {
    let s = m.total_mass();
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::ZeroMass { which })
    }
}

/// Gradient of `⟨w, ẑ/(‖ẑ‖₁ + ε)⟩` with `w` held fixed:
/// `w/s − ⟨w, ẑ⟩/s²` with `s = ‖ẑ‖₁ + ε`, the scalar broadcast to every pixel.
fn normalized_pullback(w: &[f64], zhat: &DensityMap) -> Vec<f64> {
    let s = zhat.total_mass() + EPS_MACH;
    let shift = dot(w, zhat.values()) / (s * s);
    w.iter().map(|wi| wi / s - shift).collect()
}

/// Counting loss `|‖z‖₁ − ‖ẑ‖₁|`.
pub fn count_loss(z: &DensityMap, zhat: &DensityMap) -> Result<LossEval> {
    ensure_same_extent(z.shape(), zhat.shape())?;
    let diff = zhat.total_mass() - z.total_mass();
    Ok(LossEval::constant(diff.abs(), zhat.len(), sign(diff)))
}

/// OT loss between the normalized maps together with the Sinkhorn solution
/// it was computed from.
pub fn ot_loss_with_solution(
    z: &DensityMap,
    zhat: &DensityMap,
    cfg: &DmCountConfig,
) -> Result<(LossEval, OtSolution)> {
    ensure_same_extent(z.shape(), zhat.shape())?;
    cfg.validate()?;
    nonzero_mass(z, "target")?;
    nonzero_mass(zhat, "prediction")?;
    let cost = GridCost::with_scale(z.rows(), z.cols(), cfg.cost_scale)?;
    let mu = z.normalize();
    let nu = zhat.normalize();
    let sol = ot::sinkhorn(&mu, &nu, &cost, &cfg.sinkhorn)?;
    let beta = &sol.duals.beta;
    let value = dot(&sol.duals.alpha, mu.values()) + dot(beta, nu.values());
    let grad = normalized_pullback(beta, zhat);
    Ok((LossEval { value, grad }, sol))
}

/// OT loss `⟨α*, z/‖z‖₁⟩ + ⟨β*, ẑ/‖ẑ‖₁⟩`. The duals are treated as constants
/// in the gradient.
pub fn ot_loss(z: &DensityMap, zhat: &DensityMap, cfg: &DmCountConfig) -> Result<LossEval> {
    ot_loss_with_solution(z, zhat, cfg).map(|(eval, _)| eval)
}

/// Total variation distance `½‖z/‖z‖₁ − ẑ/‖ẑ‖₁‖₁`.
pub fn tv_loss(z: &DensityMap, zhat: &DensityMap) -> Result<LossEval> {
    ensure_same_extent(z.shape(), zhat.shape())?;
    nonzero_mass(z, "target")?;
    nonzero_mass(zhat, "prediction")?;
    let mu = z.normalize();
    let nu = zhat.normalize();
    let signs: Vec<f64> = mu
        .values()
        .iter()
        .zip(nu.values())
        .map(|(a, b)| sign(a - b))
        .collect();
    let value = 0.5
        * mu.values()
            .iter()
            .zip(nu.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    let grad = normalized_pullback(&signs, zhat)
        .into_iter()
        .map(|g| -0.5 * g)
        .collect();
    Ok(LossEval { value, grad })
}

/// The full objective `ℓ_C + λ₁·ℓ_OT + λ₂·‖z‖₁·ℓ_TV`.
pub fn dm_count_loss(z: &DensityMap, zhat: &DensityMap, cfg: &DmCountConfig) -> Result<LossEval> {
    let mut total = count_loss(z, zhat)?;
    if cfg.lambda1 > 0.0 {
        total.add_scaled(&ot_loss(z, zhat, cfg)?, cfg.lambda1);
    }
    if cfg.lambda2 > 0.0 {
        total.add_scaled(&tv_loss(z, zhat)?, cfg.lambda2 * z.total_mass());
    }
    Ok(total)
}

/// Pixel-wise baseline against a (smoothed) target `t`: squared error summed
/// over pixels, or the L₁ distance.
pub fn pixelwise_loss(t: &DensityMap, zhat: &DensityMap, norm: PixelNorm) -> Result<LossEval> {
    ensure_same_extent(t.shape(), zhat.shape())?;
    let pairs = t.values().iter().zip(zhat.values());
    Ok(match norm {
        PixelNorm::L2 => {
            let value = pairs.clone().map(|(a, b)| (a - b) * (a - b)).sum();
            let grad = pairs.map(|(a, b)| 2.0 * (b - a)).collect();
            LossEval { value, grad }
        }
        PixelNorm::L1 => {
            let value = pairs.clone().map(|(a, b)| (a - b).abs()).sum();
            let grad = pairs.map(|(a, b)| sign(b - a)).collect();
            LossEval { value, grad }
        }
    })
}

/// Per-dot posterior maps `p_i`, stored as N rows of n pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriors {
    rows: usize,
    cols: usize,
    count: usize,
    data: Vec<f64>,
}

impl Posteriors {
    /// Number of dots N.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Posterior map of dot `i`, row-major over the grid.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.rows * self.cols;
        &self.data[i * n..(i + 1) * n]
    }
}

/// `p_i = 𝒩(q_i, σ²I) / Σ_k 𝒩(q_k, σ²I)` evaluated at every pixel center.
/// Computed in the log domain so distant pixels never divide 0 by 0.
pub fn bayesian_posteriors(ann: &DotAnnotation, cfg: &BayesianConfig) -> Result<Posteriors> {
    cfg.validate()?;
    if ann.is_empty() {
        return Err(Error::EmptyAnnotation);
    }
    let (rows, cols) = ann.shape();
    let n = rows * cols;
    let count = ann.len();
    let inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    let mut data = vec![0.0; count * n];
    let mut logs = vec![0.0; count];
    for pix in 0..n {
        let (r, c) = ((pix / cols) as f64, (pix % cols) as f64);
        for (l, &(qr, qc)) in logs.iter_mut().zip(ann.points()) {
            *l = -((r - qr).powi(2) + (c - qc).powi(2)) * inv;
        }
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
        for (i, l) in logs.iter().enumerate() {
            data[i * n + pix] = (l - m).exp() / z;
        }
    }
    Ok(Posteriors {
        rows,
        cols,
        count,
        data,
    })
}

/// `Σ_i |1 − ⟨p_i, ẑ⟩|` for precomputed posteriors.
pub fn bayesian_loss_with(post: &Posteriors, zhat: &DensityMap) -> Result<LossEval> {
    ensure_same_extent(post.shape(), zhat.shape())?;
    let mut value = 0.0;
    let mut grad = vec![0.0; zhat.len()];
    for i in 0..post.count() {
        let p = post.row(i);
        let expected = dot(p, zhat.values());
        value += (1.0 - expected).abs();
        let s = sign(expected - 1.0);
        if s != 0.0 {
            for (g, pi) in grad.iter_mut().zip(p) {
                *g += s * pi;
            }
        }
    }
    Ok(LossEval { value, grad })
}

/// Bayesian baseline `Σ_i |1 − ⟨p_i, ẑ⟩|`.
pub fn bayesian_loss(ann: &DotAnnotation, zhat: &DensityMap, cfg: &BayesianConfig) -> Result<LossEval> {
    ensure_same_extent(ann.shape(), zhat.shape())?;
    let post = bayesian_posteriors(ann, cfg)?;
    bayesian_loss_with(&post, zhat)
}
