//! Toy experiment: projected gradient descent of a free density map onto a
//! dot-annotation target under a chosen loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{DensityMap, DotAnnotation};
use crate::losses::{self, BayesianConfig, DmCountConfig, LossEval, PixelNorm, Posteriors};
use crate::metrics;
use crate::smoothing::{self, KernelSpec};

/// Upper end of the uniform initialization range.
pub const INIT_MAX: f64 = 0.01;

/// Loss-trace sampling period, in iterations.
pub const TRACE_PERIOD: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// Squared error against the Gaussian-smoothed target.
    PixelwiseL2 { sigma: f64 },
    /// L₁ error against the Gaussian-smoothed target.
    PixelwiseL1 { sigma: f64 },
    Bayesian(BayesianConfig),
    DmCount(DmCountConfig),
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::PixelwiseL2 { .. } => "pixelwise_l2",
            LossKind::PixelwiseL1 { .. } => "pixelwise_l1",
            LossKind::Bayesian(_) => "bayesian",
            LossKind::DmCount(_) => "dm_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    /// Step size η.
    pub eta: f64,
    pub max_iters: usize,
    /// Stop once the loss improves by less than this over `window` iterations.
    pub stop_tol: f64,
    /// Plateau window in iterations; a positive multiple of [`TRACE_PERIOD`].
    pub window: usize,
    pub seed: u64,
    pub loss: LossKind,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            eta: 1e-5,
            max_iters: 200_000,
            stop_tol: 1e-9,
            window: 100,
            seed: 0,
            loss: LossKind::DmCount(DmCountConfig::default()),
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", format!("{} must be > 0", self.eta)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be >= 1"));
        }
        if self.window == 0 || !self.window.is_multiple_of(TRACE_PERIOD) {
            return Err(Error::invalid(
                "window",
                format!("{} must be a positive multiple of {TRACE_PERIOD}", self.window),
            ));
        }
        if self.stop_tol.is_nan() || self.stop_tol < 0.0 {
            return Err(Error::invalid("stop_tol", format!("{} must be >= 0", self.stop_tol)));
        }
        match &self.loss {
            LossKind::PixelwiseL2 { sigma } | LossKind::PixelwiseL1 { sigma } => {
                KernelSpec::new(*sigma).map(|_| ())
            }
            LossKind::Bayesian(b) => b.validate(),
            LossKind::DmCount(d) => d.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyResult {
    pub loss: &'static str,
    pub final_map: DensityMap,
    pub final_count: f64,
    pub target_count: f64,
    pub final_loss: f64,
    /// `(iteration, loss)` sampled every [`TRACE_PERIOD`] iterations.
    pub loss_trace: Vec<(usize, f64)>,
    pub psnr: f64,
    /// `None` when the grid is smaller than the SSIM window.
    pub ssim: Option<f64>,
    pub iterations_run: usize,
}

impl ToyResult {
    pub fn count_error(&self) -> f64 {
        (self.final_count - self.target_count).abs()
    }
}

/// I.i.d. uniform entries in `[0, 0.01]`.
pub fn init_source(rows: usize, cols: usize, seed: u64) -> Result<DensityMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..rows * cols).map(|_| rng.random_range(0.0..=INIT_MAX)).collect();
    DensityMap::new(rows, cols, values)
}

/// Everything a loss needs that does not change between iterations.
enum Objective {
    Pixelwise { target: DensityMap, norm: PixelNorm },
    Bayesian(Posteriors),
    DmCount { z: DensityMap, cfg: DmCountConfig },
}

impl Objective {
    fn prepare(target: &DotAnnotation, kind: &LossKind) -> Result<Self> {
        Ok(match kind {
            LossKind::PixelwiseL2 { sigma } | LossKind::PixelwiseL1 { sigma } => {
                let norm = if matches!(kind, LossKind::PixelwiseL2 { .. }) {
                    PixelNorm::L2
                } else {
                    PixelNorm::L1
                };
                let t = smoothing::smooth_fixed(target, &KernelSpec::new(*sigma)?)?;
                Objective::Pixelwise { target: t, norm }
            }
            LossKind::Bayesian(cfg) => Objective::Bayesian(losses::bayesian_posteriors(target, cfg)?),
            LossKind::DmCount(cfg) => Objective::DmCount {
                z: target.rasterize(),
                cfg: *cfg,
            },
        })
    }

    fn eval(&self, zhat: &DensityMap) -> Result<LossEval> {
        match self {
            Objective::Pixelwise { target, norm } => losses::pixelwise_loss(target, zhat, *norm),
            Objective::Bayesian(post) => losses::bayesian_loss_with(post, zhat),
            Objective::DmCount { z, cfg } => losses::dm_count_loss(z, zhat, cfg),
        }
    }
}

/// Runs `ẑ ← max(0, ẑ − η·∂ℓ/∂ẑ)` from [`init_source`] until the loss
/// plateaus or `max_iters` is hit, then scores the final map against the
/// rasterized target.
pub fn descend(target: &DotAnnotation, cfg: &DescentConfig) -> Result<ToyResult> {
    cfg.validate()?;
    let objective = Objective::prepare(target, &cfg.loss)?;
    let (rows, cols) = target.shape();
    let mut values = init_source(rows, cols, cfg.seed)?.into_values();
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut checkpoint: Option<f64> = None;
    let mut iterations_run = 0;
    let mut final_loss;

    loop {
        let zhat = DensityMap::new(rows, cols, values)?;
        let LossEval { value, grad } = objective.eval(&zhat)?;
        final_loss = value;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                what: "loss",
                iteration: iterations_run,
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                iteration: iterations_run,
            });
        }
        if iterations_run % TRACE_PERIOD == 0 {
            trace.push((iterations_run, value));
        }
        if iterations_run % cfg.window == 0 {
            let plateau = checkpoint.is_some_and(|previous| previous - value < cfg.stop_tol);
            checkpoint = Some(value);
            if plateau {
                values = zhat.into_values();
                break;
            }
        }
        values = zhat.into_values();
        if iterations_run == cfg.max_iters {
            break;
        }
        for (v, g) in values.iter_mut().zip(&grad) {
            *v = (*v - cfg.eta * g).max(0.0);
        }
        iterations_run += 1;
    }

    let final_map = DensityMap::new(rows, cols, values)?;
    let truth = target.rasterize();
    let ssim = match metrics::ssim(&final_map, &truth) {
        Ok(s) => Some(s),
        Err(Error::TooSmall { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ToyResult {
        loss: cfg.loss.name(),
        final_count: final_map.total_mass(),
        target_count: truth.total_mass(),
        final_loss,
        loss_trace: trace,
        psnr: metrics::psnr(&final_map, &truth)?,
        ssim,
        final_map,
        iterations_run,
    })
}

/// `n_dots` distinct-pixel points drawn from a two-component mixture: a dense
/// Gaussian cluster holding about 70% of the dots and a uniform background.
pub fn synth_target(rows: usize, cols: usize, n_dots: usize, seed: u64) -> Result<DotAnnotation> {
    let capacity = rows * cols;
    if n_dots > capacity {
        return Err(Error::TooMany {
            requested: n_dots,
            capacity,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = vec![false; capacity];
    let mut points = Vec::with_capacity(n_dots);
    let (h, w) = (rows as f64, cols as f64);
    let centre = (rng.random_range(0.25 * h..=0.75 * h), rng.random_range(0.25 * w..=0.75 * w));
    let spread = 0.12 * h.min(w);
    let clustered = (n_dots * 7) / 10;
    let mut attempts = 0usize;
    while points.len() < n_dots {
        attempts += 1;
        let in_cluster = points.len() < clustered && attempts < 50 * capacity;
        let (r, c) = if in_cluster {
            let gr: f64 = rng.sample(StandardNormal);
            let gc: f64 = rng.sample(StandardNormal);
            (centre.0 + spread * gr, centre.1 + spread * gc)
        } else {
            (rng.random_range(0.0..h), rng.random_range(0.0..w))
        };
        if !(0.0..h).contains(&r) || !(0.0..w).contains(&c) {
            continue;
        }
        let (pr, pc) = crate::grid::nearest_pixel(r, c, rows, cols);
        if taken[pr * cols + pc] {
            // dense grids: fall back to the first free pixel so the loop ends
            if attempts > 50 * capacity {
                let free = taken.iter().position(|t| !t).expect("n_dots <= capacity");
                taken[free] = true;
                points.push(((free / cols) as f64, (free % cols) as f64));
            }
            continue;
        }
        taken[pr * cols + pc] = true;
        points.push((r, c));
    }
    DotAnnotation::new(rows, cols, points)
}

/// Settings of a three-way comparison. Every run shares `base` (step size,
/// stopping rule, seed and hence the initial map); only the loss differs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparePlan {
    pub base: DescentConfig,
    /// Kernel width of the smoothed target used by the pixel-wise baseline.
    pub pixel_sigma: f64,
    pub bayesian: BayesianConfig,
    pub dm_count: DmCountConfig,
}

impl Default for ComparePlan {
    fn default() -> Self {
        let bayesian = BayesianConfig::default();
        Self {
            base: DescentConfig::default(),
            pixel_sigma: bayesian.sigma,
            bayesian,
            dm_count: DmCountConfig::default(),
        }
    }
}

impl ComparePlan {
    /// The three losses in run order.
    pub fn losses(&self) -> [LossKind; 3] {
        [
            LossKind::PixelwiseL2 {
                sigma: self.pixel_sigma,
            },
            LossKind::Bayesian(self.bayesian),
            LossKind::DmCount(self.dm_count),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub loss: &'static str,
    pub reason: String,
}

/// One metric's ranking, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub metric: &'static str,
    pub order: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Completed runs in run order.
    pub runs: Vec<ToyResult>,
    pub skipped: Vec<Skipped>,
}

impl Comparison {
    pub fn get(&self, loss: &str) -> Option<&ToyResult> {
        self.runs.iter().find(|r| r.loss == loss)
    }

    /// Rankings by |count error| (ascending), PSNR and SSIM (descending).
    /// Ties keep run order; runs without an SSIM rank last on that metric.
    pub fn ranking(&self) -> Vec<Ranking> {
        let rank = |metric: &'static str, key: &dyn Fn(&ToyResult) -> f64| {
            let mut runs: Vec<&ToyResult> = self.runs.iter().collect();
            runs.sort_by(|a, b| key(a).total_cmp(&key(b)));
            Ranking {
                metric,
                order: runs.into_iter().map(|r| r.loss).collect(),
            }
        };
        vec![
            rank("count_error", &|r| r.count_error()),
            rank("psnr", &|r| -r.psnr),
            rank("ssim", &|r| r.ssim.map_or(f64::INFINITY, |s| -s)),
        ]
    }
}

/// Why a loss cannot run on this target, if it cannot.
fn skip_reason(target: &DotAnnotation, kind: &LossKind) -> Option<String> {
    if !target.is_empty() {
        return None;
    }
    match kind {
        LossKind::Bayesian(_) => Some("empty annotation: no posteriors to form".into()),
        LossKind::DmCount(cfg) if cfg.lambda1 > 0.0 || cfg.lambda2 > 0.0 => {
            Some("empty annotation: OT and TV terms need a target with mass".into())
        }
        _ => None,
    }
}

/// Runs [`descend`] under the pixel-wise, Bayesian and DM-Count losses from
/// the same initial map.
pub fn compare_losses(target: &DotAnnotation, plan: &ComparePlan) -> Result<Comparison> {
    let mut runs = Vec::with_capacity(3);
    let mut skipped = Vec::new();
    for loss in plan.losses() {
        if let Some(reason) = skip_reason(target, &loss) {
            skipped.push(Skipped {
                loss: loss.name(),
                reason,
            });
            continue;
        }
        runs.push(descend(target, &DescentConfig { loss, ..plan.base })?);
    }
    Ok(Comparison { runs, skipped })
}
