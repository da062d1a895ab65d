//! Central finite-difference checks of the analytic loss gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{DensityMap, DotAnnotation};
use crate::losses::{self, BayesianConfig, DmCountConfig, LossEval, PixelNorm};
use crate::ot::SinkhornConfig;

/// Central differences `(f(ẑ + h·e_k) − f(ẑ − h·e_k)) / 2h` for every pixel.
pub fn numeric_gradient<F>(f: F, zhat: &DensityMap, step: f64) -> Result<Vec<f64>>
where
    F: Fn(&DensityMap) -> Result<LossEval>,
{
    let (rows, cols) = zhat.shape();
    let base = zhat.values();
    let mut out = Vec::with_capacity(base.len());
    let mut probe = base.to_vec();
    for k in 0..base.len() {
        probe[k] = base[k] + step;
        let plus = f(&DensityMap::new(rows, cols, probe.clone())?)?.value;
        probe[k] = base[k] - step;
        let minus = f(&DensityMap::new(rows, cols, probe.clone())?)?.value;
        probe[k] = base[k];
        out.push((plus - minus) / (2.0 * step));
    }
    Ok(out)
}

/// `‖a − b‖₂ / ‖b‖₂`, or the absolute error when `b` vanishes.
pub fn relative_l2_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    if norm > 1e-12 {
        diff / norm
    } else {
        diff
    }
}

/// Relative L₂ error between the analytic gradient of `f` at `zhat` and
/// central differences with the given step.
pub fn check<F>(f: F, zhat: &DensityMap, step: f64) -> Result<f64>
where
    F: Fn(&DensityMap) -> Result<LossEval>,
{
    let analytic = f(zhat)?.grad;
    let numeric = numeric_gradient(&f, zhat, step)?;
    Ok(relative_l2_error(&analytic, &numeric))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckedLoss {
    Count,
    Ot,
    Tv,
    DmCount,
    PixelwiseL2,
    Bayesian,
}

impl CheckedLoss {
    pub const ALL: [CheckedLoss; 6] = [
        CheckedLoss::Count,
        CheckedLoss::Ot,
        CheckedLoss::Tv,
        CheckedLoss::DmCount,
        CheckedLoss::PixelwiseL2,
        CheckedLoss::Bayesian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckedLoss::Count => "count",
            CheckedLoss::Ot => "ot",
            CheckedLoss::Tv => "tv",
            CheckedLoss::DmCount => "dm_count",
            CheckedLoss::PixelwiseL2 => "pixelwise_l2",
            CheckedLoss::Bayesian => "bayesian",
        }
    }
}

/// Settings of the seeded gradient suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub rows: usize,
    pub cols: usize,
    pub cases: usize,
    pub step: f64,
    pub seed: u64,
    pub dm_count: DmCountConfig,
    pub bayesian: BayesianConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            rows: 6,
            cols: 6,
            cases: 20,
            step: 1e-4,
            seed: 0,
            dm_count: DmCountConfig {
                sinkhorn: SinkhornConfig {
                    reg: 10.0,
                    max_iters: 10_000,
                    tolerance: 1e-12,
                },
                ..DmCountConfig::default()
            },
            bayesian: BayesianConfig { sigma: 2.0 },
        }
    }
}

/// One random test point: a strictly positive target/prediction pair plus a
/// dot annotation for the Bayesian loss. The pair is redrawn until no entry
/// of `z/‖z‖₁ − ẑ/‖ẑ‖₁` lies within 1e−3 of a TV kink, and the counts differ.
#[derive(Debug, Clone)]
pub struct Case {
    pub z: DensityMap,
    pub zhat: DensityMap,
    pub ann: DotAnnotation,
}

pub fn random_case(rows: usize, cols: usize, rng: &mut impl Rng) -> Result<Case> {
    let n = rows * cols;
    loop {
        let z = DensityMap::new(rows, cols, (0..n).map(|_| rng.random_range(0.1..1.0)).collect())?;
        let zhat = DensityMap::new(rows, cols, (0..n).map(|_| rng.random_range(0.1..1.0)).collect())?;
        let (mu, nu) = (z.normalize(), zhat.normalize());
        let clear_of_kinks = mu.values().iter().zip(nu.values()).all(|(a, b)| (a - b).abs() > 1e-3);
        if !clear_of_kinks || (z.total_mass() - zhat.total_mass()).abs() < 1e-2 {
            continue;
        }
        let dots = rng.random_range(1..=4);
        let points = (0..dots)
            .map(|_| (rng.random_range(0.0..rows as f64), rng.random_range(0.0..cols as f64)))
            .collect();
        let ann = DotAnnotation::new(rows, cols, points)?;
        return Ok(Case { z, zhat, ann });
    }
}

pub fn evaluate(loss: CheckedLoss, case: &Case, cfg: &SuiteConfig, zhat: &DensityMap) -> Result<LossEval> {
    let z = &case.z;
    match loss {
        CheckedLoss::Count => losses::count_loss(z, zhat),
        CheckedLoss::Ot => losses::ot_loss(z, zhat, &cfg.dm_count),
        CheckedLoss::Tv => losses::tv_loss(z, zhat),
        CheckedLoss::DmCount => losses::dm_count_loss(z, zhat, &cfg.dm_count),
        CheckedLoss::PixelwiseL2 => losses::pixelwise_loss(z, zhat, PixelNorm::L2),
        CheckedLoss::Bayesian => losses::bayesian_loss(&case.ann, zhat, &cfg.bayesian),
    }
}

/// Per-loss maximum relative error over the seeded cases.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<(CheckedLoss, f64)>> {
    if cfg.cases == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<Case> = (0..cfg.cases)
        .map(|_| random_case(cfg.rows, cfg.cols, &mut rng))
        .collect::<Result<_>>()?;
    CheckedLoss::ALL
        .iter()
        .map(|&loss| {
            let mut worst = 0.0f64;
            for case in &cases {
                let err = check(|m| evaluate(loss, case, cfg, m), &case.zhat, cfg.step)?;
                worst = worst.max(err);
            }
            Ok((loss, worst))
        })
        .collect()
}
