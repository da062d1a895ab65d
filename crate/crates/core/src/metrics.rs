//! Count metrics over an image set and image-similarity metrics over maps.

use crate::error::{Error, Result};
use crate::grid::{ensure_same_extent, DensityMap, EPS_MACH};

/// SSIM window side length.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountPair {
    pub truth: f64,
    pub predicted: f64,
}

impl CountPair {
    pub fn new(truth: f64, predicted: f64) -> Result<Self> {
        if !(truth.is_finite() && truth >= 0.0 && predicted.is_finite()) {
            return Err(Error::invalid(
                "count pair",
                format!("({truth}, {predicted}); truth must be finite and >= 0"),
            ));
        }
        Ok(Self { truth, predicted })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountMetrics {
    pub mae: f64,
    pub rmse: f64,
    /// `None` when every image has zero ground truth.
    pub nae: Option<f64>,
    /// Images left out of NAE because their ground truth count is 0.
    pub nae_excluded: usize,
}

pub fn count_metrics(pairs: &[CountPair]) -> Result<CountMetrics> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = pairs.len() as f64;
    let mae = pairs.iter().map(|p| (p.truth - p.predicted).abs()).sum::<f64>() / k;
    let rmse = (pairs.iter().map(|p| (p.truth - p.predicted).powi(2)).sum::<f64>() / k).sqrt();
    let normalized: Vec<f64> = pairs
        .iter()
        .filter(|p| p.truth > 0.0)
        .map(|p| (p.truth - p.predicted).abs() / p.truth)
        .collect();
    let nae_excluded = pairs.len() - normalized.len();
    let nae = (!normalized.is_empty()).then(|| normalized.iter().sum::<f64>() / normalized.len() as f64);
    Ok(CountMetrics {
        mae,
        rmse,
        nae,
        nae_excluded,
    })
}

/// Joint data range `max(max a, max b, ε_mach)`.
pub fn data_range(a: &DensityMap, b: &DensityMap) -> f64 {
    a.max_value().max(b.max_value()).max(EPS_MACH)
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical maps.
pub fn psnr(a: &DensityMap, b: &DensityMap) -> Result<f64> {
    ensure_same_extent(a.shape(), b.shape())?;
    let mse = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let range = data_range(a, b);
    Ok(10.0 * (range * range / mse).log10())
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering with the normalized Gaussian window.
fn filter_valid(x: &[f64], rows: usize, cols: usize, w: &[f64]) -> Vec<f64> {
    let k = w.len();
    let out_cols = cols - k + 1;
    let out_rows = rows - k + 1;
    let mut horiz = vec![0.0; rows * out_cols];
    for r in 0..rows {
        let line = &x[r * cols..(r + 1) * cols];
        for c in 0..out_cols {
            horiz[r * out_cols + c] = w.iter().zip(&line[c..c + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; out_rows * out_cols];
    for r in 0..out_rows {
        for c in 0..out_cols {
            out[r * out_cols + c] = (0..k).map(|t| w[t] * horiz[(r + t) * out_cols + c]).sum();
        }
    }
    out
}

/// Mean local SSIM over all fully-contained 11×11 Gaussian windows
/// (σ = 1.5, K₁ = 0.01, K₂ = 0.03) with the joint data range.
pub fn ssim(a: &DensityMap, b: &DensityMap) -> Result<f64> {
    ensure_same_extent(a.shape(), b.shape())?;
    let (rows, cols) = a.shape();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::TooSmall {
            rows,
            cols,
            min: SSIM_WINDOW,
        });
    }
    let range = data_range(a, b);
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let w = gaussian_window();
    let (x, y) = (a.values(), b.values());
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| f(*p, *q)).collect() };
    let mx = filter_valid(x, rows, cols, &w);
    let my = filter_valid(y, rows, cols, &w);
    let mxx = filter_valid(&prod(&|p, _| p * p), rows, cols, &w);
    let myy = filter_valid(&prod(&|_, q| q * q), rows, cols, &w);
    let mxy = filter_valid(&prod(&|p, q| p * q), rows, cols, &w);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = mxx[i] - ux * ux;
            let vy = myy[i] - uy * uy;
            let cov = mxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}
