//! Gaussian pseudo ground truth: each dot becomes a truncated, renormalized
//! Gaussian blob, so smoothing never changes the count.

use crate::error::{Error, Result};
use crate::grid::{DensityMap, DotAnnotation};

/// Width used for an isolated dot when adaptive widths have no neighbours.
pub const ISOLATED_SIGMA: f64 = 8.0;

/// Floor on adaptive kernel widths, in pixels.
pub const MIN_ADAPTIVE_SIGMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub sigma: f64,
    /// Half-width of the square truncation window.
    pub radius: usize,
}

impl KernelSpec {
    /// Kernel truncated at `ceil(3σ)`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{sigma} must be > 0")));
        }
        Ok(Self {
            sigma,
            radius: ((3.0 * sigma).ceil() as usize).max(1),
        })
    }

    pub fn with_radius(sigma: f64, radius: usize) -> Result<Self> {
        let mut spec = Self::new(sigma)?;
        if radius == 0 {
            return Err(Error::invalid("radius", "must be >= 1"));
        }
        spec.radius = radius;
        Ok(spec)
    }
}

/// Adds a unit-mass Gaussian centred on pixel `(r0, c0)`, clipped to the grid
/// and renormalized over the in-bounds window.
fn splat(values: &mut [f64], rows: usize, cols: usize, (r0, c0): (usize, usize), spec: &KernelSpec) {
    let rad = spec.radius;
    let (rlo, rhi) = (r0.saturating_sub(rad), (r0 + rad).min(rows - 1));
    let (clo, chi) = (c0.saturating_sub(rad), (c0 + rad).min(cols - 1));
    let inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
    let weight = |r: usize, c: usize| {
        let dr = r as f64 - r0 as f64;
        let dc = c as f64 - c0 as f64;
        (-(dr * dr + dc * dc) * inv).exp()
    };
    let mut total = 0.0;
    for r in rlo..=rhi {
        for c in clo..=chi {
            total += weight(r, c);
        }
    }
    for r in rlo..=rhi {
        for c in clo..=chi {
            values[r * cols + c] += weight(r, c) / total;
        }
    }
}

/// Sum of one fixed-width kernel per dot.
pub fn smooth_fixed(ann: &DotAnnotation, spec: &KernelSpec) -> Result<DensityMap> {
    KernelSpec::with_radius(spec.sigma, spec.radius)?;
    let (rows, cols) = ann.shape();
    let mut values = vec![0.0; rows * cols];
    for i in 0..ann.len() {
        splat(&mut values, rows, cols, ann.nearest_pixel(i), spec);
    }
    DensityMap::new(rows, cols, values)
}

/// Geometry-adaptive widths: `σᵢ = beta · mean distance to the min(k, N−1)
/// nearest other dots`, floored at [`MIN_ADAPTIVE_SIGMA`];
/// [`ISOLATED_SIGMA`] when N = 1.
pub fn adaptive_sigmas(ann: &DotAnnotation, k: usize, beta: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("{beta} must be > 0")));
    }
    let pts = ann.points();
    if pts.len() == 1 {
        return Ok(vec![ISOLATED_SIGMA]);
    }
    let k = k.min(pts.len().saturating_sub(1));
    let mut dists = Vec::with_capacity(pts.len());
    Ok(pts
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| {
            dists.clear();
            dists.extend(
                pts.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &(r2, c2))| ((r - r2).powi(2) + (c - c2).powi(2)).sqrt()),
            );
            dists.sort_by(f64::total_cmp);
            let mean = dists[..k].iter().sum::<f64>() / k as f64;
            (beta * mean).max(MIN_ADAPTIVE_SIGMA)
        })
        .collect())
}

/// Sum of per-dot kernels with geometry-adaptive widths.
pub fn smooth_adaptive(ann: &DotAnnotation, k: usize, beta: f64) -> Result<DensityMap> {
    if ann.is_empty() {
        return Err(Error::EmptyAnnotation);
    }
    let sigmas = adaptive_sigmas(ann, k, beta)?;
    let (rows, cols) = ann.shape();
    let mut values = vec![0.0; rows * cols];
    for (i, &sigma) in sigmas.iter().enumerate() {
        splat(&mut values, rows, cols, ann.nearest_pixel(i), &KernelSpec::new(sigma)?);
    }
    DensityMap::new(rows, cols, values)
}
