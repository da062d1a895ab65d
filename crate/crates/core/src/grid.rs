//! Density maps, dot annotations and the conversions between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Machine epsilon of the working precision, used as the division guard in
/// [`DensityMap::normalize`].
pub const EPS_MACH: f64 = f64::EPSILON;

/// Nonnegative real-valued 2-D grid stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DensityMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        check_extent(rows, cols)?;
        if values.len() != rows * cols {
            return Err(Error::invalid(
                "density map",
                format!("expected {} values, got {}", rows * cols, values.len()),
            ));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(
                "density map",
                format!("entry {i} is {v}; entries must be finite and >= 0"),
            ));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_extent(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        })
    }

    /// Builds a map from a function of `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self::new(rows, cols, values)
    }

    /// Projects arbitrary reals onto the nonnegative orthant, `max(0, v)`.
    /// Non-finite entries are rejected.
    pub fn from_projected(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|v| if v.is_nan() || v > 0.0 { v } else { 0.0 })
            .collect();
        Self::new(rows, cols, values)
    }

    /// Unit mass at a single pixel.
    pub fn point_mass(rows: usize, cols: usize, row: usize, col: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        if row >= rows || col >= cols {
            return Err(Error::invalid("point mass", format!("({row}, {col}) outside {rows}x{cols}")));
        }
        m.values[row * cols + col] = 1.0;
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// ‖m‖₁, the count represented by the map.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `m / (‖m‖₁ + ε_mach)`. The all-zero map maps to itself.
    pub fn normalize(&self) -> DensityMap {
        let denom = self.total_mass() + EPS_MACH;
        DensityMap {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v / denom).collect(),
        }
    }

    /// Multiplies every entry by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<DensityMap> {
        DensityMap::new(self.rows, self.cols, self.values.iter().map(|v| v * factor).collect())
    }

    /// ‖self − other‖₁.
    pub fn l1_distance(&self, other: &DensityMap) -> Result<f64> {
        ensure_same_extent(self.shape(), other.shape())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// `total_mass` as a free function.
pub fn total_mass(m: &DensityMap) -> f64 {
    m.total_mass()
}

/// `normalize` as a free function.
pub fn normalize(m: &DensityMap) -> DensityMap {
    m.normalize()
}

fn check_extent(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid extent", format!("{rows}x{cols}; both must be >= 1")));
    }
    Ok(())
}

pub(crate) fn ensure_same_extent(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch {
            left_rows: a.0,
            left_cols: a.1,
            right_rows: b.0,
            right_cols: b.1,
        });
    }
    Ok(())
}

/// Head-point annotation: real `(row, col)` coordinates inside `[0, rows) × [0, cols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DotAnnotation {
    rows: usize,
    cols: usize,
    points: Vec<(f64, f64)>,
}

impl DotAnnotation {
    pub fn new(rows: usize, cols: usize, points: Vec<(f64, f64)>) -> Result<Self> {
        check_extent(rows, cols)?;
        for (i, &(r, c)) in points.iter().enumerate() {
            let inside = r.is_finite()
                && c.is_finite()
                && (0.0..rows as f64).contains(&r)
                && (0.0..cols as f64).contains(&c);
            if !inside {
                return Err(Error::invalid(
                    "annotation",
                    format!("point {i} at ({r}, {c}) lies outside {rows}x{cols}"),
                ));
            }
        }
        Ok(Self { rows, cols, points })
    }

    pub fn empty(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// N, the number of annotated people.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest pixel of point `i`, clamped to the grid.
    pub fn nearest_pixel(&self, i: usize) -> (usize, usize) {
        let (r, c) = self.points[i];
        nearest_pixel(r, c, self.rows, self.cols)
    }

    /// Binary dot map: each point adds 1 at its nearest pixel.
    pub fn rasterize(&self) -> DensityMap {
        let mut values = vec![0.0; self.rows * self.cols];
        for i in 0..self.points.len() {
            let (r, c) = self.nearest_pixel(i);
            values[r * self.cols + c] += 1.0;
        }
        DensityMap {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }

    /// Displaces every point by an independent uniform offset in
    /// `[-max_fraction·rows, +max_fraction·rows]` on each axis, then clamps
    /// to the grid.
    pub fn perturb(&self, max_fraction: f64, seed: u64) -> Result<DotAnnotation> {
        if !(0.0..=1.0).contains(&max_fraction) {
            return Err(Error::invalid("max_fraction", format!("{max_fraction} not in [0, 1]")));
        }
        if max_fraction == 0.0 {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = max_fraction * self.rows as f64;
        let (rmax, cmax) = (last_inside(self.rows), last_inside(self.cols));
        let points = self
            .points
            .iter()
            .map(|&(r, c)| {
                let dr = rng.random_range(-amp..=amp);
                let dc = rng.random_range(-amp..=amp);
                ((r + dr).clamp(0.0, rmax), (c + dc).clamp(0.0, cmax))
            })
            .collect();
        DotAnnotation::new(self.rows, self.cols, points)
    }
}

/// Free-function form of [`DotAnnotation::rasterize`].
pub fn rasterize(ann: &DotAnnotation) -> DensityMap {
    ann.rasterize()
}

/// Free-function form of [`DotAnnotation::perturb`].
pub fn perturb_annotation(ann: &DotAnnotation, max_fraction: f64, seed: u64) -> Result<DotAnnotation> {
    ann.perturb(max_fraction, seed)
}

/// Largest coordinate strictly below `extent`.
fn last_inside(extent: usize) -> f64 {
    let e = extent as f64;
    e - e * f64::EPSILON
}

pub(crate) fn nearest_pixel(r: f64, c: f64, rows: usize, cols: usize) -> (usize, usize) {
    let ri = (r.round().max(0.0) as usize).min(rows - 1);
    let ci = (c.round().max(0.0) as usize).min(cols - 1);
    (ri, ci)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rasterize_empty() {
        let ann = DotAnnotation::empty(4, 4).unwrap();
        let m = ann.rasterize();
        assert_eq!(m.shape(), (4, 4));
        assert_eq!(m.total_mass(), 0.0);
    }

    #[test]
    fn rasterize_single_pixel() {
        let ann = DotAnnotation::new(4, 4, vec![(1.0, 2.0)]).unwrap();
        let m = ann.rasterize();
        assert_eq!(m.get(1, 2), 1.0);
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn rasterize_accumulates_coincident_points() {
        let ann = DotAnnotation::new(2, 2, vec![(0.4, 0.4), (0.4, 0.4)]).unwrap();
        let m = ann.rasterize();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.total_mass(), 2.0);
    }

    #[test]
    fn rasterize_clamps_points_near_far_edge() {
        let ann = DotAnnotation::new(4, 4, vec![(3.9, 3.6)]).unwrap();
        assert_eq!(ann.rasterize().get(3, 3), 1.0);
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(DensityMap::zeros(3, 3).unwrap().total_mass(), 0.0);
        let ann = DotAnnotation::new(5, 5, vec![(0.0, 0.0), (2.2, 3.1), (4.0, 1.0)]).unwrap();
        assert_eq!(total_mass(&ann.rasterize()), 3.0);
        let u = DensityMap::new(2, 2, vec![0.25; 4]).unwrap();
        assert_eq!(u.total_mass(), 1.0);
    }

    #[test]
    fn normalize_examples() {
        let m = DensityMap::new(1, 2, vec![2.0, 2.0]).unwrap().normalize();
        assert!((m.values()[0] - 0.5).abs() < 1e-15 && (m.values()[1] - 0.5).abs() < 1e-15);
        let m = DensityMap::new(1, 2, vec![1.0, 3.0]).unwrap().normalize();
        assert!((m.values()[0] - 0.25).abs() < 1e-15 && (m.values()[1] - 0.75).abs() < 1e-15);
        let z = DensityMap::zeros(3, 2).unwrap();
        assert_eq!(normalize(&z), z);
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(DensityMap::new(0, 2, vec![]).is_err());
        assert!(DensityMap::new(1, 2, vec![1.0]).is_err());
        assert!(DensityMap::new(1, 2, vec![1.0, -0.5]).is_err());
        assert!(DensityMap::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn rejects_out_of_bounds_points() {
        assert!(DotAnnotation::new(4, 4, vec![(4.0, 0.0)]).is_err());
        assert!(DotAnnotation::new(4, 4, vec![(-0.1, 0.0)]).is_err());
        assert!(DotAnnotation::new(4, 4, vec![(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn perturb_zero_noise_is_identity() {
        let ann = DotAnnotation::new(8, 8, vec![(1.5, 2.5), (7.9, 0.0)]).unwrap();
        assert_eq!(ann.perturb(0.0, 3).unwrap(), ann);
    }

    #[test]
    fn perturb_is_deterministic() {
        let ann = DotAnnotation::new(32, 32, vec![(10.0, 10.0), (20.0, 5.0)]).unwrap();
        assert_eq!(ann.perturb(0.05, 11).unwrap(), ann.perturb(0.05, 11).unwrap());
        assert_ne!(ann.perturb(0.05, 11).unwrap(), ann.perturb(0.05, 12).unwrap());
    }

    #[test]
    fn perturb_displacement_bound() {
        let points: Vec<(f64, f64)> = (0..100)
            .map(|i| (((i * 7) % 64) as f64 + 0.3, ((i * 13) % 64) as f64 + 0.6))
            .collect();
        let ann = DotAnnotation::new(64, 64, points).unwrap();
        let out = perturb_annotation(&ann, 0.05, 42).unwrap();
        assert_eq!(out.len(), 100);
        for (a, b) in ann.points().iter().zip(out.points()) {
            assert!((a.0 - b.0).abs() <= 3.2 + 1e-12);
            assert!((a.1 - b.1).abs() <= 3.2 + 1e-12);
        }
    }

    #[test]
    fn perturb_rejects_bad_fraction() {
        let ann = DotAnnotation::empty(4, 4).unwrap();
        assert!(ann.perturb(1.5, 0).is_err());
        assert!(ann.perturb(-0.1, 0).is_err());
    }
}
