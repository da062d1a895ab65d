//! Entropic optimal transport on pixel grids.
//!
//! The solver works with the reference measure `μ ⊗ ν`, so the regularized
//! plan is `γ[i][j] = μ[i]·ν[j]·exp((α[i] + β[j] − C[i][j]) / ε)` and the dual
//! value `⟨α, μ⟩ + ⟨β, ν⟩` equals the regularized transport cost once the
//! marginals are met. Potentials are updated in the log domain; the quadratic
//! grid cost factorizes over the two axes, so each log-sum-exp is taken one
//! axis at a time and the `n × n` kernel is never formed.

use crate::error::{Error, Result};
use crate::grid::{ensure_same_extent, DensityMap};

/// Marginals must sum to one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Above this many pixels the dense cost matrix is not materialized.
pub const MAX_DENSE_PIXELS: usize = 4096;

/// Largest per-axis exponent `scale·(L−1)²/ε` for which the precomputed
/// kernel path is used. Past this the dominant term could underflow, so the
/// exact log-sum-exp is used instead.
const FAST_KERNEL_EXPONENT: f64 = 600.0;

/// Kernel sums below this are recomputed with the exact log-sum-exp.
const FAST_SUM_FLOOR: f64 = 1e-250;

/// Quadratic transport cost between pixel centers,
/// `C[i][j] = scale·‖coord(i) − coord(j)‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCost {
    rows: usize,
    cols: usize,
    scale: f64,
}

impl GridCost {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        Self::with_scale(rows, cols, 1.0)
    }

    pub fn with_scale(rows: usize, cols: usize, scale: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("cost grid", format!("{rows}x{cols}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid("cost scale", format!("{scale} must be finite and > 0")));
        }
        Ok(Self { rows, cols, scale })
    }

    /// Cost rescaled so that its largest entry is 1 (a 1×1 grid keeps scale 1).
    pub fn unit_max(rows: usize, cols: usize) -> Result<Self> {
        let raw = Self::new(rows, cols)?.max_cost();
        Self::with_scale(rows, cols, if raw > 0.0 { 1.0 / raw } else { 1.0 })
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

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of pixels n.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(row, col)` of flat index `i`.
    pub fn coord(&self, i: usize) -> (usize, usize) {
        (i / self.cols, i % self.cols)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (ri, ci) = self.coord(i);
        let (rj, cj) = self.coord(j);
        let dr = ri as f64 - rj as f64;
        let dc = ci as f64 - cj as f64;
        self.scale * (dr * dr + dc * dc)
    }

    /// C∞, the largest entry.
    pub fn max_cost(&self) -> f64 {
        let dr = (self.rows - 1) as f64;
        let dc = (self.cols - 1) as f64;
        self.scale * (dr * dr + dc * dc)
    }

    /// Dense row-major `n × n` matrix, or `None` when `n` exceeds
    /// [`MAX_DENSE_PIXELS`].
    pub fn materialize(&self) -> Option<Vec<f64>> {
        let n = self.len();
        if n > MAX_DENSE_PIXELS {
            return None;
        }
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.entry(i, j));
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    /// Entropic regularization ε; the kernel is `exp(−C/ε)`.
    pub reg: f64,
    pub max_iters: usize,
    /// Stop once the L₁ marginal violation drops below this.
    pub tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            reg: 10.0,
            max_iters: 100,
            tolerance: 1e-9,
        }
    }
}

impl SinkhornConfig {
    pub fn new(reg: f64, max_iters: usize, tolerance: f64) -> Result<Self> {
        let cfg = Self {
            reg,
            max_iters,
            tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reg.is_finite() && self.reg > 0.0) {
            return Err(Error::invalid("reg", format!("{} must be finite and > 0", self.reg)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be >= 1"));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::invalid("tolerance", format!("{} must be >= 0", self.tolerance)));
        }
        Ok(())
    }
}

/// Dual pair `(α, β)`, gauge-fixed so that `⟨α, μ⟩ = 0`. Entries on
/// zero-mass bins are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtSolution {
    pub duals: DualPotentials,
    /// `⟨α, μ⟩ + ⟨β, ν⟩`.
    pub value: f64,
    pub iterations_run: usize,
    /// `‖γ1 − μ‖₁ + ‖γᵀ1 − ν‖₁` of the returned plan.
    pub marginal_error: f64,
}

/// One axis of the separable kernel: `out[c] = LSE_k(x[k] − coef·(c − k)²)`.
struct AxisKernel {
    len: usize,
    coef: f64,
    /// Row-major `len × len` table of `exp(−coef·(c − k)²)` when the fast
    /// path is numerically safe.
    table: Option<Vec<f64>>,
}

impl AxisKernel {
    fn new(len: usize, coef: f64) -> Self {
        let span = (len - 1) as f64;
        let table = (coef * span * span <= FAST_KERNEL_EXPONENT).then(|| {
            let mut t = Vec::with_capacity(len * len);
            for c in 0..len {
                for k in 0..len {
                    let d = c as f64 - k as f64;
                    t.push((-coef * d * d).exp());
                }
            }
            t
        });
        Self { len, coef, table }
    }

    fn exact(&self, x: &[f64], c: usize) -> f64 {
        let term = |k: usize| {
            let d = c as f64 - k as f64;
            x[k] - self.coef * d * d
        };
        let m = (0..self.len).map(term).fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        let s: f64 = (0..self.len).map(|k| (term(k) - m).exp()).sum();
        m + s.ln()
    }

    fn apply(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let Some(table) = &self.table else {
            for (c, o) in out.iter_mut().enumerate() {
                *o = self.exact(x, c);
            }
            return;
        };
        let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            out.fill(f64::NEG_INFINITY);
            return;
        }
        for (e, &v) in scratch.iter_mut().zip(x) {
            *e = (v - m).exp();
        }
        for (c, o) in out.iter_mut().enumerate() {
            let s = dot(&table[c * self.len..(c + 1) * self.len], scratch);
            *o = if s > FAST_SUM_FLOOR {
                m + s.ln()
            } else {
                self.exact(x, c)
            };
        }
    }
}

/// Dot product with independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in ca.by_ref().zip(cb.by_ref()) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// `out[i] = LSE_j(x[j] − C[i][j]/ε)` over a grid, one axis at a time.
struct GridSoftmin {
    rows: usize,
    cols: usize,
    row_axis: AxisKernel,
    col_axis: AxisKernel,
    stage: Vec<f64>,
    col_in: Vec<f64>,
    col_out: Vec<f64>,
    scratch: Vec<f64>,
    row_shift: Vec<f64>,
    row_factor: Vec<f64>,
}

impl GridSoftmin {
    fn new(cost: &GridCost, reg: f64) -> Self {
        let coef = cost.scale / reg;
        let longest = cost.rows.max(cost.cols);
        Self {
            rows: cost.rows,
            cols: cost.cols,
            row_axis: AxisKernel::new(cost.rows, coef),
            col_axis: AxisKernel::new(cost.cols, coef),
            stage: vec![0.0; cost.len()],
            col_in: vec![0.0; cost.rows],
            col_out: vec![0.0; cost.rows],
            scratch: vec![0.0; longest],
            row_shift: vec![0.0; cost.rows],
            row_factor: vec![0.0; cost.rows],
        }
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        if self.row_axis.table.is_some() && self.col_axis.table.is_some() {
            self.apply_factored(x, out);
            return;
        }
        let (rows, cols) = (self.rows, self.cols);
        for r in 0..rows {
            let span = r * cols..(r + 1) * cols;
            self.col_axis.apply(
                &x[span.clone()],
                &mut self.stage[span],
                &mut self.scratch[..cols],
            );
        }
        for c in 0..cols {
            for r in 0..rows {
                self.col_in[r] = self.stage[r * cols + c];
            }
            self.row_axis
                .apply(&self.col_in, &mut self.col_out, &mut self.scratch[..rows]);
            for r in 0..rows {
                out[r * cols + c] = self.col_out[r];
            }
        }
    }

    /// Both axes on the kernel-table path. Stage-one sums stay in linear
    /// scale next to a per-row shift and are rescaled by one factor per row
    /// and one per column, so no logarithm or exponential is taken per pixel
    /// between the stages.
    ///
    /// Every stage-one sum lies in `[exp(−600), cols]` since its largest term
    /// has a unit scratch entry, so each column's shift stays within about
    /// 600 of the largest row shift and every factor is representable.
    fn apply_factored(&mut self, x: &[f64], out: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        let (Some(row_table), Some(col_table)) = (&self.row_axis.table, &self.col_axis.table) else {
            unreachable!("checked by the caller");
        };
        let scratch = &mut self.scratch[..cols];
        for r in 0..rows {
            let line = &x[r * cols..(r + 1) * cols];
            let m = line.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            self.row_shift[r] = m;
            let sums = &mut self.stage[r * cols..(r + 1) * cols];
            if m == f64::NEG_INFINITY {
                sums.fill(0.0);
                continue;
            }
            for (e, &v) in scratch.iter_mut().zip(line) {
                *e = (v - m).exp();
            }
            for (c, s) in sums.iter_mut().enumerate() {
                *s = dot(&col_table[c * cols..(c + 1) * cols], scratch);
            }
        }
        let top = self.row_shift.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            out.fill(f64::NEG_INFINITY);
            return;
        }
        for (f, &m) in self.row_factor.iter_mut().zip(&self.row_shift) {
            *f = (m - top).exp();
        }
        for c in 0..cols {
            let mut shift = f64::NEG_INFINITY;
            for r in 0..rows {
                if self.row_shift[r] > f64::NEG_INFINITY {
                    shift = shift.max(self.row_shift[r] + rough_ln(self.stage[r * cols + c]));
                }
            }
            let col_factor = (top - shift).exp();
            for r in 0..rows {
                self.col_in[r] = self.stage[r * cols + c] * col_factor * self.row_factor[r];
            }
            for r in 0..rows {
                let s = dot(&row_table[r * rows..(r + 1) * rows], &self.col_in);
                out[r * cols + c] = shift + s.ln();
            }
        }
    }
}

/// `ln s` from the binary exponent alone, low by less than `ln 2`; only
/// used to pick a stabilizing shift.
fn rough_ln(s: f64) -> f64 {
    let exponent = ((s.to_bits() >> 52) & 0x7ff) as i64 - 1023;
    exponent as f64 * std::f64::consts::LN_2
}

fn check_probability(m: &DensityMap) -> Result<()> {
    let mass = m.total_mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::MassMismatch {
            mass,
            tolerance: MASS_TOLERANCE,
        });
    }
    Ok(())
}

fn log_weights(m: &DensityMap) -> Vec<f64> {
    m.values()
        .iter()
        .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
        .collect()
}

/// Solves entropic OT between two probability maps with log-domain Sinkhorn
/// iterations. Stops after `cfg.max_iters` potential updates or once the
/// marginal violation drops below `cfg.tolerance`.
pub fn sinkhorn(
    mu: &DensityMap,
    nu: &DensityMap,
    cost: &GridCost,
    cfg: &SinkhornConfig,
) -> Result<OtSolution> {
    ensure_same_extent(mu.shape(), nu.shape())?;
    ensure_same_extent(mu.shape(), cost.shape())?;
    cfg.validate()?;
    check_probability(mu)?;
    check_probability(nu)?;

    let n = cost.len();
    let eps = cfg.reg;
    let (mu_w, nu_w) = (mu.values(), nu.values());
    let (log_mu, log_nu) = (log_weights(mu), log_weights(nu));
    let mut op = GridSoftmin::new(cost, eps);

    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut candidate = vec![0.0; n];
    let mut src = vec![0.0; n];
    let mut lse = vec![0.0; n];

    // α ← −ε·LSE_j(ln ν_j + (β_j − C_ij)/ε), restricted to the support of μ.
    let mut alpha_update = |beta: &[f64], out: &mut [f64], op: &mut GridSoftmin| {
        for j in 0..n {
            src[j] = log_nu[j] + beta[j] / eps;
        }
        op.apply(&src, &mut lse);
        for i in 0..n {
            out[i] = if mu_w[i] > 0.0 { -eps * lse[i] } else { 0.0 };
        }
    };
    // After a β update the column marginals are exact, so the violation is
    // the row part, which a fresh α candidate measures directly.
    let row_violation = |alpha: &[f64], candidate: &[f64]| -> f64 {
        (0..n)
            .filter(|&i| mu_w[i] > 0.0)
            .map(|i| mu_w[i] * (((alpha[i] - candidate[i]) / eps).exp() - 1.0).abs())
            .sum()
    };

    let mut iterations_run = 0;
    let mut beta_src = vec![0.0; n];
    let mut beta_lse = vec![0.0; n];
    let marginal_error = loop {
        alpha_update(&beta, &mut candidate, &mut op);
        if iterations_run > 0 {
            let err = row_violation(&alpha, &candidate);
            if err < cfg.tolerance || iterations_run == cfg.max_iters {
                break err;
            }
        }
        std::mem::swap(&mut alpha, &mut candidate);

        for i in 0..n {
            beta_src[i] = log_mu[i] + alpha[i] / eps;
        }
        op.apply(&beta_src, &mut beta_lse);
        for j in 0..n {
            beta[j] = if nu_w[j] > 0.0 { -eps * beta_lse[j] } else { 0.0 };
        }
        iterations_run += 1;
    };

    let shift: f64 = alpha.iter().zip(mu_w).map(|(a, w)| a * w).sum();
    for (a, &w) in alpha.iter_mut().zip(mu_w) {
        *a = if w > 0.0 { *a - shift } else { 0.0 };
    }
    for (b, &w) in beta.iter_mut().zip(nu_w) {
        *b = if w > 0.0 { *b + shift } else { 0.0 };
    }
    let value = alpha.iter().zip(mu_w).map(|(a, w)| a * w).sum::<f64>()
        + beta.iter().zip(nu_w).map(|(b, w)| b * w).sum::<f64>();

    Ok(OtSolution {
        duals: DualPotentials { alpha, beta },
        value,
        iterations_run,
        marginal_error,
    })
}

/// Dense regularized plan, row index = source pixel, column = target pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    n: usize,
    data: Vec<f64>,
}

impl TransportPlan {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for row in self.data.chunks(self.n) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// `⟨C, γ⟩`.
    pub fn transport_cost(&self, cost: &GridCost) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let g = self.data[i * self.n + j];
                if g > 0.0 {
                    total += g * cost.entry(i, j);
                }
            }
        }
        total
    }
}

/// `γ[i][j] = μ[i]·ν[j]·exp((α[i] + β[j] − C[i][j]) / reg)`.
pub fn transport_plan(
    mu: &DensityMap,
    nu: &DensityMap,
    cost: &GridCost,
    duals: &DualPotentials,
    reg: f64,
) -> Result<TransportPlan> {
    ensure_same_extent(mu.shape(), nu.shape())?;
    ensure_same_extent(mu.shape(), cost.shape())?;
    let n = cost.len();
    if duals.alpha.len() != n || duals.beta.len() != n {
        return Err(Error::invalid("duals", format!("expected length {n}")));
    }
    if !(reg.is_finite() && reg > 0.0) {
        return Err(Error::invalid("reg", format!("{reg} must be finite and > 0")));
    }
    let mut data = vec![0.0; n * n];
    for (i, &mi) in mu.values().iter().enumerate() {
        if mi <= 0.0 {
            continue;
        }
        let row = &mut data[i * n..(i + 1) * n];
        for (j, &nj) in nu.values().iter().enumerate() {
            if nj > 0.0 {
                let e = (duals.alpha[i] + duals.beta[j] - cost.entry(i, j)) / reg;
                row[j] = mi * nj * e.exp();
            }
        }
    }
    Ok(TransportPlan { n, data })
}

/// Exact OT cost between two discrete measures on the real line under
/// `c(x, y) = |x − y|^exponent`, via the monotone (north-west corner)
/// coupling of the sorted supports.
pub fn exact_ot_1d(
    mu_weights: &[f64],
    mu_positions: &[f64],
    nu_weights: &[f64],
    nu_positions: &[f64],
    exponent: f64,
) -> Result<f64> {
    if !(exponent >= 1.0 && exponent.is_finite()) {
        return Err(Error::invalid("exponent", format!("{exponent} must be >= 1")));
    }
    let mu = sorted_atoms(mu_weights, mu_positions)?;
    let nu = sorted_atoms(nu_weights, nu_positions)?;

    let (mut i, mut j) = (0, 0);
    let (mut left_mu, mut left_nu) = (mu[0].1, nu[0].1);
    let mut total = 0.0;
    loop {
        let moved = left_mu.min(left_nu);
        total += moved * (mu[i].0 - nu[j].0).abs().powf(exponent);
        left_mu -= moved;
        left_nu -= moved;
        // Advance whichever side ran out; on a tie advance both.
        let next_i = left_mu <= left_nu;
        let next_j = left_nu <= left_mu;
        if next_i {
            i += 1;
        }
        if next_j {
            j += 1;
        }
        if i >= mu.len() || j >= nu.len() {
            break;
        }
        if next_i {
            left_mu = mu[i].1;
        }
        if next_j {
            left_nu = nu[j].1;
        }
    }
    Ok(total)
}

/// `(position, weight)` pairs with positive weight, sorted by position.
fn sorted_atoms(weights: &[f64], positions: &[f64]) -> Result<Vec<(f64, f64)>> {
    if weights.len() != positions.len() {
        return Err(Error::invalid(
            "1-D measure",
            format!("{} weights vs {} positions", weights.len(), positions.len()),
        ));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || positions.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("1-D measure", "weights must be finite and >= 0, positions finite"));
    }
    let mass: f64 = weights.iter().sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::MassMismatch {
            mass,
            tolerance: 1e-9,
        });
    }
    let mut atoms: Vec<(f64, f64)> = positions
        .iter()
        .copied()
        .zip(weights.iter().copied())
        .filter(|(_, w)| *w > 0.0)
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(atoms)
}
