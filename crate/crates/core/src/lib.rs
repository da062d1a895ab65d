//! Distribution-matching losses for density-map counting.
//!
//! The crate covers the full toolchain of the DM-Count objective:
//!
//! - [`grid`]: density maps, dot annotations, rasterization and noise injection;
//! - [`ot`]: grid transport costs and a log-domain Sinkhorn solver returning dual potentials;
//! - [`losses`]: counting, OT, total-variation and combined losses, plus the
//!   pixel-wise and Bayesian baselines, each with an analytic gradient;
//! - [`smoothing`]: Gaussian pseudo ground truth with fixed or adaptive kernels;
//! - [`metrics`]: MAE/RMSE/NAE, PSNR and SSIM;
//! - [`descent`]: the projected-gradient toy experiment;
//! - [`io`]: the density-map text format and annotation CSV.

pub mod descent;
pub mod error;
pub mod gradcheck;
pub mod grid;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod ot;
pub mod smoothing;

pub use error::{Error, Result};
pub use grid::{DensityMap, DotAnnotation, EPS_MACH};

pub use ot::{DualPotentials, GridCost, OtSolution, SinkhornConfig};
pub use losses::{BayesianConfig, DmCountConfig, LossEval, PixelNorm};
