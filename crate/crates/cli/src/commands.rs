//! One function per subcommand; each returns the rendered report.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dmcount_core::descent::{self, ComparePlan, DescentConfig};
use dmcount_core::gradcheck::{self, SuiteConfig};
use dmcount_core::losses::{self, BayesianConfig, DmCountConfig, LossEval, PixelNorm};
use dmcount_core::smoothing::{self, KernelSpec};
use dmcount_core::{io, metrics, ot, DensityMap, DotAnnotation, Error, GridCost, SinkhornConfig};

use clap::ValueEnum;

use crate::report::{real, RunReport};
use crate::{pgm, GradcheckArgs, LossArgs, LossName, MetricsArgs, OtArgs, SinkhornArgs, SmoothArgs, ToyArgs, WeightArgs};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Parse { .. } => EXIT_IO,
            Error::NonFinite { .. } | Error::MassMismatch { .. } | Error::ZeroMass { .. } => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<String, Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn load_map(path: &Path) -> Result<DensityMap, Failure> {
    io::read_density(open(path)?).map_err(|e| match e {
        Error::Parse { .. } | Error::Io(_) => Failure::io(path, e),
        other => other.into(),
    })
}

fn load_annotation(path: &Path, rows: usize, cols: usize) -> Result<DotAnnotation, Failure> {
    io::read_annotation(open(path)?, rows, cols).map_err(|e| match e {
        Error::Parse { .. } | Error::Io(_) => Failure::io(path, e),
        other => other.into(),
    })
}

fn save_map(path: &Path, m: &DensityMap) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    io::write_density(file, m).map_err(|e| Failure::io(path, e))
}

fn save_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// Renders the report, also writing it to `path` when given.
fn finish(report: &RunReport, path: Option<&PathBuf>) -> Outcome {
    let text = report.render();
    if let Some(p) = path {
        save_text(p, &text)?;
    }
    Ok(text)
}

fn sinkhorn_config(a: &OtArgs) -> Result<SinkhornConfig, Failure> {
    Ok(SinkhornConfig::new(a.reg, a.sinkhorn_iters, a.sinkhorn_tol)?)
}

fn dm_config(w: &WeightArgs, a: &OtArgs) -> Result<DmCountConfig, Failure> {
    let cfg = DmCountConfig {
        lambda1: w.lambda1,
        lambda2: w.lambda2,
        sinkhorn: sinkhorn_config(a)?,
        cost_scale: a.cost_scale,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn record_ot(report: &mut RunReport, a: &OtArgs) {
    report
        .input_real("reg", a.reg)
        .input("sinkhorn_iters", a.sinkhorn_iters)
        .input_real("sinkhorn_tol", a.sinkhorn_tol)
        .input_real("cost_scale", a.cost_scale);
}

pub fn toy(a: ToyArgs) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("toy");
    report.input("rows", a.rows).input("cols", a.cols);
    let target = match &a.annotation {
        Some(path) => {
            report.input("annotation", path.display());
            load_annotation(path, a.rows, a.cols)?
        }
        None => {
            report.input("dots", a.dots).input("seed", a.seed);
            descent::synth_target(a.rows, a.cols, a.dots, a.seed)?
        }
    };
    report
        .input("init_seed", a.init_seed)
        .input_real("eta", a.eta)
        .input("max_iters", a.max_iters)
        .input_real("stop_tol", a.stop_tol)
        .input("window", a.window)
        .input_real("pixel_sigma", a.pixel_sigma)
        .input_real("bayes_sigma", a.bayes_sigma)
        .input_real("lambda1", a.weights.lambda1)
        .input_real("lambda2", a.weights.lambda2);
    record_ot(&mut report, &a.ot);

    let plan = ComparePlan {
        base: DescentConfig {
            eta: a.eta,
            max_iters: a.max_iters,
            stop_tol: a.stop_tol,
            window: a.window,
            seed: a.init_seed,
            ..DescentConfig::default()
        },
        pixel_sigma: a.pixel_sigma,
        bayesian: BayesianConfig { sigma: a.bayes_sigma },
        dm_count: dm_config(&a.weights, &a.ot)?,
    };
    for loss in plan.losses() {
        DescentConfig { loss, ..plan.base }.validate()?;
    }
    fs::create_dir_all(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    report.input("out", a.out.display());

    let target_csv = a.out.join("target.csv");
    let file = File::create(&target_csv).map_err(|e| Failure::io(&target_csv, e))?;
    io::write_annotation(file, &target).map_err(|e| Failure::io(&target_csv, e))?;

    let descent_started = Instant::now();
    let cmp = descent::compare_losses(&target, &plan)?;
    report.time("descent", descent_started.elapsed());

    report.output("target_count", target.len());
    let joint_max = cmp.runs.iter().map(|r| r.final_map.max_value()).fold(0.0, f64::max);
    report.output_real("joint_max", joint_max);
    for run in &cmp.runs {
        let name = run.loss;
        save_map(&a.out.join(format!("{name}.dens")), &run.final_map)?;
        let pgm_path = a.out.join(format!("{name}.pgm"));
        let scale = pgm::write(&pgm_path, &run.final_map).map_err(|e| Failure::io(&pgm_path, e))?;
        report
            .output_real(&format!("{name}.final_count"), run.final_count)
            .output_real(&format!("{name}.count_error"), run.count_error())
            .output_real(&format!("{name}.final_loss"), run.final_loss)
            .output_real(&format!("{name}.psnr"), run.psnr)
            .output(
                &format!("{name}.ssim"),
                run.ssim.map_or_else(|| "excluded".to_string(), real),
            )
            .output(&format!("{name}.iterations"), run.iterations_run)
            .output_real(&format!("{name}.pgm_scale"), scale);
    }
    for skipped in &cmp.skipped {
        report.output(&format!("{}.skipped", skipped.loss), &skipped.reason);
    }

    let mut table = String::from("metric");
    for place in 1..=cmp.runs.len() {
        table.push_str(&format!(",rank{place}"));
    }
    table.push('\n');
    for rank in cmp.ranking() {
        let order = rank.order.join(" > ");
        report.output(&format!("ranking.{}", rank.metric), &order);
        table.push_str(rank.metric);
        for name in &rank.order {
            table.push(',');
            table.push_str(name);
        }
        table.push('\n');
    }
    save_text(&a.out.join("ranking.csv"), &table)?;

    report.time("total", started.elapsed());
    finish(&report, Some(&a.out.join("report.txt")))
}

pub fn sinkhorn(a: SinkhornArgs) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("sinkhorn");
    report.input("mu", a.mu.display()).input("nu", a.nu.display());
    record_ot(&mut report, &a.ot);
    let (mu, nu) = (load_map(&a.mu)?, load_map(&a.nu)?);
    if mu.total_mass() <= 0.0 || nu.total_mass() <= 0.0 {
        return Err(Error::ZeroMass {
            which: if mu.total_mass() <= 0.0 { "mu" } else { "nu" },
        }
        .into());
    }
    let cost = GridCost::with_scale(mu.rows(), mu.cols(), a.ot.cost_scale)?;
    let sol = ot::sinkhorn(&mu.normalize(), &nu.normalize(), &cost, &sinkhorn_config(&a.ot)?)?;
    report
        .output_real("mu_mass", mu.total_mass())
        .output_real("nu_mass", nu.total_mass())
        .output_real("value", sol.value)
        .output("iterations_run", sol.iterations_run)
        .output_real("marginal_error", sol.marginal_error)
        .output_real("max_cost", cost.max_cost());
    report.time("total", started.elapsed());
    finish(&report, a.report.as_ref())
}

pub fn loss(a: LossArgs) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("loss");
    let kind = a.kind.to_possible_value().expect("no skipped variants");
    report.input("kind", kind.get_name());
    report.input("pred", a.pred.display());
    let pred = load_map(&a.pred)?;
    let eval: LossEval = if a.kind == LossName::Bayesian {
        let path = a
            .annotation
            .as_ref()
            .ok_or_else(|| Failure::usage("--annotation is required for --kind bayesian"))?;
        report.input("annotation", path.display()).input_real("sigma", a.sigma);
        let ann = load_annotation(path, pred.rows(), pred.cols())?;
        losses::bayesian_loss(&ann, &pred, &BayesianConfig { sigma: a.sigma })?
    } else {
        let path = a
            .target
            .as_ref()
            .ok_or_else(|| Failure::usage("--target is required for this loss"))?;
        report.input("target", path.display());
        let target = load_map(path)?;
        match a.kind {
            LossName::Count => losses::count_loss(&target, &pred)?,
            LossName::Tv => losses::tv_loss(&target, &pred)?,
            LossName::PixelwiseL2 => losses::pixelwise_loss(&target, &pred, PixelNorm::L2)?,
            LossName::PixelwiseL1 => losses::pixelwise_loss(&target, &pred, PixelNorm::L1)?,
            LossName::Ot | LossName::DmCount => {
                let cfg = dm_config(&a.weights, &a.ot)?;
                record_ot(&mut report, &a.ot);
                if a.kind == LossName::Ot {
                    losses::ot_loss(&target, &pred, &cfg)?
                } else {
                    report
                        .input_real("lambda1", cfg.lambda1)
                        .input_real("lambda2", cfg.lambda2);
                    losses::dm_count_loss(&target, &pred, &cfg)?
                }
            }
            LossName::Bayesian => unreachable!("handled above"),
        }
    };
    let grad_norm = eval.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let grad_min = eval.grad.iter().copied().fold(f64::INFINITY, f64::min);
    let grad_max = eval.grad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report
        .output_real("value", eval.value)
        .output_real("grad_l2", grad_norm)
        .output_real("grad_min", grad_min)
        .output_real("grad_max", grad_max);
    report.time("total", started.elapsed());
    finish(&report, a.report.as_ref())
}

pub fn smooth(a: SmoothArgs) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("smooth");
    report
        .input("annotation", a.annotation.display())
        .input("rows", a.rows)
        .input("cols", a.cols);
    let ann = load_annotation(&a.annotation, a.rows, a.cols)?;
    let map = if a.adaptive {
        report.input("mode", "adaptive").input("k", a.k).input_real("beta", a.beta);
        smoothing::smooth_adaptive(&ann, a.k, a.beta)?
    } else {
        report.input("mode", "fixed").input_real("sigma", a.sigma);
        smoothing::smooth_fixed(&ann, &KernelSpec::new(a.sigma)?)?
    };
    save_map(&a.out, &map)?;
    report.input("out", a.out.display());
    report.output("dots", ann.len()).output_real("total_mass", map.total_mass());
    if let Some(path) = &a.pgm {
        let scale = pgm::write(path, &map).map_err(|e| Failure::io(path, e))?;
        report.output_real("pgm_scale", scale);
    }
    report.time("total", started.elapsed());
    finish(&report, a.report.as_ref())
}

pub fn metrics(a: MetricsArgs) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("metrics");
    if let Some(path) = &a.pairs {
        report.input("pairs", path.display());
        let pairs = io::read_count_pairs(open(path)?).map_err(|e| match e {
            Error::Parse { .. } | Error::Io(_) => Failure::io(path, e),
            other => other.into(),
        })?;
        let m = metrics::count_metrics(&pairs)?;
        report
            .output("images", pairs.len())
            .output_real("mae", m.mae)
            .output_real("rmse", m.rmse)
            .output("nae", m.nae.map_or_else(|| "excluded".to_string(), real))
            .output("nae_excluded", m.nae_excluded);
    } else {
        let (pa, pb) = (a.a.as_ref().expect("clap enforces"), a.b.as_ref().expect("clap enforces"));
        report.input("a", pa.display()).input("b", pb.display());
        let (ma, mb) = (load_map(pa)?, load_map(pb)?);
        report
            .output_real("data_range", metrics::data_range(&ma, &mb))
            .output_real("psnr", metrics::psnr(&ma, &mb)?);
        let ssim = match metrics::ssim(&ma, &mb) {
            Ok(s) => real(s),
            Err(Error::TooSmall { .. }) => "excluded".into(),
            Err(e) => return Err(e.into()),
        };
        report.output("ssim", ssim);
    }
    report.time("total", started.elapsed());
    finish(&report, a.report.as_ref())
}

pub fn gradcheck(a: GradcheckArgs) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("gradcheck");
    report
        .input("rows", a.rows)
        .input("cols", a.cols)
        .input("cases", a.cases)
        .input_real("step", a.step)
        .input("seed", a.seed);
    if !(a.step > 0.0 && a.step.is_finite()) {
        return Err(Failure::usage(format!("--step {} must be > 0", a.step)));
    }
    if a.rows == 0 || a.cols == 0 {
        return Err(Failure::usage("--rows and --cols must be >= 1"));
    }
    let cfg = SuiteConfig {
        rows: a.rows,
        cols: a.cols,
        cases: a.cases,
        step: a.step,
        seed: a.seed,
        ..SuiteConfig::default()
    };
    for (loss, err) in gradcheck::run_suite(&cfg)? {
        report.output_real(&format!("{}.max_rel_err", loss.name()), err);
    }
    report.time("total", started.elapsed());
    finish(&report, a.report.as_ref())
}
