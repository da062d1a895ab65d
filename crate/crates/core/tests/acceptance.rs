//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line with
//! the measured numbers, then asserts. Tests hold a shared lock so the timed
//! criteria are measured without competing threads.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dmcount_core::descent::{self, ComparePlan, DescentConfig, LossKind};
use dmcount_core::grid::{normalize, perturb_annotation};
use dmcount_core::losses::{self, BayesianConfig, LossEval, PixelNorm};
use dmcount_core::metrics::{self, CountPair};
use dmcount_core::ot::{self, exact_ot_1d, transport_plan};
use dmcount_core::smoothing::{self, KernelSpec};
use dmcount_core::{DensityMap, DmCountConfig, DotAnnotation, GridCost, SinkhornConfig, EPS_MACH};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Written to the raw stdout handle so the line shows without `--nocapture`.
fn verdict(n: u32, pass: bool, detail: &str) {
    let line = format!("\ncriterion {n}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn random_map(rows: usize, cols: usize, lo: f64, rng: &mut ChaCha8Rng) -> DensityMap {
    DensityMap::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(lo..1.0)).collect()).unwrap()
}

fn random_weights(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Central differences of the full loss, one coordinate at a time.
fn central_differences(f: &dyn Fn(&DensityMap) -> f64, at: &DensityMap, h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|i| {
            let mut plus = at.values().to_vec();
            let mut minus = at.values().to_vec();
            plus[i] += h;
            minus[i] -= h;
            let p = DensityMap::new(at.rows(), at.cols(), plus).unwrap();
            let m = DensityMap::new(at.rows(), at.cols(), minus).unwrap();
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let reference: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    if reference > 0.0 {
        diff / reference
    } else {
        diff
    }
}

/// W₂² on the line from the quantile functions: both CDFs are swept
/// together and each shared mass slice pays its squared displacement.
fn quantile_w2(mu: &[f64], nu: &[f64], x: &[f64]) -> f64 {
    let mut a: Vec<(f64, f64)> = x.iter().copied().zip(mu.iter().copied()).filter(|p| p.1 > 0.0).collect();
    let mut b: Vec<(f64, f64)> = x.iter().copied().zip(nu.iter().copied()).filter(|p| p.1 > 0.0).collect();
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    b.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut ca, mut cb) = (a[0].1, b[0].1);
    let (mut i, mut j, mut t, mut total) = (0, 0, 0.0f64, 0.0);
    while i < a.len() && j < b.len() {
        let next = ca.min(cb);
        total += (next - t).max(0.0) * (a[i].0 - b[j].0).powi(2);
        t = next;
        if ca <= next {
            i += 1;
            if i < a.len() {
                ca += a[i].1;
            }
        }
        if cb <= next {
            j += 1;
            if j < b.len() {
                cb += b[j].1;
            }
        }
    }
    total
}

/// Truncated, renormalized Gaussian per dot, written out directly.
fn smoothed_reference(ann: &DotAnnotation, sigma: f64) -> Vec<f64> {
    let (rows, cols) = ann.shape();
    let radius = (3.0 * sigma).ceil() as i64;
    let mut out = vec![0.0; rows * cols];
    for i in 0..ann.len() {
        let (r0, c0) = ann.nearest_pixel(i);
        let mut cells = Vec::new();
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                let (r, c) = (r0 as i64 + dr, c0 as i64 + dc);
                if r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols {
                    let w = (-((dr * dr + dc * dc) as f64) / (2.0 * sigma * sigma)).exp();
                    cells.push((r as usize * cols + c as usize, w));
                }
            }
        }
        let total: f64 = cells.iter().map(|c| c.1).sum();
        for (k, w) in cells {
            out[k] += w / total;
        }
    }
    out
}

#[test]
fn criterion_1_gradient_suite() {
    let _guard = serial();
    let started = Instant::now();
    let dm = DmCountConfig {
        sinkhorn: SinkhornConfig::new(10.0, 10_000, 1e-12).unwrap(),
        ..DmCountConfig::default()
    };
    let bayes = BayesianConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut failures = 0;
    let mut cases = 0;
    while cases < 20 {
        let z = random_map(6, 6, 0.1, &mut rng);
        let zhat = random_map(6, 6, 0.1, &mut rng);
        let (mu, nu) = (z.normalize(), zhat.normalize());
        if (z.total_mass() - zhat.total_mass()).abs() < 1e-2
            || mu.values().iter().zip(nu.values()).any(|(a, b)| (a - b).abs() <= 1e-3)
        {
            continue;
        }
        cases += 1;
        let dots = rng.random_range(1..=4);
        let points = (0..dots).map(|_| (rng.random_range(0.0..6.0), rng.random_range(0.0..6.0))).collect();
        let ann = DotAnnotation::new(6, 6, points).unwrap();

        type Loss<'a> = Box<dyn Fn(&DensityMap) -> LossEval + 'a>;
        let suite: Vec<(&str, Loss)> = vec![
            ("count", Box::new(|m| losses::count_loss(&z, m).unwrap())),
            ("ot", Box::new(|m| losses::ot_loss(&z, m, &dm).unwrap())),
            ("tv", Box::new(|m| losses::tv_loss(&z, m).unwrap())),
            ("dm_count", Box::new(|m| losses::dm_count_loss(&z, m, &dm).unwrap())),
            ("pixelwise_l2", Box::new(|m| losses::pixelwise_loss(&z, m, PixelNorm::L2).unwrap())),
            ("bayesian", Box::new(|m| losses::bayesian_loss(&ann, m, &bayes).unwrap())),
        ];
        for (k, (name, loss)) in suite.iter().enumerate() {
            let numeric = central_differences(&|m| loss(m).value, &zhat, 1e-4);
            let err = relative_error(&loss(&zhat).grad, &numeric);
            if err > 1e-2 {
                failures += 1;
            }
            if worst.len() <= k {
                worst.push((name, err));
            } else {
                worst[k].1 = worst[k].1.max(err);
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = failures == 0 && elapsed < Duration::from_secs(60);
    let detail = worst.iter().map(|(n, e)| format!("{n} {e:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(1, pass, &format!("max rel err: {detail}; {failures} failing cases; {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_2_sinkhorn_matches_exact_1d() {
    let _guard = serial();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SinkhornConfig::new(0.01, 5000, 1e-9).unwrap();
    let mut worst_ratio = 0.0f64;
    let mut oracle_gap = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=16);
        let (mu, nu) = (random_weights(n, &mut rng), random_weights(n, &mut rng));
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let exact = exact_ot_1d(&mu, &x, &nu, &x, 2.0).unwrap();
        oracle_gap = oracle_gap.max((exact - quantile_w2(&mu, &nu, &x)).abs());
        let a = DensityMap::new(1, n, mu).unwrap();
        let b = DensityMap::new(1, n, nu).unwrap();
        let cost = GridCost::new(1, n).unwrap();
        let value = ot::sinkhorn(&a, &b, &cost, &cfg).unwrap().value;
        worst_ratio = worst_ratio.max((value - exact).abs() / cost.max_cost());
    }
    let elapsed = started.elapsed();
    let pass = worst_ratio <= 0.02 && oracle_gap <= 1e-12 && elapsed < Duration::from_secs(30);
    verdict(
        2,
        pass,
        &format!("max |sinkhorn - exact| / C_inf = {worst_ratio:.2e}; oracle cross-check gap {oracle_gap:.1e}; {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_lipschitz_in_marginals() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    let mut tightest = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let spread = x.iter().copied().fold(f64::NEG_INFINITY, f64::max) - x.iter().copied().fold(f64::INFINITY, f64::min);
        let c_inf = spread * spread;
        let [m1, n1, m2, n2] = std::array::from_fn(|_| random_weights(n, &mut rng));
        let w1 = exact_ot_1d(&m1, &x, &n1, &x, 2.0).unwrap();
        let w2 = exact_ot_1d(&m2, &x, &n2, &x, 2.0).unwrap();
        let bound = c_inf * (l1(&m1, &m2) + l1(&n1, &n2));
        if (w1 - w2).abs() > bound + 1e-12 {
            violations += 1;
        }
        if bound > 0.0 {
            tightest = tightest.max((w1 - w2).abs() / bound);
        }
    }
    let pass = violations == 0;
    verdict(3, pass, &format!("{violations} violations in 200; largest |dW|/bound = {tightest:.3}"));
    assert!(pass);
}

#[test]
fn criterion_4_pixelwise_converges_to_smoothed_target() {
    let _guard = serial();
    let sigma = 4.0;
    let mut worst_fit = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut reference_gap = 0.0f64;
    let mut pass = true;
    for k in 0..10u64 {
        let n_dots = 50 + (k as usize * 17) % 151;
        let ann = descent::synth_target(64, 64, n_dots, 100 + k).unwrap();
        let n = n_dots as f64;
        let t = smoothing::smooth_fixed(&ann, &KernelSpec::new(sigma).unwrap()).unwrap();
        reference_gap = reference_gap.max(l1(t.values(), &smoothed_reference(&ann, sigma)));
        let z = ann.rasterize();
        let cfg = DescentConfig {
            eta: 1e-3,
            seed: k,
            loss: LossKind::PixelwiseL2 { sigma },
            ..DescentConfig::default()
        };
        let run = descent::descend(&ann, &cfg).unwrap();
        let fit = run.final_map.l1_distance(&t).unwrap();
        let identity = (run.final_map.l1_distance(&z).unwrap() - t.l1_distance(&z).unwrap()).abs();
        worst_fit = worst_fit.max(fit / n);
        worst_identity = worst_identity.max(identity / n);
        pass &= fit <= 0.01 * n && identity <= 0.02 * n;
    }
    pass &= reference_gap <= 1e-9;
    verdict(
        4,
        pass,
        &format!("max |final - t|_1 / N = {worst_fit:.2e}; max identity gap / N = {worst_identity:.2e}; smoothing vs reference {reference_gap:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_bayesian_is_underdetermined() {
    let _guard = serial();
    let ann = DotAnnotation::new(32, 32, vec![(15.3, 20.7)]).unwrap();
    let bayes = BayesianConfig::default();
    let runs: Vec<_> = [1u64, 2]
        .iter()
        .map(|&seed| {
            let cfg = DescentConfig {
                eta: 1e-6,
                seed,
                loss: LossKind::Bayesian(bayes),
                ..DescentConfig::default()
            };
            descent::descend(&ann, &cfg).unwrap()
        })
        .collect();
    let losses_at_end: Vec<f64> = runs
        .iter()
        .map(|r| losses::bayesian_loss(&ann, &r.final_map, &bayes).unwrap().value)
        .collect();
    let spread = runs[0].final_map.l1_distance(&runs[1].final_map).unwrap();

    // N = 1: the posterior is 1 everywhere, so the loss is |1 − mass| wherever the mass sits.
    let mut analytic = true;
    for (r, c) in [(0, 0), (31, 31), (15, 20), (0, 31)] {
        let m = DensityMap::point_mass(32, 32, r, c).unwrap();
        analytic &= losses::bayesian_loss(&ann, &m, &bayes).unwrap().value == 0.0;
        let heavy = m.scaled(2.5).unwrap();
        analytic &= losses::bayesian_loss(&ann, &heavy, &bayes).unwrap().value == 1.5;
    }
    let dyadic = DensityMap::from_fn(32, 32, |r, c| ((r * 32 + c) % 8) as f64 / 1024.0).unwrap();
    let eval = losses::bayesian_loss(&ann, &dyadic, &bayes).unwrap();
    analytic &= eval.value == (1.0 - dyadic.total_mass()).abs();
    let slope = -(1.0 - dyadic.total_mass()).signum();
    analytic &= eval.grad.iter().all(|&g| g == slope);

    let pass = losses_at_end.iter().all(|&l| l <= 1e-3) && spread >= 0.5 && analytic;
    verdict(
        5,
        pass,
        &format!(
            "final losses {:.2e}, {:.2e}; L1 between maps {spread:.3}; analytic N=1 case {}",
            losses_at_end[0],
            losses_at_end[1],
            if analytic { "exact" } else { "mismatch" }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_toy_comparison() {
    let _guard = serial();
    let started = Instant::now();
    let target = descent::synth_target(64, 64, 115, 7).unwrap();
    let plan = ComparePlan {
        base: DescentConfig {
            eta: 2e-4,
            window: 1000,
            seed: 0,
            ..DescentConfig::default()
        },
        ..ComparePlan::default()
    };
    let cmp = descent::compare_losses(&target, &plan).unwrap();
    let elapsed = started.elapsed();
    let [pix, bay, dm] = ["pixelwise_l2", "bayesian", "dm_count"].map(|n| cmp.get(n).unwrap());
    let ssim = |r: &descent::ToyResult| r.ssim.unwrap();
    let count_ok = dm.count_error() <= 0.01 * dm.target_count;
    let psnr_ok = dm.psnr > bay.psnr && bay.psnr > pix.psnr;
    let ssim_ok = ssim(dm) > ssim(bay) && ssim(bay) > ssim(pix);
    let time_ok = elapsed < Duration::from_secs(600);
    let pass = count_ok && psnr_ok && ssim_ok && time_ok;
    let row = |r: &descent::ToyResult| {
        format!(
            "{} count {:.3}/{} psnr {:.4} ssim {:.4} iters {}",
            r.loss,
            r.final_count,
            r.target_count,
            r.psnr,
            ssim(r),
            r.iterations_run
        )
    };
    verdict(
        6,
        pass,
        &format!(
            "{}; {}; {}; count {} psnr order {} ssim order {}; {elapsed:.1?}",
            row(dm),
            row(bay),
            row(pix),
            if count_ok { "ok" } else { "off" },
            if psnr_ok { "ok" } else { "violated" },
            if ssim_ok { "ok" } else { "violated" },
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_sinkhorn_speed() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mu = random_map(64, 64, 0.0, &mut rng).normalize();
    let nu = random_map(64, 64, 0.0, &mut rng).normalize();
    let cost = GridCost::new(64, 64).unwrap();
    let cfg = SinkhornConfig::new(10.0, 100, 0.0).unwrap();
    let started = Instant::now();
    let sol = ot::sinkhorn(&mu, &nu, &cost, &cfg).unwrap();
    let elapsed = started.elapsed();
    let pass = elapsed < Duration::from_secs(2) && sol.iterations_run == 100 && sol.value.is_finite();
    verdict(7, pass, &format!("64x64, 100 iterations in {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_8_invariants() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failed: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failed.push(what.to_string());
        }
    };

    for _ in 0..20 {
        let m = random_map(5, 7, 0.0, &mut rng).scaled(rng.random_range(1e-3..1e3)).unwrap();
        let once = normalize(&m);
        check(once.l1_distance(&normalize(&once)).unwrap() <= 8.0 * EPS_MACH, "normalize idempotence");

        let points: Vec<(f64, f64)> = (0..rng.random_range(0..30))
            .map(|_| (rng.random_range(0.0..16.0), rng.random_range(0.0..12.0)))
            .collect();
        let ann = DotAnnotation::new(16, 12, points).unwrap();
        let n = ann.len() as f64;
        check(ann.rasterize().total_mass() == n, "rasterize count");
        check(perturb_annotation(&ann, 0.0, 5).unwrap() == ann, "zero perturbation");
        let sigma = rng.random_range(0.5..5.0);
        let t = smoothing::smooth_fixed(&ann, &KernelSpec::new(sigma).unwrap()).unwrap();
        check((t.total_mass() - n).abs() <= 1e-9, "fixed smoothing count");
        check(t.values().iter().all(|v| v.is_finite() && *v >= 0.0), "fixed smoothing range");
        if !ann.is_empty() {
            let a = smoothing::smooth_adaptive(&ann, 3, 0.3).unwrap();
            check((a.total_mass() - n).abs() <= 1e-9, "adaptive smoothing count");
            let z = ann.rasterize();
            check(losses::pixelwise_loss(&t, &t, PixelNorm::L1).unwrap().value == 0.0, "smoothed fit");
            check(t.l1_distance(&z).unwrap() > 0.0, "smoothing residual");
        }

        let z = random_map(4, 4, 0.05, &mut rng);
        let zhat = random_map(4, 4, 0.05, &mut rng);
        let cfg = DmCountConfig::default();
        let tv = losses::tv_loss(&z, &zhat).unwrap().value;
        check((0.0..=1.0).contains(&tv), "tv bounds");
        check((tv - losses::tv_loss(&zhat, &z).unwrap().value).abs() <= 1e-15, "tv symmetry");
        check(losses::tv_loss(&z, &z).unwrap().value == 0.0, "tv identity");
        let c = rng.random_range(0.1..10.0);
        let scaled = zhat.scaled(c).unwrap();
        check((tv - losses::tv_loss(&z, &scaled).unwrap().value).abs() <= 1e-9, "tv scale invariance");
        let ot_value = losses::ot_loss(&z, &zhat, &cfg).unwrap().value;
        check((ot_value - losses::ot_loss(&z, &scaled, &cfg).unwrap().value).abs() <= 1e-9, "ot scale invariance");
        let total = losses::dm_count_loss(&z, &zhat, &cfg).unwrap().value;
        let parts = losses::count_loss(&z, &zhat).unwrap().value
            + cfg.lambda1 * ot_value
            + cfg.lambda2 * z.total_mass() * tv;
        check((total - parts).abs() <= 1e-12, "dm_count decomposition");

        let (mu, nu) = (z.normalize(), zhat.normalize());
        let cost = GridCost::new(4, 4).unwrap();
        let converged = SinkhornConfig::new(1.0, 100_000, 1e-10).unwrap();
        let fwd = ot::sinkhorn(&mu, &nu, &cost, &converged).unwrap();
        let bwd = ot::sinkhorn(&nu, &mu, &cost, &converged).unwrap();
        check((fwd.value - bwd.value).abs() <= 1e-9, "sinkhorn symmetry");
        let plan = transport_plan(&mu, &nu, &cost, &fwd.duals, 1.0).unwrap();
        let violation = l1(&plan.row_sums(), mu.values()) + l1(&plan.col_sums(), nu.values());
        check(violation <= 2.0 * 1e-10, "marginal feasibility");
        let by_reg: Vec<f64> = [10.0, 1.0, 0.1, 0.01]
            .iter()
            .map(|&reg| ot::sinkhorn(&mu, &nu, &cost, &SinkhornConfig::new(reg, 5000, 1e-9).unwrap()).unwrap().value)
            .collect();
        check(by_reg.windows(2).all(|w| w[1] <= w[0] + 1e-6), "monotone entropic bias");

        let pairs: Vec<CountPair> = (0..rng.random_range(1..10))
            .map(|_| CountPair::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)).unwrap())
            .collect();
        let m = metrics::count_metrics(&pairs).unwrap();
        check(m.mae <= m.rmse * (1.0 + 1e-12), "mae <= rmse");
        let a = random_map(12, 12, 0.0, &mut rng);
        let b = random_map(12, 12, 0.0, &mut rng);
        check(metrics::psnr(&a, &b).unwrap() == metrics::psnr(&b, &a).unwrap(), "psnr symmetry");
        check(
            (metrics::ssim(&a, &b).unwrap() - metrics::ssim(&b, &a).unwrap()).abs() <= 1e-12,
            "ssim symmetry",
        );
        check((metrics::ssim(&a, &a).unwrap() - 1.0).abs() <= 1e-9, "ssim identity");
    }

    let single = DotAnnotation::new(6, 6, vec![(2.0, 3.0)]).unwrap();
    let first = DensityMap::point_mass(6, 6, 0, 0).unwrap();
    let last = DensityMap::point_mass(6, 6, 5, 5).unwrap();
    let bayes = BayesianConfig::default();
    check(
        losses::bayesian_loss(&single, &first, &bayes).unwrap().value == 0.0
            && losses::bayesian_loss(&single, &last, &bayes).unwrap().value == 0.0
            && first.l1_distance(&last).unwrap() == 2.0,
        "bayesian underdetermination",
    );

    let target = descent::synth_target(16, 16, 10, 4).unwrap();
    let small = DescentConfig {
        eta: 1e-4,
        max_iters: 600,
        loss: LossKind::DmCount(DmCountConfig::default()),
        ..DescentConfig::default()
    };
    let run = descent::descend(&target, &small).unwrap();
    check(run == descent::descend(&target, &small).unwrap(), "descent determinism");
    check(run.final_map.values().iter().all(|v| *v >= 0.0), "descent nonnegativity");
    check(
        run.loss_trace.windows(2).all(|w| w[1].1 <= w[0].1 * 1.01),
        "dm_count trace within 1% per sample",
    );
    let pixel = descent::descend(
        &target,
        &DescentConfig {
            eta: 1e-3,
            max_iters: 3000,
            loss: LossKind::PixelwiseL2 { sigma: 2.0 },
            ..DescentConfig::default()
        },
    )
    .unwrap();
    check(pixel.loss_trace.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-6), "pixelwise trace monotone");
    let plan = ComparePlan {
        base: DescentConfig {
            eta: 1e-3,
            max_iters: 200,
            ..DescentConfig::default()
        },
        ..ComparePlan::default()
    };
    check(
        descent::compare_losses(&target, &plan).unwrap() == descent::compare_losses(&target, &plan).unwrap(),
        "comparison determinism",
    );

    let pass = failed.is_empty();
    failed.dedup();
    verdict(8, pass, &if pass { "all invariant checks hold".to_string() } else { failed.join(", ") });
    assert!(pass);
}
