//! One test per acceptance criterion. Each prints a single `PASS`/`FAIL` line
//! before asserting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use unlearn_core::accountant::{adaptive_deletion_bound, compose, gaussian_renyi, grid_renyi_1d, rdp_to_dp, Rule};
use unlearn_core::attacks::{counting_attack_run, median_attack_run, pgd_stream_divergence, CountingConfig, PgdConfig};
use unlearn_core::density::{Density1d, Grid1d};
use unlearn_core::experiments::{
    clipping_checks, convex_risk_table, lemma_checks, nonconvex_check, verify_deletion, DeletionExperiment,
    LemmaExperiment, NonconvexExperiment, RiskExperiment,
};
use unlearn_core::noisy_gd::GibbsGrid;
use unlearn_core::{LossModel, RenyiBound};

// written straight to stderr so the line survives libtest's output capture
fn verdict(id: &str, ok: bool, detail: String) {
    let line = format!("{} criterion {id}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn convex_example() -> DeletionExperiment {
    DeletionExperiment {
        n: 100,
        lambda: 1.0,
        beta: 3.0,
        lipschitz: 1.0,
        curvature: vec![1.0, 3.0],
        q: 2.0,
        eps_dp: 1.0,
        eps_dd: 0.1,
        steps: 10,
        k_delete_override: None,
    }
}

#[test]
fn criterion_01_convex_deletion_exact() {
    let exp = convex_example();
    let start = Instant::now();
    let report = verify_deletion(&exp, 1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = report.rows.len() == 10
        && report.rows.iter().all(|r| r.divergence <= exp.eps_dd && r.eps_dd == exp.eps_dd)
        && secs < 1.0;
    verdict(
        "1",
        ok,
        format!(
            "10 edits, K_U = {}, max divergence {:.3e} <= eps_dd {} in {secs:.3}s",
            report.recipe.k_delete, report.max_divergence, exp.eps_dd
        ),
    );
}

#[test]
fn criterion_01_negative_control_halved_k_delete() {
    let mut exp = convex_example();
    let k = exp.recipe().unwrap().k_delete;
    exp.k_delete_override = Some(k / 2);
    let report = verify_deletion(&exp, 1).unwrap();
    let exceeded = report.rows.iter().filter(|r| r.divergence > exp.eps_dd).count();
    verdict(
        "1 (negative control)",
        exceeded >= 1,
        format!(
            "K_U halved to {}: {exceeded} of {} steps exceed eps_dd {} (max divergence {:.3e})",
            k / 2,
            report.rows.len(),
            exp.eps_dd,
            report.max_divergence
        ),
    );
}

#[test]
fn criterion_02_convex_utility_bound() {
    let exp = RiskExperiment { instance: convex_example(), seeds: 10_000, noiseless: false };
    let rows = convex_risk_table(&exp, 2).unwrap();
    let worst = rows.iter().map(|r| r.mean - (r.bound + 3.0 * r.std_err)).fold(f64::NEG_INFINITY, f64::max);
    let ok = rows.len() == 11 && worst <= 0.0;
    verdict(
        "2",
        ok,
        format!(
            "{} seeds, {} releases, bound {:.4e}, worst mean - (bound + 3se) = {worst:.3e}",
            exp.seeds,
            rows.len(),
            rows[0].bound
        ),
    );
}

#[test]
fn criterion_03_accuracy_and_edit_lemmas() {
    let rows = lemma_checks(&LemmaExperiment { instances: 20, samples: 4_000 }, 3).unwrap();
    let acc = rows.iter().filter(|r| r.accuracy_ok).count();
    let edit = rows.iter().filter(|r| r.edit_ok).count();
    verdict(
        "3",
        rows.len() == 20 && acc == 20 && edit == 20,
        format!("accuracy lemma {acc}/20, edit lemma {edit}/20 random quadratic instances"),
    );
}

#[test]
fn criterion_04_counting_attack() {
    let eps = 1.0;
    let deletion_step = 5;
    let mut best = (0usize, 0.0f64);
    let mut offsets = true;
    let mut series_err = 0.0f64;
    for observed in [1usize, 50, 100, 200] {
        let cfg = CountingConfig { n: 100, deletion_step, observed, eps, trials: 1_000 };
        let (report, ok) = counting_attack_run(&cfg, 4).unwrap();
        offsets &= ok;
        if report.success_rate > best.1 {
            best = (observed, report.success_rate);
        }
        let mut s = 0.0;
        for (k, c) in report.divergence_series.iter().enumerate() {
            s += eps / (deletion_step + k) as f64;
            series_err = series_err.max((c - s).abs());
        }
        series_err = series_err.max((report.divergence_series.len() as f64 - observed as f64).abs());
    }
    verdict(
        "4",
        offsets && series_err <= 1e-10 && best.1 >= 0.99,
        format!(
            "offsets in [0,1]: {offsets}; series error {series_err:.1e}; best accuracy {:.3} at {} observed releases (target 0.99)",
            best.1, best.0
        ),
    );
}

#[test]
fn criterion_05_median_attack() {
    let d0: Vec<f64> = (0..101).map(f64::from).collect();
    let mut lines = Vec::new();
    let mut ok = true;
    for step in [4usize, 5, 6, 8, 10] {
        let r = median_attack_run(&d0, step, 10_000, 5 + step as u64).unwrap();
        let bound = 1.0 - 0.5f64.powi(step as i32 - 3);
        ok &= r.success_rate >= bound - 3.0 * r.std_err;
        lines.push(format!("i={step}: {:.4} vs {bound:.4}", r.success_rate));
    }
    verdict("5", ok, format!("n=101, 10^4 trials each; {}", lines.join(", ")));
}

#[test]
fn criterion_06_pgd_streaming_violation() {
    let cfg = PgdConfig {
        lambda: 1.0,
        beta: 3.0,
        lipschitz: 3.0,
        n: 10,
        k_unlearn: 4,
        eps: 1.0,
        delta: (-1f64).exp(),
        q: 2.0,
    };
    let m = 20;
    let div = pgd_stream_divergence(&cfg, m).unwrap();

    // geometric closed form of the mean gap between the two streams
    let gamma = (cfg.beta - cfg.lambda) / (cfg.beta + cfg.lambda);
    let r = cfg.lipschitz / cfg.beta;
    let base = 2.0 * r * (1.0 - gamma.powi(div.k_learn as i32)) / cfg.n as f64;
    let g2 = gamma.powi(2 * cfg.k_unlearn as i32);
    let a = cfg.q * base * base / (2.0 * div.sigma * div.sigma);
    let closed = a * g2 * (1.0 - g2.powi(m as i32)) / (1.0 - g2);
    let termwise: f64 = div.empirical_series.iter().sum();
    let err = (closed - termwise).abs();

    let single = rdp_to_dp(&RenyiBound::new(cfg.q, div.empirical_series[0], Rule::Composition).unwrap(), cfg.delta)
        .unwrap()
        .epsilon;
    let crossing = div.crossing;
    let crossing_ok = match crossing {
        Some(k) => {
            let total: f64 = div.empirical_series[..k].iter().sum();
            let view =
                rdp_to_dp(&RenyiBound::new(cfg.q, total, Rule::Composition).unwrap(), cfg.delta).unwrap().epsilon;
            k <= m && view > single
        }
        None => false,
    };
    verdict(
        "6",
        err <= 1e-10 && (div.closed_form_total - closed).abs() <= 1e-10 && crossing_ok,
        format!(
            "closed form {closed:.6e} vs term-wise sum {termwise:.6e} (|diff| {err:.1e}); cumulative view exceeds the single-release budget {single:.6} at m = {crossing:?}"
        ),
    );
}

fn grid_pair(q: f64, dmu: f64, var: f64) -> f64 {
    // the integrand p^q r^(1-q) is centred at q·dmu
    let sd = var.sqrt();
    let grid = Grid1d::new(-16.0 * sd, q * dmu + 16.0 * sd, (1 << 15) + 1).unwrap();
    let p = Density1d::from_log_fn(grid, |x| -(x - dmu).powi(2) / (2.0 * var)).unwrap();
    let r = Density1d::from_log_fn(grid, |x| -x * x / (2.0 * var)).unwrap();
    grid_renyi_1d(&p, &r, q).unwrap()
}

#[test]
fn criterion_07_accountant() {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for q in [1.5, 2.0, 5.0] {
        for dmu in [0.0, 0.5, 2.0] {
            for var in [0.25, 1.0, 4.0] {
                let exact = gaussian_renyi(q, &[dmu], &[0.0], var).unwrap().epsilon;
                worst = worst.max((exact - grid_pair(q, dmu, var)).abs());
                cases += 1;
            }
        }
    }
    let b = |q: f64, e: f64| RenyiBound::new(q, e, Rule::GaussianClosedForm).unwrap();
    let additive = compose(2.0, &[b(2.0, 0.25), b(2.0, 0.5), b(2.0, 1.0)]).unwrap().epsilon == 1.75;
    let orders = [1.5, 2.0, 3.0, 8.0, 32.0];
    let monotone = orders.windows(2).all(|w| {
        gaussian_renyi(w[0], &[0.3, -0.2], &[0.0, 0.1], 0.7).unwrap().epsilon
            <= gaussian_renyi(w[1], &[0.3, -0.2], &[0.0, 0.1], 0.7).unwrap().epsilon
    });
    let conv = rdp_to_dp(&b(3.0, 0.5), 1e-5).unwrap().epsilon;
    let conversion = conv == 0.5 + (1e5f64).ln() / 2.0;
    let linear = (0..6).all(|p| {
        let e = adaptive_deletion_bound(2.0, 0.125, 0.5, p).unwrap().epsilon;
        e == 0.125 + 0.5 * p as f64
    });
    verdict(
        "7",
        cases == 27 && worst <= 1e-3 && additive && monotone && conversion && linear,
        format!(
            "{cases} grid cases, max |closed - grid| {worst:.2e}; additivity {additive}, monotone in q {monotone}, conversion {conversion}, adaptive linearity {linear}"
        ),
    );
}

#[test]
fn criterion_08_nonconvex_gibbs() {
    let exp = NonconvexExperiment {
        n: 8,
        lambda: 1.0,
        bound_b: 0.5f64.exp(),
        sigma2: 1.0,
        q: 2.0,
        eps_dp: 0.9,
        eps_dd: 0.5,
        samples: 100_000,
        bins: 256,
        k_cap: 1_000_000,
        grid: GibbsGrid::default(),
    };
    let r = nonconvex_check(&exp, 8).unwrap();
    verdict(
        "8",
        r.divergence_ok && r.risk_ok && r.k == r.recipe.k_learn.min(exp.k_cap),
        format!(
            "K = {}, eta = {:.4e}: R_2 estimate {:.4e} <= bound {:.4e} + {}; Gibbs risk {:.4} +- {:.4} vs bound {:.4}",
            r.k,
            r.recipe.eta,
            r.renyi_estimate,
            r.convergence_bound,
            r.tolerance,
            r.gibbs_risk.mean,
            r.gibbs_risk.std_err,
            r.gibbs_bound
        ),
    );
}

#[test]
fn criterion_09_clipping_lemmas() {
    let cases = [
        ("quadratic diag(1,3)", LossModel::quadratic_2d(1.0, 3.0, 1.0).unwrap(), 0.5, 1.0, 2.0),
        ("quadratic isotropic", LossModel::isotropic(3, 1.0).unwrap(), 0.5, 1.0, 2.0),
        ("ridge", LossModel::ridge(3, 1.0, 2.0).unwrap(), 0.5, 1.0, 2.0),
        ("logistic", LossModel::logistic(3, 2.0).unwrap(), 0.5, 2.0, 3.0),
        ("bounded non-convex", LossModel::bounded_nonconvex(3, 1.0).unwrap(), 0.3, 1.0, 3.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (label, loss, clip, rr, tr)) in cases.iter().enumerate() {
        let row = clipping_checks(loss, *clip, 100_000, *rr, *tr, 90 + i as u64).unwrap();
        ok &= row.smooth_ok && row.monotone_ok;
        parts.push(format!(
            "{label}: smooth {:.3} monotone {}",
            row.max_smoothness_ratio,
            row.min_monotone.map_or("n/a".to_string(), |m| format!("{m:.2e}"))
        ));
    }
    verdict("9", ok, format!("10^5 pairs per loss; {}", parts.join("; ")));
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

type RunResult = (i32, Vec<u8>, Vec<(String, Vec<u8>)>);

fn run_once(args: &[&str], out: &Path) -> RunResult {
    let _ = std::fs::remove_dir_all(out);
    let o = Command::new(env!("CARGO_BIN_EXE_unlearn")).args(args).arg("--out").arg(out).output().expect("binary runs");
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .map(|it| {
            it.map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect()
        })
        .unwrap_or_default();
    files.sort();
    (o.status.code().unwrap_or(-1), o.stdout, files)
}

#[test]
fn criterion_10_reproducibility() {
    let runs: [(&str, &[&str]); 10] = [
        ("recipe", &["recipe", "--config", "recipe_convex.toml"]),
        ("recipe", &["recipe", "--config", "recipe_nonconvex.toml"]),
        ("verify-deletion", &["verify-deletion", "--config", "verify_deletion.toml"]),
        ("risk", &["risk", "--config", "risk_convex.toml", "--trials", "300"]),
        ("risk", &["risk", "--config", "risk_noiseless.toml"]),
        ("attack", &["attack", "counting", "--config", "attack_counting.toml", "--trials", "100"]),
        ("attack", &["attack", "median", "--config", "attack_median.toml", "--trials", "1000"]),
        ("attack", &["attack", "pgd", "--config", "attack_pgd.toml"]),
        ("accountant", &["accountant", "--config", "accountant_conversion.toml"]),
        ("accountant", &["accountant", "--config", "accountant_gaussian.toml"]),
    ];
    let base = std::env::temp_dir().join(format!("unlearn-acceptance-{}", std::process::id()));
    let mut ok = true;
    let mut mismatched = Vec::new();
    for (i, (name, args)) in runs.iter().enumerate() {
        let args: Vec<String> = args
            .iter()
            .map(
                |a| if a.ends_with(".toml") { configs().join(a).to_string_lossy().into_owned() } else { a.to_string() },
            )
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = run_once(&args, &base.join(format!("{i}a")));
        let b = run_once(&args, &base.join(format!("{i}b")));
        let same = a.0 == 0 && a == b && !a.2.is_empty();
        if !same {
            mismatched.push(format!("{name} (exit {} / {})", a.0, b.0));
        }
        ok &= same;
    }
    let _ = std::fs::remove_dir_all(&base);
    verdict(
        "10",
        ok,
        format!(
            "{} subcommand runs, stdout and output files byte-identical across reruns; mismatches: {mismatched:?}",
            runs.len()
        ),
    );
}
