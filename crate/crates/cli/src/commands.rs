use serde::Serialize;
use serde_json::{json, Value};
use unlearn_core::accountant::{
    adaptive_deletion_bound, bounded_perturbation_renyi, compose, gaussian_renyi, rdp_noisy_gd_convex,
    rdp_noisy_gd_lipschitz, rdp_to_dp, weak_triangle, Rule,
};
use unlearn_core::attacks::{counting_attack_run, median_attack_run, pgd_stream_divergence, AttackReport};
use unlearn_core::experiments::{self, convex_risk_table};
use unlearn_core::noisy_gd::{convex_recipe, nonconvex_recipe};
use unlearn_core::RenyiBound;

use crate::config::{AccountantSection, AttackSection, Config, RecipeSection};
use crate::output::{csv_file, json, json_file, jsonl_file, OutFile};
use crate::Failure;

/// What a subcommand produced: a one-line JSON summary for stdout, files for
/// `--out`, and whether its assertion held.
pub struct Outcome {
    pub summary: String,
    pub files: Vec<OutFile>,
    pub passed: bool,
    pub assertion: &'static str,
}

impl Outcome {
    fn ok(summary: String, files: Vec<OutFile>) -> Self {
        Outcome { summary, files, passed: true, assertion: "" }
    }
}

pub fn recipe(cfg: &Config) -> Result<Outcome, Failure> {
    let params = match cfg.section("recipe", &cfg.recipe)? {
        RecipeSection::Convex { instance, budget } => {
            budget.validate()?;
            convex_recipe(instance, budget)?
        }
        RecipeSection::Nonconvex { instance, budget, sigma2 } => {
            budget.validate()?;
            let p = nonconvex_recipe(instance, budget)?;
            match sigma2 {
                Some(s2) => p.with_sigma2(*s2, instance.lambda)?,
                None => p,
            }
        }
    };
    params.validate()?;
    Ok(Outcome::ok(params.to_json(), vec![json_file("recipe.json", &params)?]))
}

pub fn verify_deletion(cfg: &Config, seed: u64) -> Result<Outcome, Failure> {
    let exp = cfg.section("deletion", &cfg.deletion)?;
    exp.validate()?;
    let report = experiments::verify_deletion(exp, seed)?;
    let summary = json!({
        "steps": report.rows.len(),
        "k_delete": report.recipe.k_delete,
        "eps_dd": exp.eps_dd,
        "max_divergence": report.max_divergence,
        "within_budget": report.within_budget,
    });
    Ok(Outcome {
        summary: json(&summary)?,
        files: vec![
            jsonl_file("deletion.jsonl", &report.rows)?,
            csv_file("deletion.csv", &report.rows)?,
            json_file("recipe.json", &report.recipe)?,
        ],
        passed: report.within_budget,
        assertion: "a deletion divergence exceeds eps_dd",
    })
}

pub fn risk(cfg: &Config, seed: u64, trials: Option<usize>) -> Result<Outcome, Failure> {
    let mut exp = cfg.section("risk", &cfg.risk)?.clone();
    if let Some(t) = trials {
        exp.seeds = t;
    }
    exp.instance.validate()?;
    let rows = convex_risk_table(&exp, seed)?;
    let (passed, assertion) = if exp.noiseless {
        let ok = rows.iter().all(|r| r.mean <= r.envelope * (1.0 + 1e-9) + 1e-15);
        (ok, "noiseless risk exceeds the accuracy envelope")
    } else {
        let ok = rows.iter().all(|r| r.mean <= r.bound + 3.0 * r.std_err);
        (ok, "measured risk exceeds the utility bound plus 3 standard errors")
    };
    let worst = rows.iter().map(|r| r.mean).fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "seeds": exp.seeds,
        "steps": rows.len(),
        "bound": rows.first().map(|r| r.bound),
        "max_mean": worst,
        "noiseless": exp.noiseless,
        "passed": passed,
    });
    Ok(Outcome {
        summary: json(&summary)?,
        files: vec![jsonl_file("risk.jsonl", &rows)?, csv_file("risk.csv", &rows)?],
        passed,
        assertion,
    })
}

pub fn attack_name(section: &AttackSection) -> &'static str {
    match section {
        AttackSection::Counting(_) => "counting",
        AttackSection::Median(_) => "median",
        AttackSection::Pgd(_) => "pgd",
    }
}

#[derive(Serialize)]
struct AttackSummaryRow<'a> {
    attack: &'a str,
    trials: usize,
    successes: usize,
    ties: usize,
    success_rate: f64,
    std_err: f64,
    theoretical_bound: Option<f64>,
}

impl<'a> From<&'a AttackReport> for AttackSummaryRow<'a> {
    fn from(r: &'a AttackReport) -> Self {
        AttackSummaryRow {
            attack: &r.attack,
            trials: r.trials,
            successes: r.successes,
            ties: r.ties,
            success_rate: r.success_rate,
            std_err: r.std_err,
            theoretical_bound: r.theoretical_bound,
        }
    }
}

#[derive(Serialize)]
struct SeriesRow {
    release: usize,
    value: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct CumulativeRow {
    release: usize,
    cumulative: f64,
}

fn series(values: &[f64]) -> Vec<SeriesRow> {
    let mut total = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            total += v;
            SeriesRow { release: i + 1, value: v, cumulative: total }
        })
        .collect()
}

fn report_files(report: &AttackReport) -> Result<Vec<OutFile>, Failure> {
    let mut files = vec![json_file("attack.json", report)?, csv_file("attack.csv", &[AttackSummaryRow::from(report)])?];
    if !report.divergence_series.is_empty() {
        let rows: Vec<CumulativeRow> = report
            .divergence_series
            .iter()
            .enumerate()
            .map(|(i, &c)| CumulativeRow { release: i + 1, cumulative: c })
            .collect();
        files.push(jsonl_file("series.jsonl", &rows)?);
    }
    Ok(files)
}

pub fn attack(section: &AttackSection, seed: u64, trials: Option<usize>) -> Result<Outcome, Failure> {
    match section {
        AttackSection::Counting(c) => {
            let mut c = *c;
            if let Some(t) = trials {
                c.trials = t;
            }
            c.validate()?;
            let (report, offsets_ok) = counting_attack_run(&c, seed)?;
            Ok(Outcome {
                summary: json(&AttackSummaryRow::from(&report))?,
                files: report_files(&report)?,
                passed: offsets_ok,
                assertion: "a per-release count offset left [0, 1]",
            })
        }
        AttackSection::Median(m) => {
            let trials = trials.unwrap_or(m.trials);
            let d0: Vec<f64> = (0..m.n).map(|i| i as f64).collect();
            let report = median_attack_run(&d0, m.step, trials, seed)?;
            let bound = report.theoretical_bound.unwrap_or(0.0);
            Ok(Outcome {
                summary: json(&AttackSummaryRow::from(&report))?,
                files: report_files(&report)?,
                passed: report.success_rate >= bound - 3.0 * report.std_err,
                assertion: "median attack success rate below the bound minus 3 standard errors",
            })
        }
        AttackSection::Pgd(p) => {
            let div = pgd_stream_divergence(&p.config(), p.releases)?;
            let agree = (div.closed_form_total - div.empirical_total).abs() <= 1e-10 * div.closed_form_total.max(1.0);
            let summary = json!({
                "attack": "pgd",
                "sigma": div.sigma,
                "k_learn": div.k_learn,
                "releases": p.releases,
                "closed_form_total": div.closed_form_total,
                "empirical_total": div.empirical_total,
                "closed_form_limit": div.closed_form_limit,
                "single_release_budget": div.single_release_budget,
                "worst_case_budget": div.worst_case_budget,
                "crossing": div.crossing,
                "worst_case_crossing": div.worst_case_crossing,
            });
            let mut files =
                vec![json_file("pgd.json", &div)?, jsonl_file("series.jsonl", &series(&div.closed_form_terms))?];
            files.push(jsonl_file("empirical_series.jsonl", &series(&div.empirical_series))?);
            Ok(Outcome {
                summary: json(&summary)?,
                files,
                passed: agree && div.crossing.is_some(),
                assertion: "closed form disagrees with the trajectory sum, or no crossing within the release count",
            })
        }
    }
}

fn rule_name(rule: Rule) -> Value {
    serde_json::to_value(rule).unwrap_or(Value::Null)
}

pub fn accountant(cfg: &Config) -> Result<Outcome, Failure> {
    let section = cfg.section("accountant", &cfg.accountant)?;
    let bound = |q: f64, e: f64| RenyiBound::new(q, e, Rule::Composition);
    let (q, epsilon, rule, delta) = match section {
        AccountantSection::GaussianClosedForm { q, mu1, mu2, sigma2 } => {
            let b = gaussian_renyi(*q, mu1, mu2, *sigma2)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::NoisyGdLipschitz { q, lipschitz, sigma2, n, eta, k } => {
            let b = rdp_noisy_gd_lipschitz(*q, *lipschitz, *sigma2, *n, *eta, *k)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::NoisyGdConvex { q, lipschitz, lambda, beta, sigma2, n, eta, k } => {
            let b = rdp_noisy_gd_convex(*q, *lipschitz, *lambda, *beta, *sigma2, *n, *eta, *k)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::Composition { q, epsilons } => {
            let parts = epsilons.iter().map(|&e| bound(*q, e)).collect::<Result<Vec<_>, _>>()?;
            let b = compose(*q, &parts)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::AdaptiveDeletion { q, eps_dd, eps_dp, p } => {
            let b = adaptive_deletion_bound(*q, *eps_dd, *eps_dp, *p)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::BoundedPerturbation { q, c, sigma2 } => {
            let b = bounded_perturbation_renyi(*q, *c, *sigma2)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::WeakTriangle { q, a_to_mid, mid_to_b_sup } => {
            let b = weak_triangle(&bound(*q, *a_to_mid)?, *mid_to_b_sup)?;
            (b.order, b.epsilon, b.provenance, None)
        }
        AccountantSection::Conversion { q, epsilon, delta } => {
            let dp = rdp_to_dp(&bound(*q, *epsilon)?, *delta)?;
            (*q, dp.epsilon, dp.provenance, Some(dp.delta))
        }
    };
    let mut inputs = serde_json::to_value(section).map_err(|e| Failure::Compute(e.to_string()))?;
    if let Value::Object(map) = &mut inputs {
        map.remove("rule");
    }
    let mut report = json!({ "rule": rule_name(rule), "inputs": inputs, "epsilon": epsilon, "q": q });
    if let Some(d) = delta {
        report["delta"] = json!(d);
    }
    let text = json(&report)?;
    Ok(Outcome::ok(text, vec![json_file("accountant.json", &report)?]))
}
