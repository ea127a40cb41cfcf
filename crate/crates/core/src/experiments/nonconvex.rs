use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accountant::{gibbs_excess_risk_bound, grid_renyi_1d, histogram_renyi, nonconvex_convergence_bound};
use crate::density::Density1d;
use crate::error::{invalid, Result};
use crate::model::{mean_and_stderr, Database, LossModel, ModelParams, Objective, RiskEstimate};
use crate::noisy_gd::{
    gibbs_oracle_1d, noisy_gd_run, nonconvex_recipe, BudgetSpec, GibbsGrid, NonconvexInstance, RecipeParams,
};
use crate::rng::{derive_seed, stream_rng};
use crate::Scalar;

/// One-dimensional bounded non-convex instance with `σ²` fixed up front and
/// loss amplitude `σ²·ln(B)/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonconvexExperiment {
    pub n: usize,
    pub lambda: f64,
    pub bound_b: f64,
    pub sigma2: f64,
    pub q: f64,
    pub eps_dp: f64,
    pub eps_dd: f64,
    pub samples: usize,
    pub bins: usize,
    /// Iterations actually run are `min(K_A, k_cap)`.
    pub k_cap: usize,
    #[serde(default)]
    pub grid: GibbsGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonconvexReport {
    pub recipe: RecipeParams<f64>,
    pub amplitude: f64,
    pub k: usize,
    /// `R_q(ρ‖π(D))` of the initialization, by quadrature.
    pub initial_divergence: f64,
    pub renyi_estimate: f64,
    pub convergence_bound: f64,
    pub tolerance: f64,
    pub divergence_ok: bool,
    pub gibbs_risk: RiskEstimate,
    pub gibbs_bound: f64,
    pub risk_ok: bool,
}

fn records(n: usize, root: u64) -> Result<Database<f64>> {
    let mut rng = stream_rng(root, 0);
    Database::from_rows((0..n).map(|_| vec![rng.random_range(-1.0..=1.0)]).collect())
}

/// Global minimizer of a 1-D objective on `[-w, w]`: dense scan plus golden-section polish.
fn minimize_1d(f: impl Fn(f64) -> f64, w: f64) -> f64 {
    let m = 20_000;
    let h = 2.0 * w / m as f64;
    let best = (0..=m).map(|i| -w + h * i as f64).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap_or(0.0);
    let (mut a, mut b) = (best - h, best + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Distance of Noisy-GD from its Gibbs limit, and Gibbs near-optimality, in 1-D.
pub fn nonconvex_check(exp: &NonconvexExperiment, root: u64) -> Result<NonconvexReport> {
    if exp.samples < 2 || exp.bins == 0 {
        return Err(invalid("samples/bins", "need at least two samples and one bin"));
    }
    let amplitude = LossModel::nonconvex_amplitude(exp.sigma2, exp.bound_b);
    let loss = LossModel::bounded_nonconvex(1, amplitude)?;
    let inst = NonconvexInstance {
        lambda: exp.lambda,
        beta: loss.smoothness,
        lipschitz: loss.lipschitz,
        bound_b: exp.bound_b,
        n: exp.n,
        d: 1,
        edit_batch_size: 1,
    };
    let recipe = nonconvex_recipe(&inst, &BudgetSpec::new(exp.q, exp.eps_dp, exp.eps_dd)?)?
        .with_sigma2(exp.sigma2, exp.lambda)?;
    let obj = Objective::new(loss, exp.lambda, None)?;
    let db = records(exp.n, root)?;
    let k = recipe.k_learn.min(exp.k_cap);

    let gibbs = gibbs_oracle_1d(&obj, &db, exp.sigma2, &exp.grid)?;
    let init_var = recipe.init_variance;
    let init = Density1d::from_log_fn(*gibbs.grid(), |x| -x * x / (2.0 * init_var))?;
    let initial_divergence = grid_renyi_1d(&init, &gibbs, exp.q)?;

    let seed = derive_seed(root, 1);
    let finals = (0..exp.samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let theta0 = ModelParams(vec![init_var.sqrt() * <f64 as Scalar>::standard_normal(&mut rng)]);
            noisy_gd_run(&obj, &db, &theta0, k, recipe.eta, recipe.sigma2, &mut rng).map(|m| m.0[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let renyi_estimate = histogram_renyi(&finals, &gibbs, exp.bins, exp.q)?;
    let convergence_bound =
        nonconvex_convergence_bound(exp.q, exp.lambda, recipe.eta, k, exp.bound_b, 1, inst.beta, initial_divergence)?;
    let tolerance = 0.05;

    let value = |x: f64| obj.value(&db, &ModelParams(vec![x])).unwrap_or(f64::INFINITY);
    let star = minimize_1d(value, amplitude / exp.lambda + 1e-9);
    let f_star = value(star);
    let gibbs_seed = derive_seed(root, 2);
    let gaps: Vec<f64> = (0..exp.samples)
        .into_par_iter()
        .map(|t| value(gibbs.sample(&mut stream_rng(gibbs_seed, t as u64))) - f_star)
        .collect();
    let gibbs_risk = mean_and_stderr(&gaps);
    let gibbs_bound = gibbs_excess_risk_bound(1, exp.sigma2, exp.lambda, inst.beta, exp.bound_b)?;

    Ok(NonconvexReport {
        divergence_ok: renyi_estimate <= convergence_bound + tolerance,
        risk_ok: gibbs_risk.mean <= gibbs_bound + 3.0 * gibbs_risk.std_err,
        recipe,
        amplitude,
        k,
        initial_divergence,
        renyi_estimate,
        convergence_bound,
        tolerance,
        gibbs_risk,
        gibbs_bound,
    })
}
