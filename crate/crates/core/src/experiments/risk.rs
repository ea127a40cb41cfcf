use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deletion::{DeletionExperiment, DeletionInstance};
use crate::accountant::{accuracy_bound, convex_utility_bound};
use crate::error::{invalid, Result};
use crate::model::{apply_edit, mean_and_stderr, quadratic_minimizer, Database, ModelParams};
use crate::noisy_gd::{delete, learn};
use crate::rng::{derive_seed, stream_rng};
use crate::stream::stream_laws;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskExperiment {
    pub instance: DeletionExperiment,
    pub seeds: usize,
    /// Run with `σ² = 0` and a zero initialization.
    #[serde(default)]
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub step: usize,
    pub mean: f64,
    pub std_err: f64,
    /// Exact expected excess risk from the Gaussian law of the release.
    pub exact: f64,
    /// `10κqdL²/(λ·ε_dp·n²)`.
    pub bound: f64,
    /// Accuracy-lemma envelope from the previous release's risk on the new database.
    pub envelope: f64,
}

/// Monte-Carlo excess risk of every release of the convex-recipe stream.
pub fn convex_risk_table(exp: &RiskExperiment, root: u64) -> Result<Vec<RiskRow>> {
    if exp.seeds < 2 {
        return Err(invalid("seeds", "need at least two seeds for a standard error"));
    }
    let ie = &exp.instance;
    let mut recipe = ie.recipe()?;
    let inst = DeletionInstance::generate(ie, root)?;
    let obj = &inst.objective;
    let steps = ie.steps;

    let mut dbs = vec![inst.d0.clone()];
    for u in &inst.edits {
        let next = apply_edit(dbs.last().expect("non-empty"), u)?;
        dbs.push(next);
    }
    let stars = dbs.iter().map(|d| quadratic_minimizer(obj, d)).collect::<Result<Vec<_>>>()?;
    let base: Vec<f64> = dbs.iter().zip(&stars).map(|(d, s)| obj.value(d, s)).collect::<Result<_>>()?;
    let gap =
        |i: usize, db: &Database<f64>, theta: &ModelParams<f64>| -> Result<f64> { Ok(obj.value(db, theta)? - base[i]) };

    let exact: Vec<f64> = if exp.noiseless {
        vec![f64::NAN; steps + 1]
    } else {
        stream_laws(obj, &inst.d0, &recipe, &inst.edits, steps)?
            .iter()
            .zip(&dbs)
            .map(|(law, d)| law.expected_excess_risk(obj, d))
            .collect::<Result<_>>()?
    };
    if exp.noiseless {
        recipe.sigma2 = 0.0;
        recipe.init_variance = 0.0;
    }

    // per seed: (risk of release i on D_i, risk of release i−1 on D_i)
    let runs = (0..exp.seeds)
        .into_par_iter()
        .map(|t| -> Result<Vec<(f64, f64)>> {
            let seed = derive_seed(root, t as u64 + 1);
            let mut theta = learn(obj, &dbs[0], &recipe, &mut stream_rng(seed, 0))?;
            let mut out = vec![(gap(0, &dbs[0], &theta)?, f64::NAN)];
            for (i, u) in inst.edits.iter().enumerate() {
                let before = gap(i + 1, &dbs[i + 1], &theta)?;
                theta = delete(obj, &dbs[i], u, &theta, &recipe, &mut stream_rng(seed, i as u64 + 1))?;
                out.push((gap(i + 1, &dbs[i + 1], &theta)?, before));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let d = ie.curvature.len();
    let kappa = recipe.kappa.expect("convex recipe");
    let bound = convex_utility_bound(kappa, ie.q, d, ie.lipschitz, ie.lambda, ie.eps_dp, ie.n);
    let init_risk = if exp.noiseless {
        gap(0, &dbs[0], &ModelParams::zeros(d))?
    } else {
        crate::noisy_gd::GaussianLaw::isotropic(d, recipe.init_variance).expected_excess_risk(obj, &dbs[0])?
    };
    let mut rows = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let after: Vec<f64> = runs.iter().map(|r| r[step].0).collect();
        let est = mean_and_stderr(&after);
        let (err0, k) = if step == 0 {
            (init_risk, recipe.k_learn)
        } else {
            let before: Vec<f64> = runs.iter().map(|r| r[step].1).collect();
            (mean_and_stderr(&before).mean, recipe.k_delete)
        };
        rows.push(RiskRow {
            step,
            mean: est.mean,
            std_err: est.std_err,
            exact: exact[step],
            bound,
            envelope: accuracy_bound(err0, ie.lambda, recipe.eta, k, kappa, d, recipe.sigma2),
        });
    }
    Ok(rows)
}
