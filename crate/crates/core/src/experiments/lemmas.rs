use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accountant::{accuracy_bound, edit_risk_bound};
use crate::error::{invalid, Result};
use crate::model::{
    apply_edit, mean_and_stderr, quadratic_minimizer, Database, EditRequest, LossModel, ModelParams, Objective, Record,
    Replacement,
};
use crate::noisy_gd::{noisy_gd_run, GaussianLaw};
use crate::rng::{derive_seed, stream_rng};
use crate::vector;

/// Random quadratic instances for the accuracy and edit-perturbation lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaExperiment {
    pub instances: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub instance: usize,
    pub d: usize,
    pub n: usize,
    pub lambda: f64,
    pub beta: f64,
    pub sigma2: f64,
    pub k: usize,
    pub batch: usize,
    pub init_risk: f64,
    pub risk: f64,
    pub risk_std_err: f64,
    pub accuracy_bound: f64,
    pub accuracy_ok: bool,
    /// Largest per-record gradient norm over samples, records and both minimizers.
    pub lipschitz: f64,
    pub edited_risk: f64,
    pub edited_std_err: f64,
    pub edit_bound: f64,
    pub edit_ok: bool,
}

fn unit_ball_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if vector::norm(&p) <= 1.0 {
            return p;
        }
    }
}

fn one_instance(exp: &LemmaExperiment, root: u64, idx: usize) -> Result<LemmaRow> {
    let mut rng = stream_rng(root, idx as u64);
    let d = rng.random_range(1..=3);
    let n = rng.random_range(20..=60);
    let curvature: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..=3.0)).collect();
    let beta = curvature.iter().cloned().fold(0.0, f64::max);
    let lambda = rng.random_range(0.5..=2.0);
    let sigma2 = rng.random_range(1e-3..=1e-2);
    let k = rng.random_range(5..=60);
    let init_var = rng.random_range(0.5..=2.0);
    let batch = rng.random_range(1..=3);
    let kappa = (lambda + beta) / lambda;
    let eta = 1.0 / (2.0 * (lambda + beta));

    let rows: Vec<Vec<f64>> = (0..n).map(|_| unit_ball_point(d, &mut rng)).collect();
    let db = Database::from_rows(rows)?;
    let indices = rand::seq::index::sample(&mut rng, n, batch);
    let u = EditRequest::new(
        indices.iter().map(|index| Replacement { index, record: Record(unit_ball_point(d, &mut rng)) }).collect(),
    )?;
    let edited = apply_edit(&db, &u)?;
    let obj = Objective::new(LossModel::quadratic(curvature, 10.0)?, lambda, None)?;

    let init = GaussianLaw::isotropic(d, init_var);
    let init_risk = init.expected_excess_risk(&obj, &db)?;
    let star = quadratic_minimizer(&obj, &db)?;
    let star_e = quadratic_minimizer(&obj, &edited)?;
    let (f_star, f_star_e) = (obj.value(&db, &star)?, obj.value(&edited, &star_e)?);

    let seed = derive_seed(root, 1_000_000 + idx as u64);
    let samples = (0..exp.samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let theta0 = init.sample(&mut rng);
            noisy_gd_run(&obj, &db, &theta0, k, eta, sigma2, &mut rng)
        })
        .collect::<Result<Vec<ModelParams<f64>>>>()?;

    let risk_gaps: Vec<f64> = samples.iter().map(|s| obj.value(&db, s).map(|v| v - f_star)).collect::<Result<_>>()?;
    let edit_gaps: Vec<f64> =
        samples.iter().map(|s| obj.value(&edited, s).map(|v| v - f_star_e)).collect::<Result<_>>()?;
    let risk = mean_and_stderr(&risk_gaps);
    let edited_risk = mean_and_stderr(&edit_gaps);

    let mut lipschitz: f64 = 0.0;
    let points = samples.iter().map(|s| s.values()).chain([star.values(), star_e.values()]);
    for theta in points {
        for r in db.records().iter().chain(edited.records()) {
            lipschitz = lipschitz.max(vector::norm(&obj.loss.gradient(theta, r.values())));
        }
    }

    let acc = accuracy_bound(init_risk, lambda, eta, k, kappa, d, sigma2);
    let edit = edit_risk_bound(risk.mean, kappa, batch, lipschitz, lambda, n);
    Ok(LemmaRow {
        instance: idx,
        d,
        n,
        lambda,
        beta,
        sigma2,
        k,
        batch,
        init_risk,
        risk: risk.mean,
        risk_std_err: risk.std_err,
        accuracy_bound: acc,
        accuracy_ok: risk.mean <= acc + 3.0 * risk.std_err,
        lipschitz,
        edited_risk: edited_risk.mean,
        edited_std_err: edited_risk.std_err,
        edit_bound: edit,
        edit_ok: edited_risk.mean <= edit + 3.0 * (edited_risk.std_err + 2.0 * kappa * risk.std_err),
    })
}

/// Checks both lemmas on `instances` random quadratic problems.
pub fn lemma_checks(exp: &LemmaExperiment, root: u64) -> Result<Vec<LemmaRow>> {
    if exp.samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    (0..exp.instances).map(|i| one_instance(exp, root, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemmas_hold_on_a_few_instances() {
        let rows = lemma_checks(&LemmaExperiment { instances: 4, samples: 2000 }, 17).unwrap();
        for r in rows {
            assert!(r.accuracy_ok && r.edit_ok, "{r:?}");
        }
    }
}
