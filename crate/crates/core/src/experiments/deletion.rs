use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{Database, EditRequest, LossModel, Objective, Record};
use crate::noisy_gd::{convex_recipe, BudgetSpec, ConvexInstance, RecipeParams};
use crate::rng::stream_rng;
use crate::stream::counterfactual_divergences;

/// Quadratic deletion instance: loss `½(θ−x)ᵀ diag(curvature)(θ−x)` plus
/// `(λ/2)‖θ‖²`, with `n` records and a stream of `steps` single-record edits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeletionExperiment {
    pub n: usize,
    pub lambda: f64,
    pub beta: f64,
    pub lipschitz: f64,
    /// Loss curvature per coordinate; entries in `(0, beta]`.
    pub curvature: Vec<f64>,
    pub q: f64,
    pub eps_dp: f64,
    pub eps_dd: f64,
    pub steps: usize,
    /// Replaces the recipe's deletion iteration count.
    #[serde(default)]
    pub k_delete_override: Option<usize>,
}

impl DeletionExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.curvature.iter().any(|&c| !(c > 0.0 && c <= self.beta)) {
            return Err(invalid("curvature", "entries must lie in (0, beta]"));
        }
        if self.steps > self.n {
            return Err(invalid("steps", "each step edits a distinct record, so steps <= n"));
        }
        self.recipe().map(|_| ())
    }

    pub fn recipe(&self) -> Result<RecipeParams<f64>> {
        let inst = ConvexInstance {
            lambda: self.lambda,
            beta: self.beta,
            lipschitz: self.lipschitz,
            n: self.n,
            d: self.curvature.len(),
            edit_batch_size: 1,
        };
        let r = convex_recipe(&inst, &BudgetSpec::new(self.q, self.eps_dp, self.eps_dd)?)?;
        Ok(match self.k_delete_override {
            Some(k) => r.with_k_delete(k),
            None => r,
        })
    }
}

/// Generated data for a [`DeletionExperiment`].
#[derive(Debug, Clone)]
pub struct DeletionInstance {
    pub objective: Objective<f64>,
    pub d0: Database<f64>,
    pub edits: Vec<EditRequest<f64>>,
    /// `neighbours[i]` differs from `d0` only at the record edit `i+1` rewrites.
    pub neighbours: Vec<Database<f64>>,
}

const EXTREME: f64 = 0.9;

impl DeletionInstance {
    /// Records at edited indices sit at `±0.9·L/c₀` on the flattest axis and the
    /// neighbour flips that sign, so per-record gradients differ by `1.8·L`;
    /// other records and replacements are uniform in a small box.
    pub fn generate(exp: &DeletionExperiment, root: u64) -> Result<Self> {
        exp.validate()?;
        let mut rng = stream_rng(root, 0);
        let d = exp.curvature.len();
        let (flat, c0) =
            exp.curvature.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty curvature");
        let small = 0.1 * exp.lipschitz / exp.beta;
        let box_point = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..d).map(|_| rng.random_range(-small..=small)).collect()
        };
        let mut rows: Vec<Vec<f64>> = (0..exp.n).map(|_| box_point(&mut rng)).collect();
        for (i, row) in rows.iter_mut().take(exp.steps).enumerate() {
            row.iter_mut().for_each(|v| *v = 0.0);
            row[flat] = if i % 2 == 0 { 1.0 } else { -1.0 } * EXTREME * exp.lipschitz / c0;
        }
        let edits = (0..exp.steps).map(|i| EditRequest::single(i, Record(box_point(&mut rng)))).collect();
        let neighbours = (0..exp.steps)
            .map(|i| {
                let mut nb = rows.clone();
                nb[i][flat] = -nb[i][flat];
                Database::from_rows(nb)
            })
            .collect::<Result<Vec<_>>>()?;
        let loss = LossModel::quadratic(exp.curvature.clone(), exp.lipschitz)?;
        Ok(DeletionInstance {
            objective: Objective::new(loss, exp.lambda, None)?,
            d0: Database::from_rows(rows)?,
            edits,
            neighbours,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionRow {
    pub step: usize,
    /// Divergence between the pair's releases just before the deleting edit.
    pub before_deletion: f64,
    pub divergence: f64,
    pub eps_dd: f64,
    pub slack: f64,
    pub k_delete: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionReport {
    pub recipe: RecipeParams<f64>,
    pub rows: Vec<DeletionRow>,
    pub max_divergence: f64,
    pub within_budget: bool,
}

/// Exact per-step deletion divergences for the counterfactual pairs of an instance.
pub fn verify_deletion(exp: &DeletionExperiment, root: u64) -> Result<DeletionReport> {
    let recipe = exp.recipe()?;
    let inst = DeletionInstance::generate(exp, root)?;
    let mut rows = Vec::with_capacity(exp.steps);
    for step in 1..=exp.steps {
        let divs = counterfactual_divergences(
            &inst.objective,
            &inst.d0,
            &inst.neighbours[step - 1],
            &inst.edits,
            &recipe,
            step,
            exp.q,
        )?;
        let divergence = divs[step];
        rows.push(DeletionRow {
            step,
            before_deletion: divs[step - 1],
            divergence,
            eps_dd: exp.eps_dd,
            slack: exp.eps_dd - divergence,
            k_delete: recipe.k_delete,
        });
    }
    let max_divergence = rows.iter().map(|r| r.divergence).fold(0.0, f64::max);
    Ok(DeletionReport { within_budget: max_divergence <= exp.eps_dd, recipe, rows, max_divergence })
}
