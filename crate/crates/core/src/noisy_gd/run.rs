use rand::Rng;

use super::RecipeParams;
use crate::error::{invalid, Error, Result};
use crate::model::{apply_edit, Database, EditRequest, ModelParams, Objective};
use crate::scalar::Scalar;
use crate::vector;

/// Runs `k` steps of `θ ← θ − η∇L_D(θ) + √(2η)·N(0, σ²I)`.
///
/// `sigma2 = 0` gives plain (clipped) gradient descent.
pub fn noisy_gd_run<T: Scalar, R: Rng + ?Sized>(
    obj: &Objective<T>,
    db: &Database<T>,
    theta0: &ModelParams<T>,
    k: usize,
    eta: T,
    sigma2: T,
    rng: &mut R,
) -> Result<ModelParams<T>> {
    if !(eta > T::zero()) {
        return Err(invalid("eta", "step size must be positive"));
    }
    if !(sigma2 >= T::zero()) {
        return Err(invalid("sigma2", "noise variance must be nonnegative"));
    }
    let d = obj.dim();
    if theta0.dim() != d || db.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if theta0.dim() != d { theta0.dim() } else { db.dim() },
        });
    }
    let noise_scale = (T::lit(2.0) * eta * sigma2).sqrt();
    let mut theta = theta0.0.clone();
    let mut grad = vec![T::zero(); d];
    let mut scratch = vec![T::zero(); d];
    for iteration in 0..k {
        obj.gradient_into(db, &theta, &mut grad, &mut scratch);
        vector::axpy(-eta, &grad, &mut theta);
        if sigma2 > T::zero() {
            for t in theta.iter_mut() {
                *t += noise_scale * T::standard_normal(rng);
            }
        }
        if !vector::all_finite(&theta) {
            return Err(Error::NonFinite { iteration });
        }
    }
    Ok(ModelParams(theta))
}

/// Learner: `θ₀ ~ N(0, init_variance·I)` followed by `K_A` Noisy-GD steps on `D₀`.
pub fn learn<T: Scalar, R: Rng + ?Sized>(
    obj: &Objective<T>,
    db: &Database<T>,
    p: &RecipeParams<T>,
    rng: &mut R,
) -> Result<ModelParams<T>> {
    let sd = p.init_variance.sqrt();
    let theta0 = ModelParams(
        (0..obj.dim()).map(|_| if sd > T::zero() { sd * T::standard_normal(rng) } else { T::zero() }).collect(),
    );
    noisy_gd_run(obj, db, &theta0, p.k_learn, p.eta, p.sigma2, rng)
}

/// Deleter: `K_U` Noisy-GD steps on `D ∘ u`, warm-started at the previous model.
///
/// Nothing besides `theta_prev` is carried between calls.
pub fn delete<T: Scalar, R: Rng + ?Sized>(
    obj: &Objective<T>,
    db_prev: &Database<T>,
    u: &EditRequest<T>,
    theta_prev: &ModelParams<T>,
    p: &RecipeParams<T>,
    rng: &mut R,
) -> Result<ModelParams<T>> {
    let db = apply_edit(db_prev, u)?;
    noisy_gd_run(obj, &db, theta_prev, p.k_delete, p.eta, p.sigma2, rng)
}
