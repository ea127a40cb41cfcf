use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::model::{quadratic_minimizer, Database, ModelParams, Objective};
use crate::scalar::Scalar;

/// Gaussian with diagonal covariance; `var` holds the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GaussianLaw<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

impl<T: Scalar> GaussianLaw<T> {
    pub fn new(mean: Vec<T>, var: Vec<T>) -> Result<Self> {
        if mean.len() != var.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: var.len() });
        }
        if var.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(invalid("var", "variances must be finite and nonnegative"));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(invalid("mean", "entries must be finite"));
        }
        Ok(GaussianLaw { mean, var })
    }

    /// Point mass at `mean`.
    pub fn point(mean: Vec<T>) -> Self {
        let var = vec![T::zero(); mean.len()];
        GaussianLaw { mean, var }
    }

    /// `N(0, v·I_d)`.
    pub fn isotropic(d: usize, v: T) -> Self {
        GaussianLaw { mean: vec![T::zero(); d], var: vec![v; d] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ModelParams<T> {
        ModelParams(self.mean.iter().zip(&self.var).map(|(&m, &v)| m + v.sqrt() * T::standard_normal(rng)).collect())
    }

    /// `D_q(self ‖ other)`, additive over independent coordinates. May be `+∞`.
    pub fn renyi(&self, other: &Self, q: T) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let mut total = T::zero();
        for j in 0..self.dim() {
            total += gaussian_renyi_1d(q, self.mean[j], self.var[j], other.mean[j], other.var[j])?;
        }
        Ok(total)
    }

    /// Exact `E[L_D(Θ)] − L_D(θ*)` for a quadratic objective.
    pub fn expected_excess_risk(&self, obj: &Objective<T>, db: &Database<T>) -> Result<T> {
        let star = quadratic_minimizer(obj, db)?;
        let a = obj.loss.curvature().ok_or(Error::NotQuadratic(obj.loss.kind.name()))?;
        if self.dim() != a.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: self.dim() });
        }
        let half = T::lit(0.5);
        Ok((0..self.dim())
            .map(|j| {
                let gap = self.mean[j] - star.0[j];
                half * (a[j] + obj.reg_lambda) * (self.var[j] + gap * gap)
            })
            .sum())
    }
}

/// `D_q(N(μ₁, s₁) ‖ N(μ₂, s₂))` in one dimension. Returns `+∞` when the
/// mixed variance `q·s₂ + (1−q)·s₁` is nonpositive or when either law is a
/// point mass that the other does not match.
pub fn gaussian_renyi_1d<T: Scalar>(q: T, mu1: T, s1: T, mu2: T, s2: T) -> Result<T> {
    if !(q > T::one()) {
        return Err(invalid("q", format!("Rényi order must exceed 1, got {q}")));
    }
    if s1 < T::zero() || s2 < T::zero() {
        return Err(invalid("variance", "must be nonnegative"));
    }
    let diff = mu1 - mu2;
    if s1 == T::zero() || s2 == T::zero() {
        return Ok(if s1 == s2 && diff == T::zero() { T::zero() } else { T::infinity() });
    }
    let one = T::one();
    let rho_m1 = s1 / s2 - one;
    let mixed_rel = one + (one - q) * rho_m1; // s_q / s₂
    if !(mixed_rel > T::zero()) {
        return Ok(T::infinity());
    }
    let s_q = mixed_rel * s2;
    let log_term = (one - q) * rho_m1;
    let log_term = log_term.ln_1p() - (one - q) * rho_m1.ln_1p();
    let two = T::lit(2.0);
    Ok(q * diff * diff / (two * s_q) - log_term / (two * (q - one)))
}

/// Exact law of Noisy-GD on a quadratic objective started from `init`.
///
/// Rejects if per-record clipping would bind anywhere along the mean path,
/// since the recursion is then no longer affine.
pub fn gaussian_pushforward<T: Scalar>(
    obj: &Objective<T>,
    db: &Database<T>,
    init: &GaussianLaw<T>,
    k: usize,
    eta: T,
    sigma2: T,
) -> Result<GaussianLaw<T>> {
    let a = obj.loss.curvature().ok_or(Error::NotQuadratic(obj.loss.kind.name()))?;
    ensure_positive("eta", eta)?;
    if !(sigma2 >= T::zero()) {
        return Err(invalid("sigma2", "must be nonnegative"));
    }
    let d = a.len();
    for got in [db.dim(), init.dim()] {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    let xbar = db.mean();
    let contraction: Vec<T> = a.iter().map(|&aj| T::one() - eta * (aj + obj.reg_lambda)).collect();
    let drift: Vec<T> = a.iter().zip(&xbar).map(|(&aj, &m)| eta * aj * m).collect();
    let noise = T::lit(2.0) * eta * sigma2;
    let mut law = init.clone();
    for iteration in 0..k {
        if obj.clipping_binds(db, &law.mean) {
            return Err(Error::ClippingActive { iteration });
        }
        for j in 0..d {
            law.mean[j] = contraction[j] * law.mean[j] + drift[j];
            law.var[j] = contraction[j] * contraction[j] * law.var[j] + noise;
        }
    }
    if k > 0 && obj.clipping_binds(db, &law.mean) {
        return Err(Error::ClippingActive { iteration: k });
    }
    Ok(law)
}
