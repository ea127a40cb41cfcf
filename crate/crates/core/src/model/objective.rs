use serde::{Deserialize, Serialize};

use super::{Database, LossModel, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::vector;

/// `Clip_L(v) = v / max(1, ‖v‖/L)`.
///
/// Norms within four ulps of `L` count as already clipped, which keeps the
/// operation exactly idempotent in floating point.
pub fn clip_gradient<T: Scalar>(v: &[T], l: T) -> Result<Vec<T>> {
    if !(l > T::zero()) {
        return Err(invalid("clip", format!("clip norm must be positive, got {l}")));
    }
    let mut out = v.to_vec();
    clip_in_place(&mut out, l);
    Ok(out)
}

#[inline]
pub(crate) fn clip_in_place<T: Scalar>(v: &mut [T], l: T) {
    let n = vector::norm(v);
    if n > l * (T::one() + T::lit(4.0) * T::epsilon()) {
        vector::scale(l / n, v);
    }
}

/// Regularized empirical objective `(1/n) Σ ℓ(θ; x) + (λ/2)‖θ‖²` with optional
/// per-record gradient clipping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Objective<T> {
    pub loss: LossModel<T>,
    pub reg_lambda: T,
    pub clip: Option<T>,
}

impl<T: Scalar> Objective<T> {
    pub fn new(loss: LossModel<T>, reg_lambda: T, clip: Option<T>) -> Result<Self> {
        if !(reg_lambda >= T::zero()) || !reg_lambda.is_finite() {
            return Err(invalid("reg_lambda", "must be a finite nonnegative number"));
        }
        if let Some(c) = clip {
            crate::error::ensure_positive("clip", c)?;
        }
        Ok(Self { loss, reg_lambda, clip })
    }

    pub fn dim(&self) -> usize {
        self.loss.dim
    }

    fn check(&self, db: &Database<T>, theta: &[T]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        if db.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: db.dim() });
        }
        Ok(())
    }

    /// Regularized objective value.
    pub fn value(&self, db: &Database<T>, theta: &ModelParams<T>) -> Result<T> {
        self.check(db, theta.values())?;
        Ok(self.value_unchecked(db, theta.values()))
    }

    pub(crate) fn value_unchecked(&self, db: &Database<T>, theta: &[T]) -> T {
        let n = T::from_count(db.len());
        let data: T = db.records().iter().map(|r| self.loss.value(theta, r.values())).sum();
        data / n + self.reg_lambda * vector::norm_sq(theta) / T::lit(2.0)
    }

    /// Mean clipped per-record gradient plus `λθ`.
    pub fn gradient(&self, db: &Database<T>, theta: &ModelParams<T>) -> Result<Vec<T>> {
        self.check(db, theta.values())?;
        let mut out = vec![T::zero(); self.dim()];
        let mut scratch = vec![T::zero(); self.dim()];
        self.gradient_into(db, theta.values(), &mut out, &mut scratch);
        Ok(out)
    }

    /// Allocation-free gradient; `scratch` must have length `d`.
    pub(crate) fn gradient_into(&self, db: &Database<T>, theta: &[T], out: &mut [T], scratch: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for r in db.records() {
            self.loss.gradient_into(theta, r.values(), scratch);
            if let Some(l) = self.clip {
                clip_in_place(scratch, l);
            }
            vector::axpy(T::one(), scratch, out);
        }
        vector::scale(T::one() / T::from_count(db.len()), out);
        vector::axpy(self.reg_lambda, theta, out);
    }

    /// Whether any per-record gradient at `theta` exceeds the clip norm.
    pub fn clipping_binds(&self, db: &Database<T>, theta: &[T]) -> bool {
        let Some(l) = self.clip else {
            return false;
        };
        let mut g = vec![T::zero(); self.dim()];
        db.records().iter().any(|r| {
            self.loss.gradient_into(theta, r.values(), &mut g);
            vector::norm(&g) > l
        })
    }
}

/// Closed-form minimizer `(A + λI)⁻¹ A x̄` for the quadratic family.
pub fn quadratic_minimizer<T: Scalar>(obj: &Objective<T>, db: &Database<T>) -> Result<ModelParams<T>> {
    let curvature = obj.loss.curvature().ok_or(Error::NotQuadratic(obj.loss.kind.name()))?;
    if db.dim() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: db.dim() });
    }
    let mean = db.mean();
    let theta: Vec<T> = curvature.iter().zip(&mean).map(|(&a, &m)| a * m / (a + obj.reg_lambda)).collect();
    if obj.clipping_binds(db, &theta) {
        return Err(Error::Precondition("gradient clipping binds at the unclipped optimum".into()));
    }
    Ok(ModelParams(theta))
}

/// Monte-Carlo excess empirical risk with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

pub fn excess_empirical_risk<T: Scalar>(
    samples: &[ModelParams<T>],
    obj: &Objective<T>,
    db: &Database<T>,
    theta_star: &ModelParams<T>,
) -> Result<RiskEstimate> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let base = obj.value(db, theta_star)?.as_f64();
    let gaps = samples.iter().map(|s| obj.value(db, s).map(|v| v.as_f64() - base)).collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_stderr(&gaps))
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> RiskEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    RiskEstimate { mean, std_err: (var / n).sqrt(), samples: xs.len() }
}
