use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::vector;

/// Per-record loss families.
///
/// Ridge and logistic records carry label-signed features `x = y·f` with
/// `y ∈ {-1, +1}`, so records and parameters share one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound = "T: Scalar")]
pub enum LossKind<T> {
    /// `½ (θ − x)ᵀ diag(c) (θ − x)`
    QuadraticAnisotropic { curvature: Vec<T> },
    /// `½ (⟨θ, x⟩ − 1)²`
    Ridge,
    /// `log(1 + exp(−⟨θ, x⟩))`
    Logistic,
    /// `a · sin(⟨θ, x⟩ + 1) / (1 + ‖x‖)`, for records with `‖x‖ ≤ 1`.
    BoundedNonconvex { amplitude: T },
}

impl<T> LossKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::QuadraticAnisotropic { .. } => "quadratic_anisotropic",
            LossKind::Ridge => "ridge",
            LossKind::Logistic => "logistic",
            LossKind::BoundedNonconvex { .. } => "bounded_nonconvex",
        }
    }
}

/// A per-record loss with its declared regularity constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LossModel<T> {
    pub kind: LossKind<T>,
    /// Declared Lipschitz constant `L` (on the region of interest for unbounded families).
    pub lipschitz: T,
    /// Smoothness `β`.
    pub smoothness: T,
    /// Magnitude bound `|ℓ| ≤ bound`, when the family is bounded.
    pub bound: Option<T>,
    pub dim: usize,
}

impl<T: Scalar> LossModel<T> {
    /// Anisotropic quadratic with curvature `diag(c)`; `lipschitz` is the
    /// gradient bound on the domain the caller restricts records and models to.
    pub fn quadratic(curvature: Vec<T>, lipschitz: T) -> Result<Self> {
        if curvature.is_empty() {
            return Err(Error::Empty("curvature"));
        }
        if curvature.iter().any(|&c| !(c > T::zero()) || !c.is_finite()) {
            return Err(invalid("curvature", "entries must be positive"));
        }
        crate::error::ensure_positive("lipschitz", lipschitz)?;
        let smoothness = curvature.iter().copied().fold(T::zero(), T::max);
        Ok(Self {
            dim: curvature.len(),
            kind: LossKind::QuadraticAnisotropic { curvature },
            lipschitz,
            smoothness,
            bound: None,
        })
    }

    /// The two-parameter construction `diag(λ_loss, β_loss)` in two dimensions.
    pub fn quadratic_2d(lambda_loss: T, beta_loss: T, lipschitz: T) -> Result<Self> {
        if !(lambda_loss > T::zero() && lambda_loss <= beta_loss) {
            return Err(invalid("lambda_loss", "need 0 < lambda_loss <= beta_loss"));
        }
        Self::quadratic(vec![lambda_loss, beta_loss], lipschitz)
    }

    /// `½‖θ − x‖²` in `d` dimensions.
    pub fn isotropic(d: usize, lipschitz: T) -> Result<Self> {
        Self::quadratic(vec![T::one(); d], lipschitz)
    }

    /// Ridge loss; for records with `‖x‖ ≤ radius` and models with `‖θ‖ ≤ theta_radius`.
    pub fn ridge(d: usize, radius: T, theta_radius: T) -> Result<Self> {
        crate::error::ensure_positive("radius", radius)?;
        Ok(Self {
            kind: LossKind::Ridge,
            lipschitz: (radius * theta_radius + T::one()) * radius,
            smoothness: radius * radius,
            bound: None,
            dim: d,
        })
    }

    /// Logistic loss; for records with `‖x‖ ≤ radius`.
    pub fn logistic(d: usize, radius: T) -> Result<Self> {
        crate::error::ensure_positive("radius", radius)?;
        Ok(Self {
            kind: LossKind::Logistic,
            lipschitz: radius,
            smoothness: radius * radius / T::lit(4.0),
            bound: None,
            dim: d,
        })
    }

    /// Bounded non-convex family; `a`-bounded, `a`-Lipschitz and `a`-smooth on `‖x‖ ≤ 1`.
    pub fn bounded_nonconvex(d: usize, amplitude: T) -> Result<Self> {
        crate::error::ensure_positive("amplitude", amplitude)?;
        Ok(Self {
            kind: LossKind::BoundedNonconvex { amplitude },
            lipschitz: amplitude,
            smoothness: amplitude,
            bound: Some(amplitude),
            dim: d,
        })
    }

    /// Amplitude `σ²·log(B)/4` making the non-convex family fit a noise level `σ²`.
    pub fn nonconvex_amplitude(sigma2: T, b: T) -> T {
        sigma2 * b.ln() / T::lit(4.0)
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.kind, LossKind::BoundedNonconvex { .. })
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, LossKind::QuadraticAnisotropic { .. })
    }

    pub fn curvature(&self) -> Option<&[T]> {
        match &self.kind {
            LossKind::QuadraticAnisotropic { curvature } => Some(curvature),
            _ => None,
        }
    }

    /// Checks that a record lies in the family's domain.
    pub fn check_record(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if let LossKind::BoundedNonconvex { .. } = self.kind {
            if vector::norm(x) > T::one() + T::epsilon() {
                return Err(invalid("record", "bounded_nonconvex requires ‖x‖ ≤ 1"));
            }
        }
        Ok(())
    }

    pub fn value(&self, theta: &[T], x: &[T]) -> T {
        match &self.kind {
            LossKind::QuadraticAnisotropic { curvature } => {
                let mut s = T::zero();
                for ((&c, &t), &xi) in curvature.iter().zip(theta).zip(x) {
                    let e = t - xi;
                    s += c * e * e;
                }
                s / T::lit(2.0)
            }
            LossKind::Ridge => {
                let r = vector::dot(theta, x) - T::one();
                r * r / T::lit(2.0)
            }
            LossKind::Logistic => softplus(-vector::dot(theta, x)),
            LossKind::BoundedNonconvex { amplitude } => {
                *amplitude * (vector::dot(theta, x) + T::one()).sin() / (T::one() + vector::norm(x))
            }
        }
    }

    /// Writes `∇_θ ℓ(θ; x)` into `out`.
    pub fn gradient_into(&self, theta: &[T], x: &[T], out: &mut [T]) {
        match &self.kind {
            LossKind::QuadraticAnisotropic { curvature } => {
                for (((o, &c), &t), &xi) in out.iter_mut().zip(curvature).zip(theta).zip(x) {
                    *o = c * (t - xi);
                }
            }
            LossKind::Ridge => {
                let r = vector::dot(theta, x) - T::one();
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = r * xi;
                }
            }
            LossKind::Logistic => {
                let z = vector::dot(theta, x);
                let s = -sigmoid(-z);
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = s * xi;
                }
            }
            LossKind::BoundedNonconvex { amplitude } => {
                let c = *amplitude * (vector::dot(theta, x) + T::one()).cos() / (T::one() + vector::norm(x));
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = c * xi;
                }
            }
        }
    }

    pub fn gradient(&self, theta: &[T], x: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); theta.len()];
        self.gradient_into(theta, x, &mut g);
        g
    }
}

fn softplus<T: Scalar>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}
