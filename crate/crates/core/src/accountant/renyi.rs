use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::scalar::Scalar;
use crate::vector;

/// Which rule produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    GaussianClosedForm,
    NoisyGdLipschitz,
    NoisyGdConvex,
    Composition,
    AdaptiveDeletion,
    BoundedPerturbation,
    WeakTriangle,
    /// Rényi to (ε, δ); holds in the direction of the underlying divergence only.
    OneSidedConversion,
}

/// `(q, ε)` Rényi bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RenyiBound<T> {
    pub order: T,
    pub epsilon: T,
    pub provenance: Rule,
}

impl<T: Scalar> RenyiBound<T> {
    pub fn new(order: T, epsilon: T, provenance: Rule) -> Result<Self> {
        check_order(order)?;
        if !(epsilon >= T::zero()) {
            return Err(invalid("epsilon", format!("must be nonnegative, got {epsilon}")));
        }
        Ok(RenyiBound { order, epsilon, provenance })
    }

    pub fn is_infinite(&self) -> bool {
        self.epsilon.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DPBound<T> {
    pub epsilon: T,
    pub delta: T,
    pub provenance: Rule,
}

fn check_order<T: Scalar>(q: T) -> Result<()> {
    if q > T::one() && q.is_finite() {
        Ok(())
    } else {
        Err(invalid("q", format!("Rényi order must be finite and exceed 1, got {q}")))
    }
}

fn nonneg<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and nonnegative, got {v}")))
    }
}

/// `q‖μ₁ − μ₂‖² / (2σ²)` between isotropic Gaussians of equal variance.
pub fn gaussian_renyi<T: Scalar>(q: T, mu1: &[T], mu2: &[T], sigma2: T) -> Result<RenyiBound<T>> {
    check_order(q)?;
    if mu1.len() != mu2.len() {
        return Err(Error::DimensionMismatch { expected: mu1.len(), got: mu2.len() });
    }
    nonneg("sigma2", sigma2)?;
    let gap = vector::dist_sq(mu1, mu2);
    let epsilon = if sigma2 == T::zero() {
        if gap == T::zero() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        q * gap / (T::lit(2.0) * sigma2)
    };
    Ok(RenyiBound { order: q, epsilon, provenance: Rule::GaussianClosedForm })
}

/// `qL²ηK / (σ²n²)`.
pub fn rdp_noisy_gd_lipschitz<T: Scalar>(q: T, l: T, sigma2: T, n: usize, eta: T, k: usize) -> Result<RenyiBound<T>> {
    check_order(q)?;
    ensure_positive("lipschitz", l)?;
    ensure_positive("sigma2", sigma2)?;
    ensure_positive("eta", eta)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let n = T::from_count(n);
    let epsilon = q * l * l * eta * T::from_count(k) / (sigma2 * n * n);
    Ok(RenyiBound { order: q, epsilon, provenance: Rule::NoisyGdLipschitz })
}

/// `4qL²/(λσ²n²)·(1 − e^{−ληK/2})`, requiring `η < 1/(β+λ)`.
#[allow(clippy::too_many_arguments)]
pub fn rdp_noisy_gd_convex<T: Scalar>(
    q: T,
    l: T,
    lambda: T,
    beta: T,
    sigma2: T,
    n: usize,
    eta: T,
    k: usize,
) -> Result<RenyiBound<T>> {
    check_order(q)?;
    ensure_positive("lipschitz", l)?;
    ensure_positive("lambda", lambda)?;
    nonneg("beta", beta)?;
    ensure_positive("sigma2", sigma2)?;
    ensure_positive("eta", eta)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    if eta * (beta + lambda) >= T::one() {
        return Err(Error::Precondition(format!(
            "convex RDP bound requires learning rate eta < 1/(beta + lambda), got eta = {eta}"
        )));
    }
    let n = T::from_count(n);
    let limit = T::lit(4.0) * q * l * l / (lambda * sigma2 * n * n);
    let decay = -(-lambda * eta * T::from_count(k) / T::lit(2.0)).exp_m1();
    Ok(RenyiBound { order: q, epsilon: limit * decay, provenance: Rule::NoisyGdConvex })
}

/// `ε₀ + ln(1/δ)/(q − 1)`.
pub fn rdp_to_dp<T: Scalar>(b: &RenyiBound<T>, delta: T) -> Result<DPBound<T>> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    check_order(b.order)?;
    Ok(DPBound {
        epsilon: b.epsilon + (T::one() / delta).ln() / (b.order - T::one()),
        delta,
        provenance: Rule::OneSidedConversion,
    })
}

/// Sum of same-order bounds. A single bound is returned unchanged.
pub fn compose<T: Scalar>(q: T, bounds: &[RenyiBound<T>]) -> Result<RenyiBound<T>> {
    check_order(q)?;
    if let Some(b) = bounds.iter().find(|b| b.order != q) {
        return Err(Error::MixedOrders(q.as_f64(), b.order.as_f64()));
    }
    if let [single] = bounds {
        return Ok(*single);
    }
    Ok(RenyiBound { order: q, epsilon: bounds.iter().map(|b| b.epsilon).sum(), provenance: Rule::Composition })
}

/// `ε_dd + p·ε_dp` for a requester observing `p` releases.
pub fn adaptive_deletion_bound<T: Scalar>(q: T, eps_dd: T, eps_dp: T, p: usize) -> Result<RenyiBound<T>> {
    check_order(q)?;
    nonneg("eps_dd", eps_dd)?;
    nonneg("eps_dp", eps_dp)?;
    if eps_dd > eps_dp {
        return Err(invalid("eps_dd", format!("deletion budget {eps_dd} exceeds privacy budget {eps_dp}")));
    }
    Ok(RenyiBound { order: q, epsilon: eps_dd + T::from_count(p) * eps_dp, provenance: Rule::AdaptiveDeletion })
}

/// `2c/σ²` for Gibbs laws whose potentials differ by at most `c`; valid at every order.
pub fn bounded_perturbation_renyi<T: Scalar>(q: T, c: T, sigma2: T) -> Result<RenyiBound<T>> {
    check_order(q)?;
    nonneg("c", c)?;
    ensure_positive("sigma2", sigma2)?;
    Ok(RenyiBound { order: q, epsilon: T::lit(2.0) * c / sigma2, provenance: Rule::BoundedPerturbation })
}

/// `R_q(ν‖ν′) ≤ R_q(ν‖ρ) + R_∞(ρ‖ν′)`.
pub fn weak_triangle<T: Scalar>(a_to_mid: &RenyiBound<T>, mid_to_b_sup: T) -> Result<RenyiBound<T>> {
    if !(a_to_mid.epsilon >= T::zero()) {
        return Err(invalid("a_to_mid", "must be nonnegative"));
    }
    if !(mid_to_b_sup >= T::zero()) {
        return Err(invalid("mid_to_b_sup", "must be nonnegative"));
    }
    Ok(RenyiBound { order: a_to_mid.order, epsilon: a_to_mid.epsilon + mid_to_b_sup, provenance: Rule::WeakTriangle })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_renyi(2.0, &[1.0, 2.0], &[1.0, 2.0], 0.3).unwrap().epsilon, 0.0);
        assert_eq!(gaussian_renyi(2.0, &[0.0], &[1.0], 1.0).unwrap().epsilon, 1.0);
        let a = gaussian_renyi(3.0, &[0.2, 0.1], &[-0.1, 0.4], 0.7).unwrap().epsilon;
        let b = gaussian_renyi(3.0, &[0.6, 0.3], &[-0.3, 1.2], 0.7).unwrap().epsilon;
        assert!(close(b, 9.0 * a, 1e-12));
        assert!(gaussian_renyi(2.0, &[0.0], &[1.0], 0.0).unwrap().is_infinite());
        assert_eq!(gaussian_renyi(2.0, &[1.0], &[1.0], 0.0).unwrap().epsilon, 0.0);
        assert!(gaussian_renyi(1.0, &[0.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(rdp_noisy_gd_lipschitz(2.0, 1.0, 1.0, 10, 0.1, 0).unwrap().epsilon, 0.0);
        let e = rdp_noisy_gd_lipschitz(2.0, 1.0, 1.0, 10, 0.1, 100).unwrap().epsilon;
        assert!(close(e, 0.2, 1e-15));
        let e2 = rdp_noisy_gd_lipschitz(2.0, 1.0, 1.0, 10, 0.1, 200).unwrap().epsilon;
        assert!(close(e2, 2.0 * e, 1e-15));
    }

    #[test]
    fn convex_examples() {
        let f = |k| rdp_noisy_gd_convex(2.0, 1.0, 1.0, 1.0, 1.0, 10, 0.1, k).unwrap().epsilon;
        assert_eq!(f(0), 0.0);
        assert!(close(f(20), 0.08 * (1.0 - (-1f64).exp()), 1e-15));
        assert!(close(f(20), 0.050_569, 1e-6));
        assert!(close(f(100_000), 0.08, 1e-15));
        assert!(f(10) < f(11) && f(11) <= 0.08);
        let err = rdp_noisy_gd_convex(2.0, 1.0, 1.0, 9.0, 1.0, 10, 0.1, 5).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("eta < 1/(beta + lambda)")));
    }

    #[test]
    fn conversion_examples() {
        let b = RenyiBound::new(1001.0, 0.0, Rule::NoisyGdConvex).unwrap();
        assert!(close(rdp_to_dp(&b, 0.01).unwrap().epsilon, 0.004_605, 1e-6));
        let b = RenyiBound::new(2.0, 0.5, Rule::NoisyGdConvex).unwrap();
        assert!(close(rdp_to_dp(&b, 1e-5).unwrap().epsilon, 0.5 + 1e5f64.ln(), 1e-12));
        let b = RenyiBound::new(2.0, 0.0, Rule::NoisyGdConvex).unwrap();
        assert!(close(rdp_to_dp(&b, (-1f64).exp()).unwrap().epsilon, 1.0, 1e-15));
        assert!(rdp_to_dp(&b, 1.0).is_err());
        assert!(rdp_to_dp(&b, 0.0).is_err());
    }

    #[test]
    fn composition_examples() {
        let a = RenyiBound::new(2.0, 0.1, Rule::GaussianClosedForm).unwrap();
        let b = RenyiBound::new(2.0, 0.2, Rule::GaussianClosedForm).unwrap();
        assert!(close(compose(2.0, &[a, b]).unwrap().epsilon, 0.3, 1e-15));
        assert_eq!(compose(2.0, &[]).unwrap().epsilon, 0.0);
        assert_eq!(compose(2.0, &[a]).unwrap(), a);
        let c = RenyiBound::new(3.0, 0.2, Rule::GaussianClosedForm).unwrap();
        assert!(matches!(compose(2.0, &[a, c]), Err(Error::MixedOrders(..))));
    }

    #[test]
    fn adaptive_and_perturbation_examples() {
        assert_eq!(adaptive_deletion_bound(2.0, 0.1, 1.0, 0).unwrap().epsilon, 0.1);
        assert!(close(adaptive_deletion_bound(2.0, 0.1, 1.0, 3).unwrap().epsilon, 3.1, 1e-15));
        assert_eq!(adaptive_deletion_bound(2.0, 0.4, 0.4, 1).unwrap().epsilon, 0.8);
        assert!(adaptive_deletion_bound(2.0, 1.1, 1.0, 1).is_err());

        let (s2, b) = (0.6, 3.0f64);
        assert_eq!(bounded_perturbation_renyi(2.0, 0.0, s2).unwrap().epsilon, 0.0);
        let init = bounded_perturbation_renyi(2.0, s2 * b.ln() / 4.0, s2).unwrap().epsilon;
        assert!(close(init, b.ln() / 2.0, 1e-15));
        let (r, n) = (2.0, 50.0);
        let nb = bounded_perturbation_renyi(2.0, r * s2 * b.ln() / (2.0 * n), s2).unwrap().epsilon;
        assert!(close(nb, r * b.ln() / n, 1e-15));

        let a = RenyiBound::new(2.0, 0.1, Rule::GaussianClosedForm).unwrap();
        assert!(close(weak_triangle(&a, 0.05).unwrap().epsilon, 0.15, 1e-15));
        assert_eq!(weak_triangle(&a, 0.0).unwrap().epsilon, 0.1);
    }
}
