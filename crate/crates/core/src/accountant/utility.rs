use crate::error::{ensure_positive, invalid, Error, Result};
use crate::scalar::Scalar;

/// Largest step size for which the Rényi convergence bound holds:
/// `λ / (64·B·q²·(β+λ)²)`.
pub fn nonconvex_step_cap<T: Scalar>(q: T, lambda: T, b: T, beta: T) -> T {
    lambda / (T::lit(64.0) * b * q * q * (beta + lambda).powi(2))
}

/// `q·e^{−ληK/(2B)}·R₀ + 32·d·η·q·B·(β+λ)²/λ`.
#[allow(clippy::too_many_arguments)]
pub fn nonconvex_convergence_bound<T: Scalar>(
    q: T,
    lambda: T,
    eta: T,
    k: usize,
    b: T,
    d: usize,
    beta: T,
    r0: T,
) -> Result<T> {
    if !(q > T::one()) {
        return Err(invalid("q", "Rényi order must exceed 1"));
    }
    ensure_positive("lambda", lambda)?;
    ensure_positive("eta", eta)?;
    if !(b > T::one()) {
        return Err(invalid("b", "boundedness constant B must exceed 1"));
    }
    if !(beta >= T::zero()) || !(r0 >= T::zero()) {
        return Err(invalid("beta/r0", "must be nonnegative"));
    }
    let cap = nonconvex_step_cap(q, lambda, b, beta);
    if eta > cap {
        return Err(Error::Precondition(format!(
            "convergence bound requires eta <= lambda/(64 B q^2 (beta+lambda)^2) = {cap}, got {eta}"
        )));
    }
    let two = T::lit(2.0);
    let decay = (-lambda * eta * T::from_count(k) / (two * b)).exp();
    let floor = T::lit(32.0) * T::from_count(d) * eta * q * b * (beta + lambda).powi(2) / lambda;
    Ok(q * decay * r0 + floor)
}

/// `(dσ²/2)(ln((β+λ)/λ) + √B)`.
pub fn gibbs_excess_risk_bound<T: Scalar>(d: usize, sigma2: T, lambda: T, beta: T, b: T) -> Result<T> {
    ensure_positive("sigma2", sigma2)?;
    ensure_positive("lambda", lambda)?;
    if !(beta >= T::zero()) {
        return Err(invalid("beta", "must be nonnegative"));
    }
    if !(b > T::one()) {
        return Err(invalid("b", "boundedness constant B must exceed 1"));
    }
    let half = T::lit(0.5);
    Ok(half * T::from_count(d) * sigma2 * (((beta + lambda) / lambda).ln() + b.sqrt()))
}

/// Excess risk of the convex recipe at every release: `10κqdL²/(λ·ε_dp·n²)`.
pub fn convex_utility_bound<T: Scalar>(kappa: T, q: T, d: usize, l: T, lambda: T, eps_dp: T, n: usize) -> T {
    let n = T::from_count(n);
    T::lit(10.0) * kappa * q * T::from_count(d) * l * l / (lambda * eps_dp * n * n)
}

/// Noisy-GD accuracy: `err₀·e^{−ληK/2} + κ·d·σ²`.
pub fn accuracy_bound<T: Scalar>(err0: T, lambda: T, eta: T, k: usize, kappa: T, d: usize, sigma2: T) -> T {
    err0 * (-lambda * eta * T::from_count(k) / T::lit(2.0)).exp() + kappa * T::from_count(d) * sigma2
}

/// Risk after an `r`-record edit: `κ·(2·err + 16r²L²/(λn²))`.
pub fn edit_risk_bound<T: Scalar>(err: T, kappa: T, r: usize, l: T, lambda: T, n: usize) -> T {
    let (r, n) = (T::from_count(r), T::from_count(n));
    kappa * (T::lit(2.0) * err + T::lit(16.0) * r * r * l * l / (lambda * n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn convergence_examples() {
        let floor = 32.0 * 1e-5 * 2.0 * E * 4.0;
        let full = nonconvex_convergence_bound(2.0, 1.0, 1e-5, 1_000_000, E, 1, 1.0, 0.5).unwrap();
        assert!((full - (2.0 * (-10.0 / (2.0 * E)).exp() * 0.5 + floor)).abs() < 1e-12);
        assert!((full - 0.165_87).abs() < 1e-4);
        let k0 = nonconvex_convergence_bound(2.0, 1.0, 1e-5, 0, E, 1, 1.0, 0.5).unwrap();
        assert!((k0 - (1.0 + floor)).abs() < 1e-12);
        let r0 = nonconvex_convergence_bound(2.0, 1.0, 1e-5, 10, E, 1, 1.0, 0.0).unwrap();
        assert!((r0 - floor).abs() < 1e-15);
        let err = nonconvex_convergence_bound(2.0, 1.0, 1e-3, 10, E, 1, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("64 B q^2")));
    }

    #[test]
    fn gibbs_examples() {
        let v = gibbs_excess_risk_bound(1, 2.0, 1.0, 1.0, E).unwrap();
        assert!((v - (2f64.ln() + E.sqrt())).abs() < 1e-14);
        assert!((v - 2.3418).abs() < 1e-4);
        let w = gibbs_excess_risk_bound(3, 4.0, 1.0, 1.0, E).unwrap();
        assert!((w - 6.0 * v).abs() < 1e-12);
    }

    #[test]
    fn lemma_bounds() {
        assert!((convex_utility_bound(4.0f64, 2.0, 2, 1.0, 1.0, 1.0, 100) - 0.016).abs() < 1e-15);
        assert_eq!(accuracy_bound(1.0f64, 1.0, 0.5, 0, 2.0, 1, 0.1), 1.2);
        assert!((edit_risk_bound(0.01f64, 2.0, 1, 1.0, 1.0, 10) - 2.0 * (0.02 + 0.16)).abs() < 1e-15);
    }
}
