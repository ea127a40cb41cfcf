use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Convex,
    Nonconvex,
}

/// Rényi order and the privacy / deletion budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec<T> {
    pub q: T,
    pub eps_dp: T,
    pub eps_dd: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<T>,
}

impl<T: Scalar> BudgetSpec<T> {
    pub fn new(q: T, eps_dp: T, eps_dd: T) -> Result<Self> {
        let b = BudgetSpec { q, eps_dp, eps_dd, delta: None };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > T::one()) || !self.q.is_finite() {
            return Err(invalid("q", format!("Rényi order must exceed 1, got {}", self.q)));
        }
        ensure_positive("eps_dd", self.eps_dd)?;
        ensure_positive("eps_dp", self.eps_dp)?;
        if self.eps_dd > self.eps_dp {
            return Err(invalid(
                "eps_dd",
                format!("deletion budget {} exceeds privacy budget {}", self.eps_dd, self.eps_dp),
            ));
        }
        if let Some(delta) = self.delta {
            if !(delta > T::zero() && delta < T::one()) {
                return Err(invalid("delta", "must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Which lower bound fixed a recipe output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding<T> {
    pub parameter: String,
    pub constraint: String,
    pub value: T,
}

fn binding<T>(parameter: &str, constraint: &str, value: T) -> Binding<T> {
    Binding { parameter: parameter.into(), constraint: constraint.into(), value }
}

/// Full hyperparameter bundle for the learn/delete pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeParams<T> {
    pub eta: T,
    pub sigma2: T,
    pub k_learn: usize,
    pub k_delete: usize,
    pub init_variance: T,
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_floor: Option<T>,
    #[serde(default)]
    pub bindings: Vec<Binding<T>>,
}

impl<T: Scalar> RecipeParams<T> {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("eta", self.eta)?;
        ensure_positive("sigma2", self.sigma2)?;
        if !(self.init_variance >= T::zero()) || !self.init_variance.is_finite() {
            return Err(invalid("init_variance", "must be nonnegative and finite"));
        }
        Ok(())
    }

    /// Replaces σ² by a larger value and rescales the initialization to `σ²/λ`.
    ///
    /// Only meaningful for the non-convex recipe, whose noise is a floor.
    pub fn with_sigma2(mut self, sigma2: T, lambda: T) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        if self.regime != Regime::Nonconvex {
            return Err(Error::Precondition("noise override is only defined for the non-convex recipe".into()));
        }
        if let Some(floor) = self.sigma2_floor {
            if sigma2 < floor {
                return Err(invalid("sigma2", format!("{sigma2} is below the recipe floor {floor}")));
            }
        }
        self.sigma2 = sigma2;
        self.init_variance = sigma2 / lambda;
        Ok(self)
    }

    /// Copy with a different deletion iteration count.
    pub fn with_k_delete(&self, k_delete: usize) -> Self {
        RecipeParams { k_delete, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("recipe serializes")
    }
}

/// Constants of a convex instance: strong convexity λ, smoothness β,
/// Lipschitz constant L, database size n, dimension d, edit batch size r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexInstance<T> {
    pub lambda: T,
    pub beta: T,
    pub lipschitz: T,
    pub n: usize,
    pub d: usize,
    pub edit_batch_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonconvexInstance<T> {
    pub lambda: T,
    pub beta: T,
    pub lipschitz: T,
    pub bound_b: T,
    pub n: usize,
    pub d: usize,
    pub edit_batch_size: usize,
}

fn ceil_count<T: Scalar>(x: T) -> usize {
    if x.is_nan() || x <= T::zero() {
        0
    } else {
        x.ceil().to_usize().unwrap_or(usize::MAX)
    }
}

fn check_sizes(n: usize, d: usize, r: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    if r == 0 || r > n {
        return Err(Error::BatchSize { r, n });
    }
    Ok(())
}

pub fn convex_recipe<T: Scalar>(inst: &ConvexInstance<T>, budget: &BudgetSpec<T>) -> Result<RecipeParams<T>> {
    ensure_positive("lambda", inst.lambda)?;
    ensure_positive("beta", inst.beta)?;
    ensure_positive("lipschitz", inst.lipschitz)?;
    check_sizes(inst.n, inst.d, inst.edit_batch_size)?;
    budget.validate()?;

    let (lambda, beta, l) = (inst.lambda, inst.beta, inst.lipschitz);
    let n = T::from_count(inst.n);
    let d = T::from_count(inst.d);
    let r = T::from_count(inst.edit_batch_size);
    let BudgetSpec { q, eps_dp, eps_dd, .. } = *budget;
    let four = T::lit(4.0);

    let kappa = (lambda + beta) / lambda;
    let eta = T::one() / (T::lit(2.0) * (lambda + beta));
    let sigma2 = four * q * l * l / (lambda * eps_dp * n * n);

    let deletion = four * kappa * (eps_dp / eps_dd).ln();
    let utility = four * kappa * (T::lit(5.0) * kappa).max(T::lit(8.0) * eps_dp * r * r / (q * d)).ln();
    let k_delete = ceil_count(deletion.max(utility));
    let k_delete_binding = if deletion >= utility {
        binding("k_delete", "deletion", deletion)
    } else {
        binding("k_delete", "utility", utility)
    };

    let privacy = four * kappa * (eps_dp * n * n / (four * q * d)).ln();
    let k_learn = ceil_count(privacy).max(k_delete);
    let k_learn_binding = if ceil_count(privacy) >= k_delete {
        binding("k_learn", "privacy", privacy)
    } else {
        binding("k_learn", "k_delete", T::from_count(k_delete))
    };

    let init_variance = sigma2 / (lambda * (T::one() - eta * lambda / T::lit(2.0)));
    let p = RecipeParams {
        eta,
        sigma2,
        k_learn,
        k_delete,
        init_variance,
        regime: Regime::Convex,
        kappa: Some(kappa),
        sigma2_floor: None,
        bindings: vec![k_learn_binding, k_delete_binding],
    };
    p.validate()?;
    Ok(p)
}

pub fn nonconvex_recipe<T: Scalar>(inst: &NonconvexInstance<T>, budget: &BudgetSpec<T>) -> Result<RecipeParams<T>> {
    ensure_positive("lambda", inst.lambda)?;
    if !(inst.beta >= T::zero()) {
        return Err(invalid("beta", "must be nonnegative"));
    }
    ensure_positive("lipschitz", inst.lipschitz)?;
    if !(inst.bound_b > T::one()) || !inst.bound_b.is_finite() {
        return Err(invalid("bound_b", "boundedness constant B must exceed 1"));
    }
    check_sizes(inst.n, inst.d, inst.edit_batch_size)?;
    budget.validate()?;

    let (lambda, beta, l, b) = (inst.lambda, inst.beta, inst.lipschitz, inst.bound_b);
    let n = T::from_count(inst.n);
    let d = T::from_count(inst.d);
    let r = T::from_count(inst.edit_batch_size);
    let BudgetSpec { q, eps_dp, eps_dd, .. } = *budget;
    if eps_dp >= d {
        return Err(Error::Precondition(format!(
            "non-convex recipe requires 0 < eps_dd <= eps_dp < d, got eps_dp = {eps_dp}, d = {d}"
        )));
    }

    let ln_b = b.ln();
    let eta = lambda * eps_dd / (T::lit(64.0) * d * q * b * (beta + lambda).powi(2));
    let c = T::lit(2.0) * b / (lambda * eta);

    let learn_term = c * (q * ln_b / eps_dd).ln();
    let k_learn = ceil_count(learn_term);
    let saving = c * (ln_b / (T::lit(2.0) * (eps_dd + r / n * ln_b))).ln();
    let delete_term = T::from_count(k_learn) - saving;
    let k_delete = ceil_count(delete_term);

    let k_max = T::from_count(k_learn.max(k_delete));
    let sigma2 = q * l * l * eta * k_max / (eps_dp * n * n);

    let p = RecipeParams {
        eta,
        sigma2,
        k_learn,
        k_delete,
        init_variance: sigma2 / lambda,
        regime: Regime::Nonconvex,
        kappa: None,
        sigma2_floor: Some(sigma2),
        bindings: vec![
            binding("eta", "step_cap", eta),
            binding("k_learn", "convergence", learn_term),
            binding("k_delete", "deletion", delete_term),
            binding("sigma2", "privacy", sigma2),
        ],
    };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> ConvexInstance<f64> {
        ConvexInstance { lambda: 1.0, beta: 3.0, lipschitz: 1.0, n: 100, d: 2, edit_batch_size: 1 }
    }

    #[test]
    fn convex_example() {
        let p = convex_recipe(&example(), &BudgetSpec::new(2.0, 1.0, 0.1).unwrap()).unwrap();
        assert_eq!(p.kappa, Some(4.0));
        assert_eq!(p.eta, 0.125);
        assert!((p.sigma2 - 8e-4).abs() < 1e-15);
        assert_eq!(p.k_delete, 48);
        assert_eq!(p.k_learn, 104);
        assert!((p.init_variance - 8e-4 / (1.0 - 0.0625)).abs() < 1e-15);
        assert_eq!(p.bindings[1].constraint, "utility");
        assert!((p.bindings[1].value - 16.0 * 20f64.ln()).abs() < 1e-12);
        assert_eq!(p.bindings[0].constraint, "privacy");
        let json = p.to_json();
        assert!(json.contains("\"kappa\":4.0") && json.contains("\"regime\":\"convex\""));
    }

    #[test]
    fn convex_equal_budgets_and_scaling() {
        let p = convex_recipe(&example(), &BudgetSpec::new(2.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.bindings[1].constraint, "utility");
        assert_eq!(p.k_delete, 48);
        let base = convex_recipe(&example(), &BudgetSpec::new(2.0, 1.0, 0.1).unwrap()).unwrap();
        let doubled =
            convex_recipe(&ConvexInstance { n: 200, ..example() }, &BudgetSpec::new(2.0, 1.0, 0.1).unwrap()).unwrap();
        assert!((base.sigma2 / doubled.sigma2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn convex_rejections() {
        let bad = BudgetSpec { q: 2.0, eps_dp: 0.1, eps_dd: 1.0, delta: None };
        assert!(convex_recipe(&example(), &bad).is_err());
        assert!(BudgetSpec::new(1.0, 1.0, 0.1).is_err());
        let b = BudgetSpec::new(2.0, 1.0, 0.1).unwrap();
        assert!(convex_recipe(&ConvexInstance { lambda: 0.0, ..example() }, &b).is_err());
        assert!(convex_recipe(&ConvexInstance { edit_batch_size: 101, ..example() }, &b).is_err());
    }

    fn nc() -> NonconvexInstance<f64> {
        NonconvexInstance {
            lambda: 1.0,
            beta: 1.0,
            lipschitz: 1.0,
            bound_b: std::f64::consts::E,
            n: 100,
            d: 1,
            edit_batch_size: 1,
        }
    }

    #[test]
    fn nonconvex_example() {
        let p = nonconvex_recipe(&nc(), &BudgetSpec::new(2.0, 0.9, 0.1).unwrap()).unwrap();
        let eta = 0.1 / (512.0 * std::f64::consts::E);
        assert!((p.eta - eta).abs() < 1e-18);
        let c = 2.0 * std::f64::consts::E / eta;
        assert_eq!(p.k_learn, (c * 20f64.ln()).ceil() as usize);
        assert!((p.k_learn as f64 - 226_500.0).abs() < 500.0);
        let saving = c * (1.0 / 0.22f64).ln();
        assert_eq!(p.k_delete, p.k_learn - saving.floor() as usize);
        assert!((p.k_learn - p.k_delete) as f64 - 114_500.0 < 500.0);
        let floor = 2.0 * eta * p.k_learn as f64 / (0.9 * 1e4);
        assert!((p.sigma2 - floor).abs() < 1e-15);
        assert_eq!(p.init_variance, p.sigma2);
    }

    #[test]
    fn nonconvex_full_batch_costs_more() {
        let p = nonconvex_recipe(
            &NonconvexInstance { edit_batch_size: 100, ..nc() },
            &BudgetSpec::new(2.0, 0.9, 0.1).unwrap(),
        )
        .unwrap();
        assert!(p.k_delete > p.k_learn);
    }

    #[test]
    fn nonconvex_learn_count_vanishes_at_log_one() {
        // q·ln B / ε_dd → 1⁺ as ε_dd → q·ln B from below; ε_dp < d forces d ≥ 3
        let inst = NonconvexInstance { d: 3, ..nc() };
        let p = nonconvex_recipe(&inst, &BudgetSpec::new(2.0, 2.0, 2.0 - 1e-9).unwrap()).unwrap();
        let far = nonconvex_recipe(&inst, &BudgetSpec::new(2.0, 2.0, 1.0).unwrap()).unwrap();
        assert!(p.k_learn * 1000 < far.k_learn);
    }

    #[test]
    fn nonconvex_rejects_large_privacy_budget() {
        let err = nonconvex_recipe(&nc(), &BudgetSpec::new(2.0, 1.0, 0.1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("eps_dp < d")));
        assert!(nonconvex_recipe(
            &NonconvexInstance { bound_b: 1.0, ..nc() },
            &BudgetSpec::new(2.0, 0.9, 0.1).unwrap()
        )
        .is_err());
    }

    #[test]
    fn sigma_override() {
        let p = nonconvex_recipe(&nc(), &BudgetSpec::new(2.0, 0.9, 0.1).unwrap()).unwrap();
        assert!(p.clone().with_sigma2(p.sigma2 / 2.0, 1.0).is_err());
        let up = p.with_sigma2(1.0, 2.0).unwrap();
        assert_eq!((up.sigma2, up.init_variance), (1.0, 0.5));
    }
}
