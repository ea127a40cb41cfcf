use serde::{Deserialize, Serialize};

use crate::accountant::{gaussian_renyi, rdp_to_dp, RenyiBound, Rule};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::model::{Database, EditRequest, LossModel, ModelParams, Objective, Record};
use crate::scalar::Scalar;
use crate::vector;

/// Strongly convex quadratic construction for projected gradient descent
/// published with Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgdConfig<T> {
    pub lambda: T,
    pub beta: T,
    pub lipschitz: T,
    pub n: usize,
    /// Unlearning steps `T` per edit.
    pub k_unlearn: usize,
    pub eps: T,
    pub delta: T,
    /// Rényi order used for divergence accounting.
    pub q: T,
}

impl<T: Scalar> PgdConfig<T> {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("lambda", self.lambda)?;
        ensure_positive("lipschitz", self.lipschitz)?;
        ensure_positive("eps", self.eps)?;
        if !(self.beta >= self.lambda) || !self.beta.is_finite() {
            return Err(invalid("beta", "need 0 < lambda <= beta"));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(invalid("delta", "must lie in (0, 1)"));
        }
        if !(self.q > T::one()) {
            return Err(invalid("q", "Rényi order must exceed 1"));
        }
        if self.n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        Ok(())
    }

    /// Contraction factor `(β−λ)/(β+λ)`.
    pub fn gamma(&self) -> T {
        (self.beta - self.lambda) / (self.beta + self.lambda)
    }

    pub fn eta(&self) -> T {
        T::lit(2.0) / (self.beta + self.lambda)
    }

    pub fn ball_radius(&self) -> T {
        self.lipschitz / self.beta
    }

    /// `T + ceil(log(r·λ·n/L) / log(1/γ))`.
    pub fn k_learn(&self) -> usize {
        let g = self.gamma();
        if g == T::zero() {
            return self.k_unlearn + 1;
        }
        let ratio =
            (self.ball_radius() * self.lambda * T::from_count(self.n) / self.lipschitz).ln() / (T::one() / g).ln();
        let extra = if ratio > T::zero() { ratio.ceil().to_usize().unwrap_or(usize::MAX) } else { 0 };
        self.k_unlearn + extra
    }
}

/// Projected gradient descent onto the centred ball of radius `ball_radius`.
pub fn pgd_run<T: Scalar>(
    obj: &Objective<T>,
    db: &Database<T>,
    w: &ModelParams<T>,
    k: usize,
    eta: T,
    ball_radius: T,
) -> Result<ModelParams<T>> {
    ensure_positive("eta", eta)?;
    ensure_positive("ball_radius", ball_radius)?;
    if w.dim() != obj.dim() || db.dim() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: w.dim() });
    }
    if vector::norm(w.values()) > ball_radius * (T::one() + T::epsilon() * T::lit(16.0)) {
        return Err(Error::Precondition("starting point lies outside the ball".into()));
    }
    let d = obj.dim();
    let mut theta = w.0.clone();
    let mut grad = vec![T::zero(); d];
    let mut scratch = vec![T::zero(); d];
    for _ in 0..k {
        obj.gradient_into(db, &theta, &mut grad, &mut scratch);
        vector::axpy(-eta, &grad, &mut theta);
        let norm = vector::norm(&theta);
        if norm > ball_radius {
            vector::scale(ball_radius / norm, &mut theta);
        }
    }
    Ok(ModelParams(theta))
}

/// Publish-noise scale `4√2·L·γ^T / (λn(1−γ^T)(√(ln(1/δ)+ε) − √ln(1/δ)))`.
pub fn neel_noise_sigma<T: Scalar>(cfg: &PgdConfig<T>) -> Result<T> {
    cfg.validate()?;
    let gt = cfg.gamma().powi(cfg.k_unlearn as i32);
    if !(gt < T::one()) {
        return Err(Error::Precondition("gamma^T must be below 1".into()));
    }
    let log_inv_delta = (T::one() / cfg.delta).ln();
    let gap = (log_inv_delta + cfg.eps).sqrt() - log_inv_delta.sqrt();
    let denom = cfg.lambda * T::from_count(cfg.n) * (T::one() - gt) * gap;
    if !(denom > T::zero()) {
        return Err(Error::Precondition("degenerate noise calibration denominator".into()));
    }
    Ok(T::lit(4.0) * T::lit(2.0).sqrt() * cfg.lipschitz * gt / denom)
}

/// Objective and databases of the construction: `D₀` holds `(r, 0)` at index 0
/// and zeros elsewhere, its neighbour holds `(−r, 0)`, and the deletion edit
/// zeroes index 0.
#[derive(Debug, Clone)]
pub struct PgdConstruction<T: Scalar> {
    pub objective: Objective<T>,
    pub d0: Database<T>,
    pub d0_neighbour: Database<T>,
    pub deletion: EditRequest<T>,
}

pub fn pgd_construction<T: Scalar>(cfg: &PgdConfig<T>) -> Result<PgdConstruction<T>> {
    cfg.validate()?;
    let loss = LossModel::quadratic_2d(cfg.lambda, cfg.beta, cfg.lipschitz)?;
    let objective = Objective::new(loss, T::zero(), None)?;
    let r = cfg.ball_radius();
    let mut rows = vec![vec![T::zero(); 2]; cfg.n];
    rows[0][0] = r;
    let d0 = Database::from_rows(rows.clone())?;
    rows[0][0] = -r;
    let d0_neighbour = Database::from_rows(rows)?;
    let deletion = EditRequest::single(0, Record(vec![T::zero(); 2]));
    Ok(PgdConstruction { objective, d0, d0_neighbour, deletion })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PgdDivergence<T> {
    pub sigma: T,
    pub k_learn: usize,
    /// Closed-form per-release terms for releases `1..=m`.
    pub closed_form_terms: Vec<T>,
    pub closed_form_total: T,
    pub closed_form_limit: T,
    /// Per-release Gaussian divergences recomputed from actual trajectories.
    pub empirical_series: Vec<T>,
    pub empirical_total: T,
    /// (ε, δ) view of the first post-deletion release alone.
    pub single_release_budget: T,
    /// Calibrated worst-case target `ε + ln(1/δ)/(q−1)`.
    pub worst_case_budget: T,
    /// Smallest `m` whose cumulative (ε, δ) view exceeds `single_release_budget`.
    pub crossing: Option<usize>,
    pub worst_case_crossing: Option<usize>,
}

/// Cumulative divergence between the post-deletion release streams of the
/// construction's two neighbouring starts.
pub fn pgd_stream_divergence<T: Scalar>(cfg: &PgdConfig<T>, m: usize) -> Result<PgdDivergence<T>> {
    let sigma = neel_noise_sigma(cfg)?;
    let sigma2 = sigma * sigma;
    let c = pgd_construction(cfg)?;
    let (gamma, eta, r) = (cfg.gamma(), cfg.eta(), cfg.ball_radius());
    let k_learn = cfg.k_learn();
    let n = T::from_count(cfg.n);
    let two = T::lit(2.0);

    let base = two * r * (T::one() - gamma.powi(k_learn as i32)) / n;
    let gamma_t = gamma.powi(cfg.k_unlearn as i32);
    let closed_form_terms: Vec<T> = (1..=m)
        .map(|i| {
            let gap = base * gamma_t.powi(i as i32);
            cfg.q * gap * gap / (two * sigma2)
        })
        .collect();
    let closed_form_total = closed_form_terms.iter().copied().sum();
    let g2 = gamma_t * gamma_t;
    let closed_form_limit =
        two * cfg.q * r * r * (T::one() - gamma.powi(k_learn as i32)).powi(2) * g2 / (sigma2 * n * n * (T::one() - g2));

    let zero = ModelParams::zeros(2);
    let mut a = pgd_run(&c.objective, &c.d0, &zero, k_learn, eta, r)?;
    let mut b = pgd_run(&c.objective, &c.d0_neighbour, &zero, k_learn, eta, r)?;
    let after = crate::model::apply_edit(&c.d0, &c.deletion)?;
    let after_n = crate::model::apply_edit(&c.d0_neighbour, &c.deletion)?;
    let mut empirical_series = Vec::with_capacity(m);
    for _ in 0..m {
        a = pgd_run(&c.objective, &after, &a, cfg.k_unlearn, eta, r)?;
        b = pgd_run(&c.objective, &after_n, &b, cfg.k_unlearn, eta, r)?;
        empirical_series.push(gaussian_renyi(cfg.q, a.values(), b.values(), sigma2)?.epsilon);
    }
    let empirical_total = empirical_series.iter().copied().sum();

    let to_dp =
        |eps: T| -> Result<T> { Ok(rdp_to_dp(&RenyiBound::new(cfg.q, eps, Rule::Composition)?, cfg.delta)?.epsilon) };
    let single_release_budget = to_dp(closed_form_terms.first().copied().unwrap_or(T::zero()))?;
    let worst_case_budget = cfg.eps + (T::one() / cfg.delta).ln() / (cfg.q - T::one());
    let mut crossing = None;
    let mut worst_case_crossing = None;
    let mut running = T::zero();
    for (i, t) in closed_form_terms.iter().enumerate() {
        running += *t;
        let view = to_dp(running)?;
        if crossing.is_none() && view > single_release_budget {
            crossing = Some(i + 1);
        }
        if worst_case_crossing.is_none() && view > worst_case_budget {
            worst_case_crossing = Some(i + 1);
        }
    }
    Ok(PgdDivergence {
        sigma,
        k_learn,
        closed_form_terms,
        closed_form_total,
        closed_form_limit,
        empirical_series,
        empirical_total,
        single_release_budget,
        worst_case_budget,
        crossing,
        worst_case_crossing,
    })
}
