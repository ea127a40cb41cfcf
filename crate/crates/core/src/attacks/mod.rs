//! Constructions showing that single-release unlearning guarantees break
//! under streaming releases, stateful unlearners and adaptive requesters.

mod counting;
mod median;
mod pgd;

use serde::{Deserialize, Serialize};

pub use counting::{
    counting_adversary, counting_attack_run, counting_publish, counting_update, AdversaryDecision, CountingConfig,
    CountingState,
};
pub use median::{median, median_attack_run, median_attack_trial};
pub use pgd::{
    neel_noise_sigma, pgd_construction, pgd_run, pgd_stream_divergence, PgdConfig, PgdConstruction, PgdDivergence,
};

/// Aggregate outcome of a Monte-Carlo attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: String,
    pub trials: usize,
    pub successes: usize,
    /// Trials where the adversary could not decide; scored as half a success.
    pub ties: usize,
    pub success_rate: f64,
    /// `√(p(1−p)/trials)` at the empirical rate.
    pub std_err: f64,
    pub theoretical_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divergence_series: Vec<f64>,
}

impl AttackReport {
    pub(crate) fn from_outcomes(
        attack: &str,
        successes: usize,
        ties: usize,
        trials: usize,
        theoretical_bound: Option<f64>,
        divergence_series: Vec<f64>,
    ) -> Self {
        let rate = if trials == 0 { 0.0 } else { (successes as f64 + 0.5 * ties as f64) / trials as f64 };
        let std_err = if trials == 0 { 0.0 } else { (rate * (1.0 - rate) / trials as f64).sqrt() };
        AttackReport {
            attack: attack.into(),
            trials,
            successes,
            ties,
            success_rate: rate,
            std_err,
            theoretical_bound,
            divergence_series,
        }
    }
}
