use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AttackReport;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::model::{apply_edit, Database, EditRequest, Record, Replacement};
use crate::rng::stream_rng;

/// State of the stateful counting unlearner: the live count, the number of
/// query-positive records deleted so far, and the edit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountingState {
    pub cnt: usize,
    pub del: usize,
    pub step: usize,
}

impl CountingState {
    pub fn initial(db: &Database<f64>, query: impl Fn(&Record<f64>) -> bool) -> Self {
        CountingState { cnt: db.records().iter().filter(|r| query(r)).count(), del: 0, step: 0 }
    }

    /// `del / step`, zero before the first edit.
    pub fn offset(&self) -> f64 {
        if self.step == 0 {
            0.0
        } else {
            self.del as f64 / self.step as f64
        }
    }

    /// `cnt + del/step` before noise.
    pub fn noiseless(&self) -> f64 {
        self.cnt as f64 + self.offset()
    }
}

/// `cnt ← cnt + q(y) − q(D[ind])`, `del ← del + q(D[ind])`, `step ← step + 1`.
pub fn counting_update(
    state: CountingState,
    db_prev: &Database<f64>,
    u: &Replacement<f64>,
    query: impl Fn(&Record<f64>) -> bool,
) -> Result<CountingState> {
    let old = db_prev.get(u.index).ok_or(Error::IndexOutOfRange { index: u.index, n: db_prev.len() })?;
    let (removed, added) = (query(old) as usize, query(&u.record) as usize);
    if state.cnt < removed {
        return Err(Error::Precondition("count state is inconsistent with the database".into()));
    }
    Ok(CountingState { cnt: state.cnt - removed + added, del: state.del + removed, step: state.step + 1 })
}

/// Laplace draw with scale `b` by inverse CDF.
fn laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (-2.0 * u.abs()).ln_1p()
}

/// `cnt + del/step + Lap(1/ε)`.
pub fn counting_publish<R: Rng + ?Sized>(state: &CountingState, eps: f64, rng: &mut R) -> Result<f64> {
    ensure_positive("eps", eps)?;
    Ok(state.noiseless() + laplace(1.0 / eps, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryDecision {
    /// `ln p(obs | positive) − ln p(obs | negative)`.
    pub llr: f64,
    /// `Some(true)` if the deleted record is judged query-positive; `None` on a tie.
    pub decision: Option<bool>,
    /// Running sum of per-release max-divergences `ε·|shift_j|`.
    pub cumulative_divergence: Vec<f64>,
}

/// Likelihood-ratio sign test between two Laplace location hypotheses.
///
/// `mean_negative[j]` and `mean_positive[j]` are the noiseless releases the
/// adversary predicts for observation `j` under each hypothesis.
pub fn counting_adversary(
    observations: &[f64],
    mean_negative: &[f64],
    mean_positive: &[f64],
    eps: f64,
) -> Result<AdversaryDecision> {
    ensure_positive("eps", eps)?;
    if observations.len() != mean_negative.len() || observations.len() != mean_positive.len() {
        return Err(Error::DimensionMismatch { expected: observations.len(), got: mean_negative.len() });
    }
    let mut llr = 0.0;
    let mut total = 0.0;
    let mut cumulative_divergence = Vec::with_capacity(observations.len());
    for ((&o, &m0), &m1) in observations.iter().zip(mean_negative).zip(mean_positive) {
        llr += eps * ((o - m0).abs() - (o - m1).abs());
        total += eps * (m1 - m0).abs();
        cumulative_divergence.push(total);
    }
    let decision = if llr > 0.0 {
        Some(true)
    } else if llr < 0.0 {
        Some(false)
    } else {
        None
    };
    Ok(AdversaryDecision { llr, decision, cumulative_divergence })
}

/// Streaming scenario: `n` binary records; random edits at steps `1..i`; at
/// step `i` the target record (positive or negative with equal probability)
/// is replaced by a negative record; the adversary watches releases
/// `i..i+observed` and guesses the deleted record's query value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingConfig {
    pub n: usize,
    pub deletion_step: usize,
    pub observed: usize,
    pub eps: f64,
    pub trials: usize,
}

impl CountingConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("eps", self.eps)?;
        if self.n < 2 {
            return Err(invalid("n", "need at least two records"));
        }
        if self.deletion_step == 0 {
            return Err(invalid("deletion_step", "must be at least 1"));
        }
        Ok(())
    }
}

fn positive(r: &Record<f64>) -> bool {
    r.values()[0] > 0.5
}

fn bit<R: Rng + ?Sized>(rng: &mut R) -> Record<f64> {
    Record(vec![if rng.random::<bool>() { 1.0 } else { 0.0 }])
}

struct Trial {
    decision: Option<bool>,
    truth: bool,
    offsets_in_range: bool,
}

fn run_trial(cfg: &CountingConfig, root: u64, t: usize) -> Result<Trial> {
    let mut rng = stream_rng(root, t as u64);
    let truth: bool = rng.random();
    let target = rng.random_range(0..cfg.n);
    let mut rows: Vec<Vec<f64>> = (0..cfg.n).map(|_| bit(&mut rng).0).collect();
    rows[target][0] = if truth { 1.0 } else { 0.0 };
    let mut db = Database::from_rows(rows.clone())?;
    rows[target][0] = if truth { 0.0 } else { 1.0 };
    let mut alt = Database::from_rows(rows)?;
    let (mut s_true, mut s_alt) = (CountingState::initial(&db, positive), CountingState::initial(&alt, positive));
    let (mut obs, mut m_true, mut m_alt) = (Vec::new(), Vec::new(), Vec::new());
    let mut offsets_in_range = true;
    let last = cfg.deletion_step + cfg.observed.saturating_sub(1);
    for step in 1..=last {
        let u = if step == cfg.deletion_step {
            Replacement { index: target, record: Record(vec![0.0]) }
        } else {
            // other edits avoid the target before its deletion
            let index = loop {
                let i = rng.random_range(0..cfg.n);
                if step > cfg.deletion_step || i != target {
                    break i;
                }
            };
            Replacement { index, record: bit(&mut rng) }
        };
        s_true = counting_update(s_true, &db, &u, positive)?;
        s_alt = counting_update(s_alt, &alt, &u, positive)?;
        let edit = EditRequest::single(u.index, u.record);
        db = apply_edit(&db, &edit)?;
        alt = apply_edit(&alt, &edit)?;
        let off = s_true.offset();
        offsets_in_range &= (0.0..=1.0).contains(&off);
        let published = counting_publish(&s_true, cfg.eps, &mut rng)?;
        if step >= cfg.deletion_step && cfg.observed > 0 {
            obs.push(published);
            m_true.push(s_true.noiseless());
            m_alt.push(s_alt.noiseless());
        }
    }
    let (neg, pos) = if truth { (&m_alt, &m_true) } else { (&m_true, &m_alt) };
    let decision = counting_adversary(&obs, neg, pos, cfg.eps)?.decision;
    Ok(Trial { decision, truth, offsets_in_range })
}

/// Runs the scenario; the report's `divergence_series` is `Σ_{j=i}^{i+m−1} ε/j`
/// and `theoretical_bound` is absent (the proof gives no error rate).
/// The second value is whether every release had offset `del/step ∈ [0, 1]`.
pub fn counting_attack_run(cfg: &CountingConfig, root: u64) -> Result<(AttackReport, bool)> {
    cfg.validate()?;
    let trials = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, root, t)).collect::<Result<Vec<_>>>()?;
    let successes = trials.iter().filter(|t| t.decision == Some(t.truth)).count();
    let ties = trials.iter().filter(|t| t.decision.is_none()).count();
    let offsets_ok = trials.iter().all(|t| t.offsets_in_range);
    let mut total = 0.0;
    let series = (cfg.deletion_step..cfg.deletion_step + cfg.observed)
        .map(|j| {
            total += cfg.eps / j as f64;
            total
        })
        .collect();
    Ok((AttackReport::from_outcomes("counting", successes, ties, cfg.trials, None, series), offsets_ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(bits: &[f64]) -> Database<f64> {
        Database::from_rows(bits.iter().map(|&b| vec![b]).collect()).unwrap()
    }

    #[test]
    fn recurrences() {
        let d = db(&[1.0, 0.0, 1.0]);
        let s = CountingState { cnt: 2, del: 0, step: 0 };
        let out = counting_update(s, &d, &Replacement { index: 0, record: Record(vec![0.0]) }, positive).unwrap();
        assert_eq!(out, CountingState { cnt: 1, del: 1, step: 1 });
        let out = counting_update(s, &d, &Replacement { index: 1, record: Record(vec![0.0]) }, positive).unwrap();
        assert_eq!(out, CountingState { cnt: 2, del: 0, step: 1 });
        let s = CountingState { cnt: 5, del: 1, step: 3 };
        let d = db(&[1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
        let out = counting_update(s, &d, &Replacement { index: 2, record: Record(vec![1.0]) }, positive).unwrap();
        assert_eq!(out, CountingState { cnt: 5, del: 2, step: 4 });
    }

    #[test]
    fn noiseless_release() {
        assert_eq!(CountingState { cnt: 5, del: 2, step: 4 }.noiseless(), 5.5);
        assert_eq!(CountingState { cnt: 7, del: 0, step: 0 }.noiseless(), 7.0);
    }

    #[test]
    fn laplace_moments() {
        let mut rng = stream_rng(3, 0);
        let s = CountingState::default();
        let xs: Vec<f64> = (0..200_000).map(|_| counting_publish(&s, 2.0, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let mad = xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((mad - 0.5).abs() < 0.01);
    }

    #[test]
    fn adversary_basics() {
        let d = counting_adversary(&[], &[], &[], 1.0).unwrap();
        assert_eq!((d.llr, d.decision), (0.0, None));
        let obs = [10.3, 10.1];
        let d = counting_adversary(&obs, &[10.0, 10.0], &[10.25, 10.2], 1.0).unwrap();
        assert_eq!(d.decision, Some(true));
        assert!((d.cumulative_divergence[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn no_observations_is_a_coin_flip() {
        let cfg = CountingConfig { n: 20, deletion_step: 4, observed: 0, eps: 1.0, trials: 200 };
        let (r, ok) = counting_attack_run(&cfg, 1).unwrap();
        assert!(ok);
        assert_eq!(r.ties, 200);
        assert_eq!(r.success_rate, 0.5);
    }
}
