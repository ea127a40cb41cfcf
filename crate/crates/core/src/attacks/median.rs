use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::AttackReport;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Middle order statistic of an odd-length sequence.
pub fn median(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("values"));
    }
    if xs.len().is_multiple_of(2) {
        return Err(Error::EvenSize(xs.len()));
    }
    let mut v = xs.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    Ok(*m)
}

fn check_database(d0: &[f64]) -> Result<()> {
    if d0.len().is_multiple_of(2) {
        return Err(Error::EvenSize(d0.len()));
    }
    let mut sorted = d0.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotDistinct);
    }
    Ok(())
}

/// One run of the 1-adaptive attack: the requester overwrites `i−1` distinct
/// random indices with the published median `pub₀`, then the median's owner
/// replaces their record at step `i`. Returns whether the step-`i` release
/// still equals the deleted value.
pub fn median_attack_trial<R: Rng + ?Sized>(d0: &[f64], step: usize, rng: &mut R) -> Result<bool> {
    check_database(d0)?;
    if step < 1 {
        return Err(Error::Precondition("deletion step must be at least 1".into()));
    }
    let pub0 = median(d0)?;
    let owner = d0.iter().position(|&x| x == pub0).expect("median is a record");
    let mut db = d0.to_vec();
    let replaced = (step - 1).min(db.len());
    for ind in sample(rng, db.len(), replaced) {
        db[ind] = pub0;
    }
    let top = d0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    db[owner] = top + 1.0;
    Ok(median(&db)? == pub0)
}

/// Aggregates [`median_attack_trial`] over independently seeded trials
/// against the bound `1 − (1/2)^{i−3}`.
pub fn median_attack_run(d0: &[f64], step: usize, trials: usize, root: u64) -> Result<AttackReport> {
    check_database(d0)?;
    if step <= 3 {
        return Err(Error::Precondition("the attack bound needs deletion step i > 3".into()));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| median_attack_trial(d0, step, &mut stream_rng(root, t as u64)))
        .collect::<Result<Vec<bool>>>()?;
    let successes = outcomes.iter().filter(|&&s| s).count();
    let bound = 1.0 - 0.5f64.powi(step as i32 - 3);
    Ok(AttackReport::from_outcomes("median", successes, 0, trials, Some(bound), Vec::new()))
}
