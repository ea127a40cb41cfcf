//! Online learn/delete protocol driven by an update requester.
//!
//! Release 0 is `learn(D₀)`; each later step asks the requester for an edit,
//! applies it, and releases `delete(D_{i−1}, u_i, θ̂_{i−1})`. Step `i` draws its
//! randomness from stream `i` of the root seed, so every release can be
//! recomputed from its predecessor alone.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_edit, Database, EditRequest, ModelParams, Objective};
use crate::noisy_gd::{delete, gaussian_pushforward, learn, noisy_gd_run, GaussianLaw, RecipeParams};
use crate::rng::{derive_seed, stream_rng};
use crate::scalar::Scalar;

pub const TRANSCRIPT_SCHEMA: &str = "unlearn.transcript/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Release<T> {
    pub step: usize,
    pub theta: ModelParams<T>,
}

/// What an adaptive requester may look at when choosing the step-`step` edit.
#[derive(Debug)]
pub struct RequesterView<'a, T> {
    pub step: usize,
    pub n: usize,
    pub dim: usize,
    /// The most recent releases, oldest first; never more than `p_limit`.
    pub releases: &'a [Release<T>],
}

type Policy<T> = Box<dyn FnMut(&RequesterView<T>) -> EditRequest<T> + Send>;

pub enum Requester<T> {
    /// Non-adaptive: the request for step `i` is element `i − 1`.
    Fixed(Vec<EditRequest<T>>),
    /// Adaptive policy seeing at most `p_limit` recent releases (`None` = all).
    Adaptive { p_limit: Option<usize>, policy: Policy<T> },
}

impl<T: Scalar> Requester<T> {
    pub fn fixed(requests: Vec<EditRequest<T>>) -> Self {
        Requester::Fixed(requests)
    }

    pub fn adaptive(
        p_limit: Option<usize>,
        policy: impl FnMut(&RequesterView<T>) -> EditRequest<T> + Send + 'static,
    ) -> Self {
        Requester::Adaptive { p_limit, policy: Box::new(policy) }
    }

    /// Number of releases the requester may observe; fixed sequences see none.
    pub fn p_limit(&self) -> Option<usize> {
        match self {
            Requester::Fixed(_) => Some(0),
            Requester::Adaptive { p_limit, .. } => *p_limit,
        }
    }

    fn request(&mut self, step: usize, n: usize, dim: usize, window: &VecDeque<Release<T>>) -> Result<EditRequest<T>> {
        match self {
            Requester::Fixed(reqs) => reqs
                .get(step - 1)
                .cloned()
                .ok_or(Error::Requester { step, source: Box::new(Error::Empty("fixed request sequence exhausted")) }),
            Requester::Adaptive { p_limit, policy } => {
                let visible: Vec<Release<T>> = match p_limit {
                    Some(p) => window.iter().skip(window.len().saturating_sub(*p)).cloned().collect(),
                    None => window.iter().cloned().collect(),
                };
                Ok(policy(&RequesterView { step, n, dim, releases: &visible }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub root: u64,
    pub stream: u64,
}

/// One line of a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TranscriptEntry<T> {
    pub schema: String,
    pub step: usize,
    pub edit: Option<EditRequest<T>>,
    pub release: ModelParams<T>,
    pub db_digest: String,
    pub seed: SeedRecord,
    /// Releases the requester was shown before emitting `edit`.
    pub observed: usize,
    pub recipe: RecipeParams<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Transcript<T> {
    pub entries: Vec<TranscriptEntry<T>>,
}

impl<T: Scalar> Transcript<T> {
    pub fn releases(&self) -> impl Iterator<Item = &ModelParams<T>> {
        self.entries.iter().map(|e| &e.release)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("transcript entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str::<TranscriptEntry<T>>(l)
                    .map_err(|e| Error::Precondition(format!("bad transcript line: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, e) in entries.iter().enumerate() {
            if e.step != i {
                return Err(Error::Precondition(format!("transcript step {} at line {i}", e.step)));
            }
            if e.schema != TRANSCRIPT_SCHEMA {
                return Err(Error::Precondition(format!("unknown transcript schema {}", e.schema)));
            }
        }
        Ok(Transcript { entries })
    }

    /// Recomputes every release from `D₀`, the recorded edits and seeds, and
    /// checks bit equality.
    pub fn replay(&self, obj: &Objective<T>, d0: &Database<T>) -> Result<()> {
        let mut db = d0.clone();
        let mut prev: Option<&ModelParams<T>> = None;
        for e in &self.entries {
            let mut rng = stream_rng(e.seed.root, e.seed.stream);
            let theta = match (&e.edit, prev) {
                (None, None) => learn(obj, &db, &e.recipe, &mut rng)?,
                (Some(u), Some(p)) => {
                    db = apply_edit(&db, u)?;
                    let r = &e.recipe;
                    noisy_gd_run(obj, &db, p, r.k_delete, r.eta, r.sigma2, &mut rng)?
                }
                _ => return Err(Error::Precondition(format!("step {} has a misplaced edit", e.step))),
            };
            if db.digest() != e.db_digest {
                return Err(Error::Precondition(format!("database digest mismatch at step {}", e.step)));
            }
            let same = theta.0.len() == e.release.0.len()
                && theta
                    .0
                    .iter()
                    .zip(&e.release.0)
                    .all(|(a, b)| a.to_f64().map(f64::to_bits) == b.to_f64().map(f64::to_bits));
            if !same {
                return Err(Error::Precondition(format!("release {} does not replay", e.step)));
            }
            prev = Some(&e.release);
        }
        Ok(())
    }
}

/// Everything the protocol carries between steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StreamState<T: Scalar> {
    pub step: usize,
    pub database: Database<T>,
    pub model: ModelParams<T>,
}

fn entry<T: Scalar>(
    step: usize,
    edit: Option<EditRequest<T>>,
    release: &ModelParams<T>,
    db: &Database<T>,
    root: u64,
    observed: usize,
    recipe: &RecipeParams<T>,
) -> TranscriptEntry<T> {
    TranscriptEntry {
        schema: TRANSCRIPT_SCHEMA.into(),
        step,
        edit,
        release: release.clone(),
        db_digest: db.digest(),
        seed: SeedRecord { root, stream: step as u64 },
        observed,
        recipe: recipe.clone(),
    }
}

/// Runs the learner and then `steps` edit steps.
pub fn run_stream<T: Scalar>(
    obj: &Objective<T>,
    d0: &Database<T>,
    recipe: &RecipeParams<T>,
    requester: &mut Requester<T>,
    steps: usize,
    root: u64,
) -> Result<Transcript<T>> {
    recipe.validate()?;
    let theta0 = learn(obj, d0, recipe, &mut stream_rng(root, 0))?;
    let mut entries = vec![entry(0, None, &theta0, d0, root, 0, recipe)];
    let state = StreamState { step: 0, database: d0.clone(), model: theta0 };
    let (rest, _) = resume_stream(obj, state, recipe, requester, steps, root)?;
    entries.extend(rest);
    Ok(Transcript { entries })
}

/// Continues a stream from a saved state for `steps` more edits.
///
/// The requester's window restarts with the saved release only.
pub fn resume_stream<T: Scalar>(
    obj: &Objective<T>,
    state: StreamState<T>,
    recipe: &RecipeParams<T>,
    requester: &mut Requester<T>,
    steps: usize,
    root: u64,
) -> Result<(Vec<TranscriptEntry<T>>, StreamState<T>)> {
    let StreamState { step: start, mut database, mut model } = state;
    let keep = requester.p_limit().unwrap_or(usize::MAX);
    let mut window = VecDeque::new();
    let mut entries = Vec::with_capacity(steps);
    if keep > 0 {
        window.push_back(Release { step: start, theta: model.clone() });
    }
    for step in start + 1..=start + steps {
        let observed = window.len();
        let u = requester.request(step, database.len(), database.dim(), &window)?;
        u.validate(database.len(), database.dim()).map_err(|e| Error::Requester { step, source: Box::new(e) })?;
        let next = apply_edit(&database, &u)?;
        model = delete(obj, &database, &u, &model, recipe, &mut stream_rng(root, step as u64))?;
        database = next;
        entries.push(entry(step, Some(u), &model, &database, root, observed, recipe));
        if keep > 0 {
            window.push_back(Release { step, theta: model.clone() });
            while window.len() > keep {
                window.pop_front();
            }
        }
    }
    Ok((entries, StreamState { step: start + steps, database, model }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Both streams draw identical noise.
    Coupled,
    /// The neighbour stream uses an independently derived root seed.
    Independent,
}

fn check_neighbours<T: Scalar>(
    d0: &Database<T>,
    d0n: &Database<T>,
    requests: &[EditRequest<T>],
) -> Result<Option<usize>> {
    if d0.len() != d0n.len() || d0.dim() != d0n.dim() {
        return Err(Error::DimensionMismatch { expected: d0.len(), got: d0n.len() });
    }
    let diff = d0.differing_indices(d0n);
    match diff.as_slice() {
        [] => Ok(None),
        [j] => {
            if requests.iter().any(|u| u.indices().any(|i| i == *j)) {
                Ok(Some(*j))
            } else {
                Err(Error::Precondition(format!("no edit in the sequence rewrites differing index {j}")))
            }
        }
        _ => Err(Error::NotNeighbours(diff.len())),
    }
}

/// Runs the same fixed edit sequence from two neighbouring starts.
#[allow(clippy::too_many_arguments)]
pub fn counterfactual_pair<T: Scalar>(
    obj: &Objective<T>,
    d0: &Database<T>,
    d0_neighbour: &Database<T>,
    requests: &[EditRequest<T>],
    recipe: &RecipeParams<T>,
    steps: usize,
    root: u64,
    coupling: Coupling,
) -> Result<(Transcript<T>, Transcript<T>)> {
    check_neighbours(d0, d0_neighbour, requests)?;
    let other_root = match coupling {
        Coupling::Coupled => root,
        Coupling::Independent => derive_seed(root, 1),
    };
    let a = run_stream(obj, d0, recipe, &mut Requester::fixed(requests.to_vec()), steps, root)?;
    let b = run_stream(obj, d0_neighbour, recipe, &mut Requester::fixed(requests.to_vec()), steps, other_root)?;
    Ok((a, b))
}

/// Exact release laws of a fixed-sequence stream on a quadratic objective.
pub fn stream_laws<T: Scalar>(
    obj: &Objective<T>,
    d0: &Database<T>,
    recipe: &RecipeParams<T>,
    requests: &[EditRequest<T>],
    steps: usize,
) -> Result<Vec<GaussianLaw<T>>> {
    if requests.len() < steps {
        return Err(Error::Empty("fixed request sequence exhausted"));
    }
    let init = GaussianLaw::isotropic(obj.dim(), recipe.init_variance);
    let mut law = gaussian_pushforward(obj, d0, &init, recipe.k_learn, recipe.eta, recipe.sigma2)?;
    let mut db = d0.clone();
    let mut laws = vec![law.clone()];
    for u in &requests[..steps] {
        db = apply_edit(&db, u)?;
        law = gaussian_pushforward(obj, &db, &law, recipe.k_delete, recipe.eta, recipe.sigma2)?;
        laws.push(law.clone());
    }
    Ok(laws)
}

/// Per-step `D_q` between the laws of the two streams of a counterfactual pair.
pub fn counterfactual_divergences<T: Scalar>(
    obj: &Objective<T>,
    d0: &Database<T>,
    d0_neighbour: &Database<T>,
    requests: &[EditRequest<T>],
    recipe: &RecipeParams<T>,
    steps: usize,
    q: T,
) -> Result<Vec<T>> {
    check_neighbours(d0, d0_neighbour, &requests[..steps.min(requests.len())])?;
    let a = stream_laws(obj, d0, recipe, requests, steps)?;
    let b = stream_laws(obj, d0_neighbour, recipe, requests, steps)?;
    a.iter().zip(&b).map(|(x, y)| x.renyi(y, q)).collect()
}
