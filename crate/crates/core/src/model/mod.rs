//! Databases, edit requests, loss models and the regularized objective.
//!
//! Records and parameters are dense vectors of the same dimension `d`.
//! A database has a fixed size `n`; edits only ever replace records.

mod loss;
mod objective;

pub use loss::{LossKind, LossModel};
pub(crate) use objective::mean_and_stderr;
pub use objective::{clip_gradient, excess_empirical_risk, quadratic_minimizer, Objective, RiskEstimate};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector;

/// One data record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Scalar")]
pub struct Record<T>(pub Vec<T>);

impl<T: Scalar> Record<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn norm(&self) -> T {
        vector::norm(&self.0)
    }
}

impl<T: Scalar> From<Vec<T>> for Record<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Model parameters `θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Scalar")]
pub struct ModelParams<T>(pub Vec<T>);

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(d: usize) -> Self {
        Self(vec![T::zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> From<Vec<T>> for ModelParams<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Fixed-size sequence of records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatabaseRepr<T>", into = "DatabaseRepr<T>")]
#[serde(bound = "T: Scalar")]
pub struct Database<T: Scalar> {
    records: Vec<Record<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct DatabaseRepr<T: Scalar> {
    n: usize,
    records: Vec<Record<T>>,
}

impl<T: Scalar> TryFrom<DatabaseRepr<T>> for Database<T> {
    type Error = Error;

    fn try_from(repr: DatabaseRepr<T>) -> Result<Self> {
        if repr.n != repr.records.len() {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("declared {} but {} records given", repr.n, repr.records.len()),
            });
        }
        Database::new(repr.records)
    }
}

impl<T: Scalar> From<Database<T>> for DatabaseRepr<T> {
    fn from(db: Database<T>) -> Self {
        DatabaseRepr { n: db.records.len(), records: db.records }
    }
}

impl<T: Scalar> Database<T> {
    /// Builds a database; all records must share one dimension and be finite.
    pub fn new(records: Vec<Record<T>>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("database"));
        }
        let d = records[0].dim();
        for r in &records {
            if r.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: r.dim() });
            }
            if !vector::all_finite(r.values()) {
                return Err(Error::InvalidParameter { name: "record", reason: "non-finite entry".into() });
            }
        }
        Ok(Self { records })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Record).collect())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.records[0].dim()
    }

    pub fn records(&self) -> &[Record<T>] {
        &self.records
    }

    pub fn get(&self, index: usize) -> Option<&Record<T>> {
        self.records.get(index)
    }

    /// Mean record `x̄`.
    pub fn mean(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.dim()];
        for r in &self.records {
            vector::axpy(T::one(), r.values(), &mut m);
        }
        vector::scale(T::one() / T::from_count(self.len()), &mut m);
        m
    }

    /// Indices at which two equally sized databases differ.
    pub fn differing_indices(&self, other: &Self) -> Vec<usize> {
        self.records.iter().zip(&other.records).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect()
    }

    /// Hex SHA-256 over the little-endian `f64` bits of every entry.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        for r in &self.records {
            for v in r.values() {
                h.update(v.as_f64().to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// A single `index -> record` replacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Replacement<T> {
    pub index: usize,
    pub record: Record<T>,
}

/// Atomic batch of replacements at pairwise distinct indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EditRepr<T>")]
#[serde(bound = "T: Scalar")]
pub struct EditRequest<T> {
    replacements: Vec<Replacement<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct EditRepr<T> {
    replacements: Vec<Replacement<T>>,
}

impl<T: Scalar> TryFrom<EditRepr<T>> for EditRequest<T> {
    type Error = Error;

    fn try_from(repr: EditRepr<T>) -> Result<Self> {
        EditRequest::new(repr.replacements)
    }
}

impl<T: Scalar> EditRequest<T> {
    pub fn new(replacements: Vec<Replacement<T>>) -> Result<Self> {
        if replacements.is_empty() {
            return Err(Error::Empty("edit request"));
        }
        let mut seen = HashSet::with_capacity(replacements.len());
        for rep in &replacements {
            if !seen.insert(rep.index) {
                return Err(Error::DuplicateIndex { index: rep.index });
            }
        }
        Ok(Self { replacements })
    }

    pub fn single(index: usize, record: Record<T>) -> Self {
        Self { replacements: vec![Replacement { index, record }] }
    }

    pub fn replacements(&self) -> &[Replacement<T>] {
        &self.replacements
    }

    pub fn batch_size(&self) -> usize {
        self.replacements.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.replacements.iter().map(|r| r.index)
    }

    /// Checks the request against a database of size `n` and dimension `d`.
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        let r = self.batch_size();
        if r == 0 || r > n {
            return Err(Error::BatchSize { r, n });
        }
        for rep in &self.replacements {
            if rep.index >= n {
                return Err(Error::IndexOutOfRange { index: rep.index, n });
            }
            if rep.record.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: rep.record.dim() });
            }
            if !vector::all_finite(rep.record.values()) {
                return Err(Error::InvalidParameter { name: "record", reason: "non-finite entry".into() });
            }
        }
        Ok(())
    }
}

/// Returns `D ∘ u`.
pub fn apply_edit<T: Scalar>(db: &Database<T>, u: &EditRequest<T>) -> Result<Database<T>> {
    u.validate(db.len(), db.dim())?;
    let mut records = db.records.clone();
    for rep in &u.replacements {
        records[rep.index] = rep.record.clone();
    }
    Ok(Database { records })
}
