//! Certified machine unlearning with noisy gradient descent.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accountant;
pub mod attacks;
pub mod density;
pub mod error;
pub mod experiments;
pub mod model;
pub mod noisy_gd;
pub mod rng;
mod scalar;
pub mod stream;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Database = model::Database<f64>;
pub type EditRequest = model::EditRequest<f64>;
pub type Record = model::Record<f64>;
pub type ModelParams = model::ModelParams<f64>;
pub type LossModel = model::LossModel<f64>;
pub type Objective = model::Objective<f64>;
pub type RecipeParams = noisy_gd::RecipeParams<f64>;
pub type BudgetSpec = noisy_gd::BudgetSpec<f64>;
pub type GaussianLaw = noisy_gd::GaussianLaw<f64>;
pub type RenyiBound = accountant::RenyiBound<f64>;
pub type DPBound = accountant::DPBound<f64>;
