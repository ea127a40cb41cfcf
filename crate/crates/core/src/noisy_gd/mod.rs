//! Noisy gradient descent, the learn/delete pair built on it, hyperparameter
//! recipes, and analytic oracles for its output law.

mod gaussian;
mod gibbs;
mod recipe;
mod run;

pub use gaussian::{gaussian_pushforward, gaussian_renyi_1d, GaussianLaw};
pub use gibbs::{gibbs_oracle_1d, GibbsGrid};
pub use recipe::{
    convex_recipe, nonconvex_recipe, Binding, BudgetSpec, ConvexInstance, NonconvexInstance, RecipeParams, Regime,
};
pub use run::{delete, learn, noisy_gd_run};
