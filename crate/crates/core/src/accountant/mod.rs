//! Rényi-divergence calculus: closed forms, Noisy-GD budgets, composition,
//! conversion to (ε, δ), and 1-D numeric estimators.

mod estimate;
mod renyi;
mod utility;

pub use crate::noisy_gd::gaussian_renyi_1d;
pub use estimate::{grid_renyi_1d, histogram_renyi};
pub use renyi::{
    adaptive_deletion_bound, bounded_perturbation_renyi, compose, gaussian_renyi, rdp_noisy_gd_convex,
    rdp_noisy_gd_lipschitz, rdp_to_dp, weak_triangle, DPBound, RenyiBound, Rule,
};
pub use utility::{
    accuracy_bound, convex_utility_bound, edit_risk_bound, gibbs_excess_risk_bound, nonconvex_convergence_bound,
    nonconvex_step_cap,
};
