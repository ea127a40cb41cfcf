//! End-to-end experiments shared by the command-line runner and the
//! acceptance tests. Everything here is `f64` and a pure function of its
//! configuration and root seed.

mod clipping;
mod deletion;
mod lemmas;
mod nonconvex;
mod risk;

pub use clipping::{clipping_checks, ClippingRow};
pub use deletion::{verify_deletion, DeletionExperiment, DeletionInstance, DeletionReport, DeletionRow};
pub use lemmas::{lemma_checks, LemmaExperiment, LemmaRow};
pub use nonconvex::{nonconvex_check, NonconvexExperiment, NonconvexReport};
pub use risk::{convex_risk_table, RiskExperiment, RiskRow};
