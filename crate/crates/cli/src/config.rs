use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unlearn_core::attacks::{CountingConfig, PgdConfig};
use unlearn_core::experiments::{DeletionExperiment, RiskExperiment};
use unlearn_core::noisy_gd::{BudgetSpec, ConvexInstance, NonconvexInstance};

use crate::Failure;

pub const CONFIG_VERSION: u32 = 1;

/// Top-level experiment file. Each subcommand reads its own table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub recipe: Option<RecipeSection>,
    pub deletion: Option<DeletionExperiment>,
    pub risk: Option<RiskExperiment>,
    pub attack: Option<AttackSection>,
    pub accountant: Option<AccountantSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecipeSection {
    Convex {
        instance: ConvexInstance<f64>,
        budget: BudgetSpec<f64>,
    },
    Nonconvex {
        instance: NonconvexInstance<f64>,
        budget: BudgetSpec<f64>,
        /// Raises σ² above the privacy floor.
        sigma2: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MedianSection {
    /// Odd database size; records are `0, 1, …, n−1`.
    pub n: usize,
    pub step: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgdSection {
    pub lambda: f64,
    pub beta: f64,
    pub lipschitz: f64,
    pub n: usize,
    pub k_unlearn: usize,
    pub eps: f64,
    pub delta: f64,
    pub q: f64,
    /// Number of post-deletion releases to account.
    pub releases: usize,
}

impl PgdSection {
    pub fn config(&self) -> PgdConfig<f64> {
        PgdConfig {
            lambda: self.lambda,
            beta: self.beta,
            lipschitz: self.lipschitz,
            n: self.n,
            k_unlearn: self.k_unlearn,
            eps: self.eps,
            delta: self.delta,
            q: self.q,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSection {
    Counting(CountingConfig),
    Median(MedianSection),
    Pgd(PgdSection),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum AccountantSection {
    GaussianClosedForm { q: f64, mu1: Vec<f64>, mu2: Vec<f64>, sigma2: f64 },
    NoisyGdLipschitz { q: f64, lipschitz: f64, sigma2: f64, n: usize, eta: f64, k: usize },
    NoisyGdConvex { q: f64, lipschitz: f64, lambda: f64, beta: f64, sigma2: f64, n: usize, eta: f64, k: usize },
    Composition { q: f64, epsilons: Vec<f64> },
    AdaptiveDeletion { q: f64, eps_dd: f64, eps_dp: f64, p: usize },
    BoundedPerturbation { q: f64, c: f64, sigma2: f64 },
    WeakTriangle { q: f64, a_to_mid: f64, mid_to_b_sup: f64 },
    Conversion { q: f64, epsilon: f64, delta: f64 },
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: Config = toml::from_str(text).map_err(|e| Failure::Validation(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Failure::Validation(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn section<'a, S>(&'a self, name: &str, s: &'a Option<S>) -> Result<&'a S, Failure> {
        s.as_ref().ok_or_else(|| {
            Failure::Validation(format!("missing field `{name}`: this subcommand needs a [{name}] table"))
        })
    }
}
