use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod output;

use config::Config;

#[derive(Parser, Debug)]
#[command(
    name = "unlearn",
    version,
    about = "Noisy-GD unlearning experiments: recipes, deletion checks, attacks, risk and accounting"
)]
struct Cli {
    /// TOML experiment file (`version = 1`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trial or seed count; overrides the config.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Print the Noisy-GD recipe for an instance and budget.
    Recipe,
    /// Exact per-step deletion divergences of a quadratic edit stream.
    VerifyDeletion,
    /// Run an attack scenario.
    Attack {
        /// Must match `kind` in the [attack] table when given.
        #[arg(value_enum)]
        kind: Option<AttackKind>,
    },
    /// Monte-Carlo excess risk of every release against its bounds.
    Risk,
    /// Evaluate one accountant rule.
    Accountant,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AttackKind {
    Counting,
    Median,
    Pgd,
}

/// Why a run stopped; each maps to an exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Compute(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Compute(_) | Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Compute(m) => write!(f, "computation failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<unlearn_core::Error> for Failure {
    fn from(e: unlearn_core::Error) -> Self {
        match e {
            unlearn_core::Error::NonFinite { .. } => Failure::Compute(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Validation("missing flag `--config`".into()))?;
    let cfg = Config::load(path)?;
    let seed = || {
        cli.seed
            .or(cfg.seed)
            .ok_or_else(|| Failure::Validation("missing field `seed` (set it in the config or pass --seed)".into()))
    };
    let trials = cli.trials.or(cfg.trials);
    let outcome = match cli.command {
        Command::Recipe => commands::recipe(&cfg)?,
        Command::VerifyDeletion => commands::verify_deletion(&cfg, seed()?)?,
        Command::Attack { kind } => {
            let section = cfg.section("attack", &cfg.attack)?;
            if let Some(kind) = kind {
                let name = kind.to_possible_value().expect("no skipped variants").get_name().to_owned();
                if commands::attack_name(section) != name {
                    return Err(Failure::Validation(format!(
                        "attack `{name}` requested but the [attack] table has kind `{}`",
                        commands::attack_name(section)
                    )));
                }
            }
            commands::attack(section, seed()?, trials)?
        }
        Command::Risk => commands::risk(&cfg, seed()?, trials)?,
        Command::Accountant => commands::accountant(&cfg)?,
    };
    if let Some(dir) = cli.out.as_ref().or(cfg.out.as_ref()) {
        output::write_all(dir, &outcome.files)?;
    }
    println!("{}", outcome.summary);
    if !outcome.passed {
        eprintln!("assertion failed: {}", outcome.assertion);
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
