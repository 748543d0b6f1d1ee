//! Batch front end for the `hfield` verification suites.
//!
//! Each subcommand loads a [`RunConfig`], applies command-line overrides,
//! runs one or more suites and writes deterministic JSON/CSV reports. The
//! exit status is 0 when every check passes, 1 when a check fails and 2 for
//! usage or configuration errors.

pub mod config;
pub mod report;
pub mod suites;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, RunConfig};
pub use report::{Artifact, Formats};
pub use suites::{standard_expansion, ExpansionFn, SuiteOutcome};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, String),
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Overall result of a run, mapped onto the process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
    UsageError,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Passed => 0,
            Status::Failed => 1,
            Status::UsageError => 2,
        }
    }

    pub fn from_outcomes(outcomes: &[SuiteOutcome]) -> Self {
        if outcomes.iter().all(|o| o.passed) {
            Status::Passed
        } else {
            Status::Failed
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hfield",
    version,
    about = "Verification suites for diagonal Hilbert-field connections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the splitting expansion against iterated covariant derivatives.
    VerifyIdentity(CommonArgs),
    /// Count k-splittings and verify the type-1/type-2 correspondences.
    Splittings(CommonArgs),
    /// Curvature eigenvalues of the basis sections and their growth.
    Curvature(CommonArgs),
    /// Analyticity certificates, decay profiles and bound-chain checks.
    Analyticity(CommonArgs),
    /// Every suite above.
    All(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for report files; without it reports go to stdout.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Order cap of the invoked suites (identity, splittings and decay sweeps).
    #[arg(long, value_name = "N")]
    pub m_max: Option<usize>,
    /// Grid resolution of the compact rectangle.
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    /// Emit only JSON reports.
    #[arg(long)]
    pub json: bool,
    /// Emit only CSV reports.
    #[arg(long)]
    pub csv: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            m_max: self.m_max,
            grid: self.grid,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identity,
    Splittings,
    Curvature,
    Analyticity,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Identity,
        Suite::Splittings,
        Suite::Curvature,
        Suite::Analyticity,
    ];
}

/// Loads the config, applies overrides and validates the result.
pub fn prepare_config(
    path: Option<&std::path::Path>,
    overrides: &Overrides,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = overrides.m_max {
        cfg.m_identity = m;
        cfg.m_splittings = m;
        cfg.m_decay = m;
    }
    if let Some(n) = overrides.grid {
        cfg.rect = cfg
            .rect
            .with_grid(n)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `suites` in order; the identity suite uses `expansion`.
pub fn run_suites(
    cfg: &RunConfig,
    suites: &[Suite],
    formats: Formats,
    expansion: &ExpansionFn,
) -> Result<Vec<SuiteOutcome>, ConfigError> {
    // Fail on missing inputs before spending time on earlier suites.
    if suites.contains(&Suite::Curvature) {
        cfg.potential()?;
    }
    suites
        .iter()
        .map(|s| match s {
            Suite::Identity => Ok(suites::verify_identity(cfg, formats, expansion)),
            Suite::Splittings => Ok(suites::splittings(cfg, formats)),
            Suite::Curvature => suites::curvature(cfg, formats),
            Suite::Analyticity => suites::analyticity(cfg, formats),
        })
        .collect()
}

/// Runs an already-parsed command. Reports go to `--out` or, without it, to
/// `out`; diagnostics and one status line per suite go to `err`.
pub fn execute(
    command: &Command,
    expansion: &ExpansionFn,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Status {
    let (args, selected): (&CommonArgs, &[Suite]) = match command {
        Command::VerifyIdentity(a) => (a, &[Suite::Identity]),
        Command::Splittings(a) => (a, &[Suite::Splittings]),
        Command::Curvature(a) => (a, &[Suite::Curvature]),
        Command::Analyticity(a) => (a, &[Suite::Analyticity]),
        Command::All(a) => (a, &Suite::ALL),
    };
    let overrides = args.overrides();
    let cfg = match prepare_config(args.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Status::UsageError;
        }
    };
    let formats = Formats::from_flags(args.json, args.csv);
    let outcomes = match run_suites(&cfg, selected, formats, expansion) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Status::UsageError;
        }
    };
    let artifacts: Vec<Artifact> = outcomes
        .iter()
        .flat_map(|o| o.artifacts.iter().cloned())
        .collect();
    let written = match &overrides.out {
        Some(dir) => report::write_artifacts(dir, &artifacts),
        None => report::print_artifacts(out, &artifacts),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write reports: {e}");
        return Status::UsageError;
    }
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "[{tag}] {}: {}", o.name, o.summary);
    }
    Status::from_outcomes(&outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply_before_validation() {
        let o = Overrides {
            out: None,
            m_max: Some(3),
            grid: Some(8),
        };
        let cfg = prepare_config(None, &o).unwrap();
        assert_eq!((cfg.m_identity, cfg.m_splittings, cfg.m_decay), (3, 3, 3));
        assert_eq!(cfg.rect.grid_n(), 8);
        let too_deep = Overrides {
            m_max: Some(40),
            ..o
        };
        assert!(matches!(
            prepare_config(None, &too_deep),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn curvature_without_potential_is_a_usage_error() {
        let cfg = RunConfig::from_json(r#"{"connection": {"k": [[0,1,"1","0"]]}}"#).unwrap();
        assert!(run_suites(
            &cfg,
            &[Suite::Curvature],
            Formats::BOTH,
            &standard_expansion
        )
        .is_err());
    }
}
