//! Experiment runner for the `ecps` library: TOML configuration, the three
//! experiment kinds, and CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;

/// Runs the experiment named in `cfg` and writes its files under `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    match cfg.experiment {
        ExperimentKind::Compare => {
            let result = experiments::compute_compare(cfg)?;
            output::write_compare(cfg, &result, out)
        }
        ExperimentKind::ChoiScan => {
            let table = experiments::compute_choi_scan(cfg);
            output::write_choi_scan(cfg, &table, out)
        }
        ExperimentKind::SteadyState => {
            let result = experiments::compute_steady_state(cfg)?;
            output::write_steady_state(cfg, &result, out)
        }
    }
}

/// Applies command-line overrides and revalidates.
pub fn apply_overrides(
    cfg: &mut ExperimentConfig,
    seed: Option<u64>,
    realizations: Option<usize>,
) -> Result<(), CliError> {
    if let Some(s) = seed {
        cfg.model.seed = s;
    }
    if let Some(k) = realizations {
        cfg.ensemble.realizations = k;
        cfg.steady_state.realizations = k;
    }
    cfg.validate()
}

/// Realization count that drives coupling sampling for `cfg`.
pub fn realizations(cfg: &ExperimentConfig) -> usize {
    match cfg.experiment {
        ExperimentKind::SteadyState => cfg.steady_state.realizations,
        ExperimentKind::Compare => cfg.ensemble.realizations,
        ExperimentKind::ChoiScan => 0,
    }
}
