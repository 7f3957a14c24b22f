//! Task registry, ingestion, run orchestration, result persistence and
//! reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::AggregateMode;
use crate::statmodels::ForecasterSpec;
use crate::types::QuantileGrid;

pub mod ingest;
pub mod registry;
pub mod report;
pub mod run;
pub mod store;

pub use ingest::{load_dataset, read_dataset, write_dataset, IngestReport};
pub use registry::{registry, task, TaskSpec};
pub use report::{report, Report};
pub use run::{
    ablation_rows, check_leakage, holdout, relative_change, run_ablation, run_cftl, run_statistical, score_forecasts,
    worker_count, AblationOutcome, AblationRow, Accounting, CftlConfig, CftlOutcome, Holdout, StatOutcome, TaskData,
};
pub use store::{ForecastSet, Manifest, ResultStore, SeriesForecast};

fn default_seeds() -> Vec<u64> {
    (1..=5).collect()
}

fn default_modes() -> Vec<AggregateMode> {
    vec![AggregateMode::Uniform, AggregateMode::Weighted]
}

/// What to run and where to write it; loadable from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tasks: Vec<TaskSpec>,
    pub forecasters: Vec<ForecasterSpec>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub grid: QuantileGrid,
    #[serde(default = "default_modes")]
    pub modes: Vec<AggregateMode>,
    pub out: std::path::PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Invalid("seeds must not be empty".into()));
        }
        self.forecasters.iter().try_for_each(ForecasterSpec::validate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"tasks": [], "forecasters": [{"kind": "ETS"}], "out": "runs/x"}"#).unwrap();
        assert_eq!(c.seeds, vec![1, 2, 3, 4, 5]);
        assert_eq!(c.grid.len(), 99);
        assert!(c.validate().is_ok());
        let empty = RunConfig { seeds: vec![], ..c };
        assert!(empty.validate().is_err());
    }
}
