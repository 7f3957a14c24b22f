//! Competition task registry: horizon and seasonality per dataset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Frequency, FrequencyKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// `<competition>-<Frequency>`, e.g. `M3-Yearly`.
    pub dataset: String,
    pub frequency: FrequencyKind,
    pub horizon: usize,
    pub seasonality: usize,
}

impl TaskSpec {
    /// A task outside the registry; zero horizon or seasonality is rejected.
    pub fn custom(
        dataset: impl Into<String>,
        frequency: FrequencyKind,
        horizon: usize,
        seasonality: usize,
    ) -> Result<Self> {
        let dataset = dataset.into();
        if horizon == 0 || seasonality == 0 {
            return Err(Error::Invalid(format!(
                "task `{dataset}` needs positive horizon and seasonality"
            )));
        }
        Ok(Self {
            dataset,
            frequency,
            horizon,
            seasonality,
        })
    }

    pub fn frequency(&self) -> Frequency {
        Frequency::new(self.frequency)
    }
}

use FrequencyKind::*;

/// (dataset, frequency, horizon, seasonality) for the sixteen evaluation tasks.
const TABLE: [(&str, FrequencyKind, usize, usize); 16] = [
    ("M1-Monthly", Monthly, 18, 12),
    ("M1-Quarterly", Quarterly, 8, 4),
    ("M1-Yearly", Yearly, 6, 1),
    ("M3-Other", Other, 8, 4),
    ("M3-Monthly", Monthly, 18, 12),
    ("M3-Quarterly", Quarterly, 8, 4),
    ("M3-Yearly", Yearly, 6, 1),
    ("M4-Hourly", Hourly, 48, 24),
    ("M4-Daily", Daily, 14, 1),
    ("M4-Weekly", Weekly, 13, 1),
    ("M4-Monthly", Monthly, 18, 12),
    ("M4-Quarterly", Quarterly, 8, 4),
    ("M4-Yearly", Yearly, 6, 1),
    ("Tourism-Monthly", Monthly, 24, 12),
    ("Tourism-Quarterly", Quarterly, 8, 4),
    ("Tourism-Yearly", Yearly, 4, 1),
];

/// Published series counts, used to sanity-check ingested files.
pub const SERIES_COUNTS: [(&str, usize); 16] = [
    ("M1-Monthly", 617),
    ("M1-Quarterly", 203),
    ("M1-Yearly", 181),
    ("M3-Other", 174),
    ("M3-Monthly", 1428),
    ("M3-Quarterly", 756),
    ("M3-Yearly", 645),
    ("M4-Hourly", 414),
    ("M4-Daily", 4227),
    ("M4-Weekly", 359),
    ("M4-Monthly", 48_000),
    ("M4-Quarterly", 24_000),
    ("M4-Yearly", 23_000),
    ("Tourism-Monthly", 366),
    ("Tourism-Quarterly", 427),
    ("Tourism-Yearly", 518),
];

pub fn registry() -> Vec<TaskSpec> {
    TABLE
        .iter()
        .map(|&(name, frequency, horizon, seasonality)| TaskSpec {
            dataset: name.to_string(),
            frequency,
            horizon,
            seasonality,
        })
        .collect()
}

/// Case-insensitive lookup by dataset name.
pub fn task(name: &str) -> Result<TaskSpec> {
    registry()
        .into_iter()
        .find(|t| t.dataset.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Invalid(format!("unknown task `{name}`")))
}

pub fn expected_series(name: &str) -> Option<usize> {
    SERIES_COUNTS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|&(_, c)| c)
}
