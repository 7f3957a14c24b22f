//! Cross-frequency transfer learning benchmark: classical per-series
//! forecasters, a SiCoUM ensemble, an NBEATS-style quantile network, and the
//! sCRPS/MASE scoring harness.

pub mod dist;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod neural;
pub mod optim;
pub mod statmodels;
pub mod synthgen;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    gaussian_to_quantiles, split_train_test, Dataset, Frequency, FrequencyKind, GaussianForecast, QuantileForecast,
    QuantileGrid, SplitSpec, TimeSeries,
};
