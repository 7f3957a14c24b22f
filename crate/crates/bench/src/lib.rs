//! Shared fixtures for the criterion benches.

use cftl_core::synthgen::{generate_series, SynthConfig};
use cftl_core::{FrequencyKind, TimeSeries};

/// A reproducible monthly series of the given length.
pub fn monthly_series(len: usize, seed: u64) -> TimeSeries {
    let cfg = SynthConfig {
        length_range: [len, len],
        noise_sigma: 0.1,
        nonneg_shift: true,
        ..SynthConfig::new(1, FrequencyKind::Monthly, seed)
    };
    generate_series(&cfg, 0).expect("valid synthetic config")
}
