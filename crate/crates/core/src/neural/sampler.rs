//! Frequency-balanced window sampling.
//!
//! A draw picks a frequency bucket uniformly, then a series uniformly within
//! it, then a forecast origin uniformly among the valid ones. Buckets with
//! many series therefore get no more weight than buckets with few.

use std::collections::BTreeMap;

use log::warn;
use rand::Rng;

use super::window::{make_window, ScaledWindow};
use crate::error::{Error, Result};
use crate::types::{Dataset, FrequencyKind};

#[derive(Debug, Clone)]
struct Bucket {
    kind: FrequencyKind,
    /// Training prefixes, each at least `horizon + 1` long.
    series: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BalancedSampler {
    buckets: Vec<Bucket>,
    input_size: usize,
    horizon: usize,
}

/// Where a draw landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Draw {
    pub bucket: usize,
    pub series: usize,
    pub origin: usize,
}

impl BalancedSampler {
    /// `holdout(len)` gives how many trailing values of a series of that
    /// length are reserved for validation and never sampled.
    pub fn new(
        corpus: &[Dataset],
        input_size: usize,
        horizon: usize,
        holdout: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let mut by_kind: BTreeMap<FrequencyKind, Vec<Vec<f64>>> = BTreeMap::new();
        for ds in corpus {
            let entry = by_kind.entry(ds.frequency.kind).or_default();
            for s in &ds.series {
                let keep = s.len() - holdout(s.len()).min(s.len());
                if keep > horizon {
                    entry.push(s.values()[..keep].to_vec());
                }
            }
        }
        let mut buckets = Vec::new();
        for (kind, series) in by_kind {
            if series.is_empty() {
                warn!("no {kind} series long enough for horizon {horizon}; bucket skipped");
            } else {
                buckets.push(Bucket { kind, series });
            }
        }
        if buckets.is_empty() {
            return Err(Error::Sample("every frequency bucket is empty".into()));
        }
        Ok(Self {
            buckets,
            input_size,
            horizon,
        })
    }

    pub fn n_buckets(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket_kinds(&self) -> Vec<FrequencyKind> {
        self.buckets.iter().map(|b| b.kind).collect()
    }

    pub fn bucket_sizes(&self) -> Vec<usize> {
        self.buckets.iter().map(|b| b.series.len()).collect()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Draw {
        let bucket = rng.random_range(0..self.buckets.len());
        let b = &self.buckets[bucket];
        let series = rng.random_range(0..b.series.len());
        let n = b.series[series].len();
        let origin = rng.random_range(1..=n - self.horizon);
        Draw { bucket, series, origin }
    }

    pub fn window(&self, d: Draw) -> Result<ScaledWindow> {
        let y = &self.buckets[d.bucket].series[d.series];
        make_window(y, d.origin, self.input_size, self.horizon)
    }

    pub fn sample_batch<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Result<Vec<ScaledWindow>> {
        (0..size).map(|_| self.window(self.draw(rng))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Frequency, TimeSeries};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset(kind: FrequencyKind, n: usize, len: usize) -> Dataset {
        let series = (0..n)
            .map(|i| {
                let y = (0..len).map(|t| (i + t) as f64 + 1.0).collect();
                TimeSeries::new(format!("{kind}-{i}"), Frequency::new(kind), 0, y).unwrap()
            })
            .collect();
        Dataset::new(kind.as_str(), Frequency::new(kind), 4, series).unwrap()
    }

    #[test]
    fn buckets_balanced_regardless_of_size() {
        let corpus = [
            dataset(FrequencyKind::Yearly, 1, 30),
            dataset(FrequencyKind::Monthly, 999, 30),
        ];
        let s = BalancedSampler::new(&corpus, 8, 4, |_| 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let yearly = (0..n).filter(|_| s.draw(&mut rng).bucket == 1).count() as f64;
        let e = n as f64 / 2.0;
        let chi2 = 2.0 * (yearly - e).powi(2) / e;
        // 1-dof chi-square critical value at p = 0.01.
        assert!(chi2 < 6.635, "chi2 = {chi2}");
    }

    #[test]
    fn single_bucket_uniform_series() {
        let corpus = [dataset(FrequencyKind::Quarterly, 4, 20)];
        let s = BalancedSampler::new(&corpus, 8, 4, |_| 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 4];
        for _ in 0..8000 {
            counts[s.draw(&mut rng).series] += 1;
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 2000.0).powi(2) / 2000.0).sum();
        // 3-dof critical value at p = 0.01.
        assert!(chi2 < 11.345, "{counts:?}");
    }

    #[test]
    fn origins_stay_in_the_training_prefix() {
        let corpus = [dataset(FrequencyKind::Monthly, 3, 30)];
        let s = BalancedSampler::new(&corpus, 8, 4, |_| 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let d = s.draw(&mut rng);
            assert!(d.origin >= 1 && d.origin + 4 <= 20);
        }
    }

    #[test]
    fn deterministic_and_empty() {
        let corpus = [
            dataset(FrequencyKind::Monthly, 5, 30),
            dataset(FrequencyKind::Daily, 2, 3),
        ];
        let s = BalancedSampler::new(&corpus, 8, 4, |_| 0).unwrap();
        assert_eq!(s.n_buckets(), 1);
        let a = s.sample_batch(&mut ChaCha8Rng::seed_from_u64(9), 16).unwrap();
        let b = s.sample_batch(&mut ChaCha8Rng::seed_from_u64(9), 16).unwrap();
        assert_eq!(a, b);
        let short = [dataset(FrequencyKind::Daily, 2, 3)];
        assert!(matches!(
            BalancedSampler::new(&short, 8, 4, |_| 0),
            Err(Error::Sample(_))
        ));
    }
}
