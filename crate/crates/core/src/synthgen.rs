//! Synthetic pre-training corpus built from nine closed-form signal families,
//! superposed and perturbed with additive Gaussian noise.
//!
//! Every series draws from its own ChaCha stream (`seed`, stream = series
//! index), so a series depends only on `(config, index)` and corpora can be
//! generated in any order or in parallel.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, Frequency, FrequencyKind, TimeSeries};

/// One signal family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentKind {
    /// `k`
    Constant { k: f64 },
    /// `sin(π·a·t + b)`
    Sine { a: f64, b: f64 },
    /// `cos(π·a·t + b)`
    Cosine { a: f64, b: f64 },
    /// `a·t + b`
    Linear { a: f64, b: f64 },
    /// `sin(π·a/t + b)`
    FreqDrift { a: f64, b: f64 },
    /// `a·exp(−((t − b)/c)²)`
    GaussianWave { a: f64, b: f64, c: f64 },
    /// `a·exp(b·t)`
    ExponentialTrend { a: f64, b: f64 },
    /// `a·t² + b·t + c`
    Quadratic { a: f64, b: f64, c: f64 },
    /// `a / (1 + exp(−b·(t − c)))`
    Logistic { a: f64, b: f64, c: f64 },
}

impl ComponentKind {
    fn validate(&self) -> Result<()> {
        match *self {
            ComponentKind::GaussianWave { c, .. } if c == 0.0 => {
                Err(Error::Invalid("gaussian wave width c must be non-zero".into()))
            }
            ComponentKind::Logistic { b, c, .. } if !b.is_finite() || !c.is_finite() => {
                Err(Error::Invalid("logistic parameters must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Value of one component at integer time `t`.
pub fn eval_component(kind: &ComponentKind, t: i64) -> Result<f64> {
    kind.validate()?;
    let tf = t as f64;
    let y = match *kind {
        ComponentKind::Constant { k } => k,
        ComponentKind::Sine { a, b } => (PI * a * tf + b).sin(),
        ComponentKind::Cosine { a, b } => (PI * a * tf + b).cos(),
        ComponentKind::Linear { a, b } => a * tf + b,
        ComponentKind::FreqDrift { a, b } => {
            if t == 0 {
                return Err(Error::Domain("frequency drift is undefined at t = 0".into()));
            }
            (PI * a / tf + b).sin()
        }
        ComponentKind::GaussianWave { a, b, c } => {
            let z = (tf - b) / c;
            a * (-z * z).exp()
        }
        ComponentKind::ExponentialTrend { a, b } => a * (b * tf).exp(),
        ComponentKind::Quadratic { a, b, c } => a * tf * tf + b * tf + c,
        ComponentKind::Logistic { a, b, c } => a / (1.0 + (-b * (tf - c)).exp()),
    };
    Ok(y)
}

fn default_length_range() -> [usize; 2] {
    [48, 240]
}

fn default_components_range() -> [usize; 2] {
    [1, 4]
}

/// Corpus generation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_series: usize,
    #[serde(default = "default_length_range")]
    pub length_range: [usize; 2],
    pub frequency: FrequencyKind,
    #[serde(default = "default_components_range")]
    pub components_range: [usize; 2],
    #[serde(default)]
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub nonneg_shift: bool,
    /// Forecast horizon attached to the generated dataset; defaults by frequency.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Replaces random component sampling with a fixed component list.
    #[serde(default)]
    pub forced_components: Option<Vec<ComponentKind>>,
}

impl SynthConfig {
    pub fn new(n_series: usize, frequency: FrequencyKind, seed: u64) -> Self {
        Self {
            n_series,
            length_range: default_length_range(),
            frequency,
            components_range: default_components_range(),
            noise_sigma: 0.1,
            seed,
            nonneg_shift: false,
            horizon: None,
            forced_components: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.length_range;
        if lo == 0 || lo > hi {
            return Err(Error::Invalid(format!("bad length range [{lo}, {hi}]")));
        }
        let [clo, chi] = self.components_range;
        if clo == 0 || clo > chi {
            return Err(Error::Invalid(format!("bad component range [{clo}, {chi}]")));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Invalid("noise_sigma must be non-negative".into()));
        }
        if self.n_series == 0 {
            return Err(Error::Invalid("n_series must be positive".into()));
        }
        if let Some(forced) = &self.forced_components {
            forced.iter().try_for_each(ComponentKind::validate)?;
        }
        Ok(())
    }

    pub fn dataset_horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| self.frequency.default_horizon())
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn signed<R: Rng>(rng: &mut R, x: f64) -> f64 {
    if rng.random_bool(0.5) {
        x
    } else {
        -x
    }
}

/// Draws one component for a series of length `len`.
///
/// Sinusoid rates keep at least one full period inside the series, scale
/// parameters are log-uniform on [0.1, 100], slopes are normalised by the
/// series length so a trend's total excursion stays on that same scale.
pub fn sample_component<R: Rng>(rng: &mut R, len: usize) -> ComponentKind {
    let l = len.max(2) as f64;
    let amp = |rng: &mut R| log_uniform(rng, 0.1, 100.0);
    let rate_lo = (2.0 / l).min(0.5);
    match rng.random_range(0..9) {
        0 => ComponentKind::Constant { k: amp(rng) },
        1 => ComponentKind::Sine {
            a: rng.random_range(rate_lo..=0.5),
            b: rng.random_range(0.0..2.0 * PI),
        },
        2 => ComponentKind::Cosine {
            a: rng.random_range(rate_lo..=0.5),
            b: rng.random_range(0.0..2.0 * PI),
        },
        3 => {
            let mag = amp(rng) / l;
            let a = signed(rng, mag);
            ComponentKind::Linear { a, b: amp(rng) }
        }
        4 => ComponentKind::FreqDrift {
            a: rng.random_range(1.0..=(l / 2.0).max(1.0)),
            b: rng.random_range(0.0..2.0 * PI),
        },
        5 => ComponentKind::GaussianWave {
            a: amp(rng),
            b: rng.random_range(1.0..=l),
            c: rng.random_range((l / 20.0).max(1.0)..=(l / 4.0).max(1.0)),
        },
        6 => ComponentKind::ExponentialTrend {
            a: amp(rng),
            b: rng.random_range(-0.05..=0.05),
        },
        7 => {
            let mag = amp(rng) / (l * l);
            let a = signed(rng, mag);
            let mag = amp(rng) / l;
            let b = signed(rng, mag);
            ComponentKind::Quadratic { a, b, c: amp(rng) }
        }
        _ => {
            let a = amp(rng);
            let rate = rng.random_range(4.0 / l..=40.0 / l);
            ComponentKind::Logistic {
                a,
                b: signed(rng, rate),
                c: rng.random_range(1.0..=l),
            }
        }
    }
}

fn series_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Id of the `index`-th series of a corpus.
pub fn synthetic_series_id(config: &SynthConfig, index: usize) -> String {
    format!("syn-{}-{}-{index}", config.frequency, config.seed)
}

/// Generates series `series_index` of the corpus described by `config`.
pub fn generate_series(config: &SynthConfig, series_index: usize) -> Result<TimeSeries> {
    config.validate()?;
    let mut rng = series_rng(config.seed, series_index as u64);
    let [lo, hi] = config.length_range;
    let len = rng.random_range(lo..=hi);
    let components = match &config.forced_components {
        Some(forced) => forced.clone(),
        None => {
            let [clo, chi] = config.components_range;
            let count = rng.random_range(clo..=chi);
            (0..count).map(|_| sample_component(&mut rng, len)).collect()
        }
    };
    let mut values = vec![0.0; len];
    for (i, v) in values.iter_mut().enumerate() {
        let t = i as i64 + 1;
        for c in &components {
            *v += eval_component(c, t)?;
        }
    }
    if config.noise_sigma > 0.0 {
        let noise =
            Normal::new(0.0, config.noise_sigma).map_err(|e| Error::Invalid(format!("noise distribution: {e}")))?;
        for v in values.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("synthetic series {series_index} overflowed")));
    }
    if config.nonneg_shift {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            values.iter_mut().for_each(|v| *v -= min);
        }
    }
    TimeSeries::new(
        synthetic_series_id(config, series_index),
        Frequency::new(config.frequency),
        1,
        values,
    )
}

/// Generates the whole corpus as a dataset named `synthetic-<frequency>`.
pub fn generate_corpus(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let series = (0..config.n_series)
        .into_par_iter()
        .map(|i| generate_series(config, i))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        format!("synthetic-{}", config.frequency),
        Frequency::new(config.frequency),
        config.dataset_horizon(),
        series,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forced(components: Vec<ComponentKind>, len: usize) -> SynthConfig {
        SynthConfig {
            n_series: 1,
            length_range: [len, len],
            noise_sigma: 0.0,
            forced_components: Some(components),
            ..SynthConfig::new(1, FrequencyKind::Monthly, 7)
        }
    }

    #[test]
    fn component_examples() {
        assert_eq!(eval_component(&ComponentKind::Constant { k: 2.0 }, 5).unwrap(), 2.0);
        assert_eq!(
            eval_component(&ComponentKind::Linear { a: 1.0, b: 0.0 }, 3).unwrap(),
            3.0
        );
        let wave = ComponentKind::GaussianWave { a: 1.0, b: 0.0, c: 1.0 };
        assert_eq!(eval_component(&wave, 0).unwrap(), 1.0);
        let logistic = ComponentKind::Logistic { a: 1.0, b: 1.0, c: 0.0 };
        assert_eq!(eval_component(&logistic, 0).unwrap(), 0.5);
    }

    #[test]
    fn freq_drift_rejects_origin() {
        let c = ComponentKind::FreqDrift { a: 1.0, b: 0.0 };
        assert!(matches!(eval_component(&c, 0), Err(Error::Domain(_))));
        assert!(eval_component(&c, 1).is_ok());
    }

    #[test]
    fn gaussian_wave_needs_width() {
        let c = ComponentKind::GaussianWave { a: 1.0, b: 0.0, c: 0.0 };
        assert!(eval_component(&c, 1).is_err());
    }

    #[test]
    fn forced_constant_series() {
        let s = generate_series(&forced(vec![ComponentKind::Constant { k: 3.0 }], 4), 0).unwrap();
        assert_eq!(s.values(), &[3.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn forced_linear_plus_constant() {
        let cfg = forced(
            vec![
                ComponentKind::Linear { a: 1.0, b: 0.0 },
                ComponentKind::Constant { k: 1.0 },
            ],
            3,
        );
        assert_eq!(generate_series(&cfg, 0).unwrap().values(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn single_component_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = sample_component(&mut rng, 60);
            let s = generate_series(&forced(vec![c], 60), 0).unwrap();
            for (i, v) in s.values().iter().enumerate() {
                assert_eq!(*v, eval_component(&c, i as i64 + 1).unwrap());
            }
        }
    }

    #[test]
    fn deterministic_per_index() {
        let cfg = SynthConfig::new(5, FrequencyKind::Daily, 11);
        let a = generate_series(&cfg, 3).unwrap();
        let b = generate_series(&cfg, 3).unwrap();
        assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let corpus = generate_corpus(&cfg).unwrap();
        assert_eq!(corpus.series[3], a);
    }

    #[test]
    fn corpus_shape() {
        let mut cfg = SynthConfig::new(10, FrequencyKind::Weekly, 1);
        cfg.length_range = [20, 20];
        let d = generate_corpus(&cfg).unwrap();
        assert_eq!(d.name, "synthetic-weekly");
        assert_eq!(d.len(), 10);
        assert!(d.series.iter().all(|s| s.len() == 20));
        let json_a = serde_json::to_string(&d).unwrap();
        let json_b = serde_json::to_string(&generate_corpus(&cfg).unwrap()).unwrap();
        assert_eq!(json_a, json_b);
    }

    #[test]
    fn adjacent_seeds_differ() {
        for s in 0..100u64 {
            let mut a = SynthConfig::new(3, FrequencyKind::Monthly, s);
            a.length_range = [24, 48];
            let b = SynthConfig {
                seed: s + 1,
                ..a.clone()
            };
            let ca = generate_corpus(&a).unwrap();
            let cb = generate_corpus(&b).unwrap();
            assert!(ca.series.iter().zip(&cb.series).any(|(x, y)| x.values() != y.values()));
        }
    }

    #[test]
    fn nonneg_shift_clamps_minimum() {
        let mut cfg = SynthConfig::new(50, FrequencyKind::Hourly, 5);
        cfg.nonneg_shift = true;
        cfg.noise_sigma = 2.0;
        let d = generate_corpus(&cfg).unwrap();
        for s in &d.series {
            assert!(s.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn sinusoid_rates_fit_a_period() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            match sample_component(&mut rng, 40) {
                ComponentKind::Sine { a, .. } | ComponentKind::Cosine { a, .. } => {
                    assert!((2.0 / 40.0..=0.5).contains(&a));
                }
                ComponentKind::ExponentialTrend { b, .. } => assert!(b.abs() <= 0.05),
                ComponentKind::GaussianWave { c, .. } => assert!(c >= 1.0),
                _ => {}
            }
        }
    }
}
