//! Pre-training loop and zero-shot inference.

use std::collections::BTreeMap;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{batch_loss, forward, loss_and_grad, Batch, ModelParams};
use super::sampler::BalancedSampler;
use super::window::{forecast_window, make_window, ScaledWindow};
use super::{NBeatsConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::types::{Dataset, QuantileForecast};

/// Validation windows beyond this many are thinned with an even stride.
pub const MAX_VALIDATION_WINDOWS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationEntry {
    /// Number of updates applied before the evaluation.
    pub step: usize,
    pub lr: f64,
    /// `None` when no series is long enough to hold out a validation slice.
    pub validation_loss: Option<f64>,
    /// Mean batch loss over the updates since the previous entry.
    pub train_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub optimizer: String,
    pub entries: Vec<ValidationEntry>,
    /// Batch loss of every update, in order.
    pub step_losses: Vec<f64>,
    pub best_step: usize,
    pub best_validation_loss: Option<f64>,
    pub n_validation_windows: usize,
    pub n_buckets: usize,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    /// Best-validation snapshot (the final parameters when nothing is held out).
    pub params: ModelParams,
    pub log: TrainLog,
}

fn validation_windows(corpus: &[Dataset], cfg: &NBeatsConfig, v: usize) -> Result<Vec<ScaledWindow>> {
    let mut out = Vec::new();
    if v == 0 {
        return Ok(out);
    }
    for s in corpus.iter().flat_map(|d| &d.series) {
        let n = s.len();
        if n < v + cfg.horizon + 1 {
            continue;
        }
        let mut w = make_window(s.values(), n - v, cfg.input_size, v.min(cfg.horizon))?;
        w.target.truncate(v.min(cfg.horizon));
        out.push(w);
    }
    if out.len() > MAX_VALIDATION_WINDOWS {
        let stride = out.len() as f64 / MAX_VALIDATION_WINDOWS as f64;
        out = (0..MAX_VALIDATION_WINDOWS)
            .map(|i| out[(i as f64 * stride) as usize].clone())
            .collect();
    }
    Ok(out)
}

fn validation_loss(params: &ModelParams, windows: &[ScaledWindow], batch_size: usize) -> Result<Option<f64>> {
    if windows.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for chunk in windows.chunks(batch_size.max(1)) {
        total += batch_loss(params, &Batch::from_windows(chunk)?)? * chunk.len() as f64;
    }
    Ok(Some(total / windows.len() as f64))
}

/// SGD with momentum from a seeded Xavier start. Validation runs before the
/// first update and after every `eval_every` updates; the parameters with
/// the lowest validation loss are returned.
pub fn pretrain(corpus: &[Dataset], cfg: &NBeatsConfig, tcfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    tcfg.validate()?;
    if corpus.iter().all(|d| d.series.is_empty()) {
        return Err(Error::Sample("pre-training corpus is empty".into()));
    }
    let (h, v) = (cfg.horizon, tcfg.validation_len);
    let valid = validation_windows(corpus, cfg, v)?;
    let sampler = BalancedSampler::new(
        corpus,
        cfg.input_size,
        h,
        |n| {
            if v > 0 && n >= v + h + 1 {
                v
            } else {
                0
            }
        },
    )?;

    let mut init_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    sample_rng.set_stream(1);
    let mut params = ModelParams::xavier(cfg, &mut init_rng)?;
    let mut velocity = vec![0.0; params.len()];

    let mut log = TrainLog {
        optimizer: format!("sgd(momentum={})", tcfg.momentum),
        entries: Vec::with_capacity(tcfg.max_steps / tcfg.eval_every + 1),
        step_losses: Vec::with_capacity(tcfg.max_steps),
        best_step: 0,
        best_validation_loss: None,
        n_validation_windows: valid.len(),
        n_buckets: sampler.n_buckets(),
    };
    let mut best = params.clone();
    let (mut since_eval, mut n_since) = (0.0, 0usize);

    for step in 0..=tcfg.max_steps {
        if step % tcfg.eval_every == 0 {
            let vl = validation_loss(&params, &valid, tcfg.batch_size)?;
            let train_loss = (n_since > 0).then(|| since_eval / n_since as f64);
            (since_eval, n_since) = (0.0, 0usize);
            info!(
                "step {step}: lr {:.2e} train {} validation {}",
                tcfg.lr_at(step),
                train_loss.map_or("-".into(), |l| format!("{l:.5}")),
                vl.map_or("-".into(), |l| format!("{l:.5}"))
            );
            if let Some(l) = vl {
                if log.best_validation_loss.is_none_or(|b| l < b) {
                    log.best_validation_loss = Some(l);
                    log.best_step = step;
                    best.clone_from(&params);
                }
            }
            log.entries.push(ValidationEntry {
                step,
                lr: tcfg.lr_at(step),
                validation_loss: vl,
                train_loss,
            });
        }
        if step == tcfg.max_steps {
            break;
        }
        let batch = Batch::from_windows(&sampler.sample_batch(&mut sample_rng, tcfg.batch_size)?)?;
        let (loss, grad) = loss_and_grad(&params, &batch)?;
        let lr = tcfg.lr_at(step);
        // A non-finite gradient poisons the parameters it touches; they are
        // discarded with the error, so the check can ride along the update.
        let mut finite = loss.is_finite();
        for ((p, u), g) in params.values_mut().iter_mut().zip(&mut velocity).zip(&grad) {
            finite &= g.is_finite();
            *u = tcfg.momentum * *u + g;
            *p -= lr * *u;
        }
        if !finite {
            return Err(Error::Numerical(format!(
                "training diverged at step {step} (loss {loss}, lr {lr:.2e})"
            )));
        }
        log.step_losses.push(loss);
        since_eval += loss;
        n_since += 1;
    }
    if log.best_validation_loss.is_none() {
        log.best_step = tcfg.max_steps;
        best = params;
    }
    Ok(TrainedModel { params: best, log })
}

/// Forecasts every series from its last observation without updating any
/// parameter. Output rows are truncated to the dataset horizon.
pub fn zero_shot_predict(
    params: &ModelParams,
    dataset: &Dataset,
) -> Result<BTreeMap<String, Result<QuantileForecast>>> {
    let cfg = params.config();
    if dataset.horizon > cfg.horizon {
        return Err(Error::Invalid(format!(
            "dataset `{}` needs horizon {} but the network emits {}",
            dataset.name, dataset.horizon, cfg.horizon
        )));
    }
    let k = cfg.quantile_grid.len();
    let out: Vec<(String, Result<QuantileForecast>)> = dataset
        .series
        .par_iter()
        .map(|s| {
            let fc = forecast_window(s.values(), cfg.input_size).and_then(|w| {
                let scaled = forward(params, &w)?;
                let values = scaled[..dataset.horizon * k].iter().map(|v| v * w.scale).collect();
                QuantileForecast::from_flat(dataset.horizon, k, values)
            });
            (s.id.clone(), fc)
        })
        .collect();
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Frequency, FrequencyKind, QuantileGrid, TimeSeries};

    fn tiny() -> NBeatsConfig {
        NBeatsConfig {
            input_size: 8,
            stacks: 1,
            blocks_per_stack: 2,
            mlp_layers: 2,
            hidden_size: 16,
            horizon: 2,
            quantile_grid: QuantileGrid::new(vec![0.1, 0.5, 0.9]).unwrap(),
        }
    }

    fn constant_corpus(c: f64) -> Vec<Dataset> {
        let f = Frequency::new(FrequencyKind::Monthly);
        let s = TimeSeries::new("const", f, 0, vec![c; 60]).unwrap();
        vec![Dataset::new("const", f, 2, vec![s]).unwrap()]
    }

    fn constant_schedule() -> TrainConfig {
        TrainConfig {
            initial_lr: 0.05,
            decay_steps: vec![1000, 1500],
            max_steps: 2000,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn constant_series_is_learned() {
        let corpus = constant_corpus(5.0);
        let m = pretrain(&corpus, &tiny(), &constant_schedule()).unwrap();
        let last = *m.log.step_losses.last().unwrap();
        assert!(last < 1e-3, "final loss {last}");
        assert_eq!(m.log.entries.len(), 2000 / 500 + 1);
        let fc = zero_shot_predict(&m.params, &corpus[0]).unwrap();
        let fc = fc["const"].as_ref().unwrap();
        for v in fc.as_flat() {
            assert!((v - 5.0).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let f = Frequency::new(FrequencyKind::Quarterly);
        let series = (0..5)
            .map(|i| {
                let y = (0..40).map(|t| ((t * (i + 1)) % 7) as f64 + 1.0).collect();
                TimeSeries::new(format!("s{i}"), f, 0, y).unwrap()
            })
            .collect();
        let corpus = vec![Dataset::new("q", f, 2, series).unwrap()];
        let t = TrainConfig {
            decay_steps: vec![],
            max_steps: 120,
            eval_every: 50,
            ..TrainConfig::default()
        };
        let a = pretrain(&corpus, &tiny(), &t).unwrap();
        let b = pretrain(&corpus, &tiny(), &t).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.log, b.log);
        assert_eq!(a.log.entries.len(), 120 / 50 + 1);
        let c = pretrain(&corpus, &tiny(), &TrainConfig { seed: 1, ..t }).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn scale_equivariance() {
        let cfg = tiny();
        let p = ModelParams::xavier(&cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let f = Frequency::new(FrequencyKind::Yearly);
        let y: Vec<f64> = (0..12).map(|t| 3.0 + (t as f64).sin() * 2.0 + t as f64).collect();
        let mk = |c: f64| {
            let s = TimeSeries::new("y", f, 0, y.iter().map(|v| v * c).collect()).unwrap();
            Dataset::new("y", f, 2, vec![s]).unwrap()
        };
        let a = zero_shot_predict(&p, &mk(1.0)).unwrap().remove("y").unwrap().unwrap();
        let b = zero_shot_predict(&p, &mk(2.0)).unwrap().remove("y").unwrap().unwrap();
        for (x, z) in a.as_flat().iter().zip(b.as_flat()) {
            assert!((2.0 * x - z).abs() <= 1e-7 * z.abs().max(1.0), "{x} {z}");
        }
    }

    #[test]
    fn horizon_too_long() {
        let p = ModelParams::zeros(&tiny()).unwrap();
        let f = Frequency::new(FrequencyKind::Monthly);
        let s = TimeSeries::new("a", f, 0, vec![1.0; 10]).unwrap();
        let d = Dataset::new("m", f, 3, vec![s]).unwrap();
        assert!(matches!(zero_shot_predict(&p, &d), Err(Error::Invalid(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let t = TrainConfig {
            initial_lr: 1e300,
            decay_steps: vec![],
            max_steps: 50,
            ..TrainConfig::default()
        };
        let r = pretrain(&constant_corpus(1e3), &tiny(), &t);
        assert!(matches!(r, Err(Error::Numerical(_))), "{r:?}");
    }
}
