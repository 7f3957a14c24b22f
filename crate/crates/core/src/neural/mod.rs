//! NBEATS-style quantile network trained on mixed-frequency corpora and
//! applied zero-shot.
//!
//! The generic doubly-residual architecture: every block reads the running
//! residual of the scaled context, subtracts its backcast, and adds an
//! `H·K` forecast contribution. Rows of the summed output are sorted so the
//! `K` quantiles never cross.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::QuantileGrid;

pub mod checkpoint;
pub mod network;
pub mod sampler;
pub mod train;
pub mod window;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use network::{batch_loss, forward, forward_batch, loss, loss_and_grad, Batch, ModelParams, TensorShape};
pub use sampler::BalancedSampler;
pub use train::{pretrain, zero_shot_predict, TrainLog, TrainedModel, ValidationEntry};
pub use window::{forecast_window, make_window, ScaledWindow, SCALE_EPS};

/// Network shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBeatsConfig {
    pub input_size: usize,
    pub stacks: usize,
    pub blocks_per_stack: usize,
    pub mlp_layers: usize,
    pub hidden_size: usize,
    pub horizon: usize,
    pub quantile_grid: QuantileGrid,
}

impl Default for NBeatsConfig {
    /// Desk scale: the full topology with hidden width 64.
    fn default() -> Self {
        Self {
            input_size: 48,
            stacks: 4,
            blocks_per_stack: 3,
            mlp_layers: 2,
            hidden_size: 64,
            horizon: 24,
            quantile_grid: QuantileGrid::percentiles(),
        }
    }
}

impl NBeatsConfig {
    pub fn full_scale() -> Self {
        Self {
            hidden_size: 512,
            ..Self::default()
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.stacks * self.blocks_per_stack
    }

    /// Output width per window: `H · K`.
    pub fn output_size(&self) -> usize {
        self.horizon * self.quantile_grid.len()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("input_size", self.input_size),
            ("stacks", self.stacks),
            ("blocks_per_stack", self.blocks_per_stack),
            ("mlp_layers", self.mlp_layers),
            ("hidden_size", self.hidden_size),
            ("horizon", self.horizon),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(Error::Invalid(format!("network {name} must be positive"))),
            None => Ok(()),
        }
    }
}

/// Optimiser schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_decay: f64,
    pub decay_steps: Vec<usize>,
    pub max_steps: usize,
    pub momentum: f64,
    pub seed: u64,
    pub validation_len: usize,
    /// Validation is evaluated every this many steps, starting at step 0.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    /// Desk scale: 20k steps with the decay points at 2/3 and 5/6 of the run.
    fn default() -> Self {
        Self {
            batch_size: 32,
            initial_lr: 1e-3,
            lr_decay: 0.1,
            decay_steps: vec![13_333, 16_667],
            max_steps: 20_000,
            momentum: 0.9,
            seed: 0,
            validation_len: 24,
            eval_every: 500,
        }
    }
}

impl TrainConfig {
    pub fn full_scale() -> Self {
        Self {
            decay_steps: vec![40_000, 50_000],
            max_steps: 60_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::Invalid("batch_size and eval_every must be positive".into()));
        }
        if !(self.initial_lr > 0.0) || !(self.lr_decay > 0.0) {
            return Err(Error::Invalid("learning rate and decay must be positive".into()));
        }
        if self.decay_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("decay_steps must be strictly ascending".into()));
        }
        if self.decay_steps.last().is_some_and(|&s| s >= self.max_steps) {
            return Err(Error::Invalid("decay_steps must lie below max_steps".into()));
        }
        Ok(())
    }

    /// Learning rate in effect for update number `step` (0-based).
    pub fn lr_at(&self, step: usize) -> f64 {
        let decays = self.decay_steps.iter().filter(|&&s| step >= s).count();
        self.initial_lr * self.lr_decay.powi(decays as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        let t = TrainConfig::full_scale();
        assert!(t.validate().is_ok());
        assert_eq!(t.lr_at(0), 1e-3);
        assert!((t.lr_at(40_000) - 1e-4).abs() < 1e-18);
        assert!((t.lr_at(59_999) - 1e-5).abs() < 1e-18);
        let bad = TrainConfig {
            decay_steps: vec![5, 3],
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let late = TrainConfig {
            decay_steps: vec![20_000],
            ..TrainConfig::default()
        };
        assert!(late.validate().is_err());
    }

    #[test]
    fn shapes() {
        let c = NBeatsConfig::default();
        assert_eq!(c.n_blocks(), 12);
        assert_eq!(c.output_size(), 24 * 99);
        assert_eq!(NBeatsConfig::full_scale().hidden_size, 512);
        let zero = NBeatsConfig {
            stacks: 0,
            ..NBeatsConfig::default()
        };
        assert!(zero.validate().is_err());
    }
}
