//! Per-window mean-absolute scaling with left padding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Added to the scale so an all-zero context divides safely.
pub const SCALE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledWindow {
    /// Length `L`; padded positions are zero.
    pub context: Vec<f64>,
    /// Length `H` (empty for forecast-only windows).
    pub target: Vec<f64>,
    pub scale: f64,
    /// `true` where the context holds an observation.
    pub mask: Vec<bool>,
}

fn build(values: &[f64], origin: usize, input_size: usize, target: &[f64]) -> Result<ScaledWindow> {
    let start = origin.saturating_sub(input_size);
    let observed = &values[start..origin];
    if observed.is_empty() {
        return Err(Error::Window(format!("no context before origin {origin}")));
    }
    let pad = input_size - observed.len();
    let scale = observed.iter().map(|v| v.abs()).sum::<f64>() / observed.len() as f64 + SCALE_EPS;
    let mut context = vec![0.0; pad];
    context.extend(observed.iter().map(|v| v / scale));
    let mut mask = vec![false; pad];
    mask.resize(input_size, true);
    Ok(ScaledWindow {
        context,
        target: target.iter().map(|v| v / scale).collect(),
        scale,
        mask,
    })
}

/// Training window whose target is `values[origin..origin + horizon]`.
pub fn make_window(values: &[f64], origin: usize, input_size: usize, horizon: usize) -> Result<ScaledWindow> {
    if origin + horizon > values.len() {
        return Err(Error::Window(format!(
            "origin {origin} + horizon {horizon} exceeds series length {}",
            values.len()
        )));
    }
    build(values, origin, input_size, &values[origin..origin + horizon])
}

/// Window at the end of the series, with no target.
pub fn forecast_window(values: &[f64], input_size: usize) -> Result<ScaledWindow> {
    build(values, values.len(), input_size, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_is_mean_abs() {
        let w = forecast_window(&[2.0, 4.0, 6.0], 3).unwrap();
        assert!((w.scale - 4.0).abs() < 1e-7);
        for (got, want) in w.context.iter().zip([0.5, 1.0, 1.5]) {
            assert!((got - want).abs() < 1e-8);
        }
        assert_eq!(w.mask, vec![true; 3]);
    }

    #[test]
    fn zero_context_uses_eps() {
        let w = forecast_window(&[0.0; 5], 4).unwrap();
        assert_eq!(w.scale, SCALE_EPS);
        assert_eq!(w.context, vec![0.0; 4]);
    }

    #[test]
    fn short_series_is_left_padded() {
        let w = forecast_window(&[3.0, 5.0], 4).unwrap();
        assert_eq!(w.mask, vec![false, false, true, true]);
        assert_eq!(w.context[..2], [0.0, 0.0]);
        assert!((w.context[2] * w.scale - 3.0).abs() < 1e-12);
        assert!((w.context[3] * w.scale - 5.0).abs() < 1e-12);
    }

    #[test]
    fn training_window_bounds() {
        let y: Vec<f64> = (1..=10).map(f64::from).collect();
        let w = make_window(&y, 6, 4, 3).unwrap();
        assert_eq!(w.target.len(), 3);
        assert!((w.target[0] * w.scale - 7.0).abs() < 1e-12);
        assert!(matches!(make_window(&y, 8, 4, 3), Err(Error::Window(_))));
        assert!(matches!(make_window(&y, 0, 4, 3), Err(Error::Window(_))));
    }
}
