//! Standard optimised Theta method (θ lines 0 and 2, equal weights) on a
//! seasonally adjusted series.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::statmodels::decompose::{is_seasonal, seasonal_indices, DecompositionKind};
use crate::statmodels::{residual_variance, FittedModel, ForecasterKind, ModelState};
use crate::types::TimeSeries;

#[derive(Debug, Clone)]
pub(crate) struct ThetaState {
    intercept: f64,
    slope: f64,
    level: f64,
    alpha: f64,
    n: usize,
    /// Seasonal indices by `t mod m`; empty when no adjustment was applied.
    season: Vec<f64>,
    kind: DecompositionKind,
}

impl ThetaState {
    pub(crate) fn forecast(&self, horizon: usize, sigma2: f64) -> (Vec<f64>, Vec<f64>) {
        let mean = (1..=horizon)
            .map(|h| {
                let t = (self.n - 1 + h) as f64;
                let adj = 0.5 * (self.intercept + self.slope * t) + 0.5 * self.level;
                self.reseasonalize(adj, self.n - 1 + h)
            })
            .collect();
        let a2 = self.alpha * self.alpha;
        let var = (1..=horizon).map(|h| sigma2 * (1.0 + (h - 1) as f64 * a2)).collect();
        (mean, var)
    }

    fn reseasonalize(&self, v: f64, t: usize) -> f64 {
        if self.season.is_empty() {
            return v;
        }
        let s = self.season[t % self.season.len()];
        match self.kind {
            DecompositionKind::Multiplicative => v * s,
            DecompositionKind::Additive => v + s,
        }
    }
}

fn ols_line(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let ybar = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in y.iter().enumerate() {
        let dt = t as f64 - tbar;
        sxy += dt * (v - ybar);
        sxx += dt * dt;
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ybar - b * tbar, b)
}

/// SES one-step errors and the level path; `levels[t]` is the level after
/// observing `x[t]`.
fn ses(x: &[f64], alpha: f64, l0: f64) -> (f64, Vec<f64>) {
    let mut l = l0;
    let mut sse = 0.0;
    let mut levels = Vec::with_capacity(x.len());
    for &v in x {
        let e = v - l;
        sse += e * e;
        l += alpha * e;
        levels.push(l);
    }
    (sse, levels)
}

/// Fits the Theta method. Multiplicative seasonal adjustment is applied when
/// the lag-`m` autocorrelation is significant; series with non-positive
/// values fall back to additive adjustment (`additive_fallback = 1`).
pub fn fit_theta(train: &TimeSeries, m: usize) -> Result<FittedModel> {
    let y = train.values();
    let n = y.len();
    if n < 4 {
        return Err(Error::Fit(format!("Theta needs 4 observations, got {n}")));
    }
    let seasonal = is_seasonal(y, m);
    let mut kind = DecompositionKind::Multiplicative;
    let mut fallback = false;
    let season = if seasonal {
        if y.iter().any(|&v| v <= 0.0) {
            kind = DecompositionKind::Additive;
            fallback = true;
        }
        seasonal_indices(y, m, kind)
    } else {
        Vec::new()
    };
    let adjusted: Vec<f64> = if season.is_empty() {
        y.to_vec()
    } else {
        y.iter()
            .enumerate()
            .map(|(t, v)| match kind {
                DecompositionKind::Multiplicative => v / season[t % m],
                DecompositionKind::Additive => v - season[t % m],
            })
            .collect()
    };

    let (a, b) = ols_line(&adjusted);
    let theta2: Vec<f64> = adjusted
        .iter()
        .enumerate()
        .map(|(t, v)| 2.0 * v - (a + b * t as f64))
        .collect();
    let nm = NelderMead::with_bounds(vec![1e-4, f64::NEG_INFINITY], vec![0.9999, f64::INFINITY]);
    let best = nm.minimize(|p| ses(&theta2, p[0], p[1]).0, &[0.5, theta2[0]]);
    let (alpha, l0) = (best.x[0], best.x[1]);
    let (_, levels) = ses(&theta2, alpha, l0);

    let state = ThetaState {
        intercept: a,
        slope: b,
        level: levels[n - 1],
        alpha,
        n,
        season,
        kind,
    };
    let residuals: Vec<f64> = (0..n)
        .map(|t| {
            let prev = if t == 0 { l0 } else { levels[t - 1] };
            let adj = 0.5 * (a + b * t as f64) + 0.5 * prev;
            y[t] - state.reseasonalize(adj, t)
        })
        .collect();
    let mut parameters = BTreeMap::new();
    parameters.insert("alpha".into(), alpha);
    parameters.insert("l0".into(), l0);
    parameters.insert("intercept".into(), a);
    parameters.insert("slope".into(), b);
    parameters.insert("drift".into(), b / 2.0);
    parameters.insert("seasonal".into(), f64::from(u8::from(!state.season.is_empty())));
    parameters.insert("additive_fallback".into(), f64::from(u8::from(fallback)));
    let variant = match (state.season.is_empty(), kind) {
        (true, _) => "STheta",
        (false, DecompositionKind::Multiplicative) => "STheta[mult]",
        (false, DecompositionKind::Additive) => "STheta[add]",
    };
    Ok(FittedModel {
        kind: ForecasterKind::Theta,
        variant: variant.into(),
        parameters,
        residual_variance: residual_variance(&residuals, 4),
        aicc: None,
        candidates: Vec::new(),
        state: ModelState::Theta(state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FrequencyKind;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new("s", FrequencyKind::Quarterly.into(), 0, v).unwrap()
    }

    #[test]
    fn constant_series() {
        let fit = fit_theta(&ts(vec![7.0; 20]), 1).unwrap();
        assert_eq!(fit.param("drift"), Some(0.0));
        for v in fit.forecast(5).unwrap().mean() {
            assert!((v - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_series_matches_hand_decomposition() {
        let y: Vec<f64> = (0..30).map(|t| 3.0 + 2.0 * t as f64).collect();
        let fit = fit_theta(&ts(y.clone()), 1).unwrap();
        assert!((fit.param("slope").unwrap() - 2.0).abs() < 1e-12);
        assert!((fit.param("drift").unwrap() - 1.0).abs() < 1e-12);

        // θ2 = 2y − line = y here; replay SES by hand with the fitted α, l0.
        let (alpha, l0) = (fit.param("alpha").unwrap(), fit.param("l0").unwrap());
        let mut level = l0;
        for v in &y {
            level += alpha * (v - level);
        }
        let f = fit.forecast(6).unwrap();
        for (h, got) in f.mean().iter().enumerate() {
            let t = (29 + h + 1) as f64;
            let want = 0.5 * (3.0 + 2.0 * t) + 0.5 * level;
            assert!((got - want).abs() < 1e-6, "h={h}: {got} vs {want}");
        }
        for w in f.mean().windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn multiplicative_pattern_is_restored() {
        let pattern = [0.8, 1.2, 1.0, 1.0];
        let y: Vec<f64> = (0..40).map(|t| 100.0 * pattern[t % 4]).collect();
        let fit = fit_theta(&ts(y), 4).unwrap();
        assert_eq!(fit.variant, "STheta[mult]");
        let f = fit.forecast(8).unwrap();
        for (h, v) in f.mean().iter().enumerate() {
            let want = 100.0 * pattern[(40 + h) % 4];
            assert!((v / want - 1.0).abs() < 0.02, "h={h}: {v} vs {want}");
        }
    }

    #[test]
    fn non_positive_values_fall_back_to_additive() {
        let pattern = [-5.0, 5.0, 0.0, 0.0];
        let y: Vec<f64> = (0..40).map(|t| pattern[t % 4] + 0.01 * t as f64).collect();
        let fit = fit_theta(&ts(y), 4).unwrap();
        assert_eq!(fit.param("additive_fallback"), Some(1.0));
        assert!(fit.forecast(8).unwrap().mean().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn variance_grows() {
        let y: Vec<f64> = (0..30).map(|t| ((t * 13) % 7) as f64).collect();
        let f = fit_theta(&ts(y), 1).unwrap().forecast(12).unwrap();
        assert!(f.variance().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn too_short() {
        assert!(matches!(fit_theta(&ts(vec![1.0, 2.0, 3.0]), 1), Err(Error::Fit(_))));
    }
}
