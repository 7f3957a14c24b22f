use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::statmodels::{FittedModel, ForecasterKind, ModelState};
use crate::types::{GaussianForecast, TimeSeries};

#[derive(Debug, Clone)]
pub(crate) struct NaiveState {
    last_season: Vec<f64>,
}

impl NaiveState {
    pub(crate) fn forecast(&self, horizon: usize, sigma2: f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.last_season.len();
        let mean = (0..horizon).map(|h| self.last_season[h % m]).collect();
        let var = (1..=horizon).map(|h| sigma2 * h.div_ceil(m) as f64).collect();
        (mean, var)
    }
}

/// Seasonal naive: repeats the last observed season.
///
/// The variance grows with the number of completed seasons in the horizon,
/// scaled by the in-sample variance of the `m`-lag differences.
pub fn fit_seasonal_naive(train: &TimeSeries, m: usize) -> Result<FittedModel> {
    let y = train.values();
    let m = m.max(1);
    if y.len() < m {
        return Err(Error::Fit(format!(
            "seasonal naive needs {m} observations, series `{}` has {}",
            train.id,
            y.len()
        )));
    }
    let diffs: Vec<f64> = y.windows(m + 1).map(|w| w[m] - w[0]).collect();
    let sigma2 = if diffs.is_empty() {
        0.0
    } else {
        diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64
    };
    let kind = if m == 1 {
        ForecasterKind::Naive
    } else {
        ForecasterKind::SeasonalNaive
    };
    let mut parameters = BTreeMap::new();
    parameters.insert("season_length".to_string(), m as f64);
    Ok(FittedModel {
        kind,
        variant: format!("SNaive[{m}]"),
        parameters,
        residual_variance: sigma2,
        aicc: None,
        candidates: Vec::new(),
        state: ModelState::SeasonalNaive(NaiveState {
            last_season: y[y.len() - m..].to_vec(),
        }),
    })
}

/// Seasonal naive Gaussian forecast over `horizon` steps.
pub fn seasonal_naive(train: &TimeSeries, m: usize, horizon: usize) -> Result<GaussianForecast> {
    fit_seasonal_naive(train, m)?.forecast(horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FrequencyKind;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new("s", FrequencyKind::Quarterly.into(), 0, v.to_vec()).unwrap()
    }

    #[test]
    fn repeats_last_value() {
        let f = seasonal_naive(&ts(&[1., 2., 3., 4.]), 1, 2).unwrap();
        assert_eq!(f.mean(), &[4., 4.]);
    }

    #[test]
    fn repeats_last_season() {
        let f = seasonal_naive(&ts(&[1., 2., 3., 4.]), 2, 2).unwrap();
        assert_eq!(f.mean(), &[3., 4.]);
        let f = seasonal_naive(&ts(&[1., 2., 3., 4., 5.]), 3, 5).unwrap();
        assert_eq!(f.mean(), &[3., 4., 5., 3., 4.]);
    }

    #[test]
    fn constant_series_has_zero_variance() {
        let f = seasonal_naive(&ts(&[5., 5., 5., 5.]), 2, 4).unwrap();
        assert_eq!(f.mean(), &[5., 5., 5., 5.]);
        assert_eq!(f.variance(), &[0., 0., 0., 0.]);
    }

    #[test]
    fn variance_steps_per_season() {
        // lag-2 differences: 2, 2, -6 -> mean square 44/3
        let f = seasonal_naive(&ts(&[1., 2., 3., 4., -3.]), 2, 5).unwrap();
        let s2 = 44.0 / 3.0;
        assert_eq!(f.variance(), &[s2, s2, 2. * s2, 2. * s2, 3. * s2]);
    }

    #[test]
    fn too_short() {
        assert!(matches!(seasonal_naive(&ts(&[1., 2.]), 4, 1), Err(Error::Fit(_))));
    }
}
