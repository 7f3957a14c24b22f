//! Classical per-series forecasters, each yielding Gaussian forecasts.
//!
//! Every fit is deterministic: optimizers start from fixed points and use
//! the fixed Nelder–Mead restart schedule in [`crate::optim`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{GaussianForecast, TimeSeries};

pub mod arima;
pub mod ces;
pub mod decompose;
pub mod ets;
pub mod naive;
pub mod theta;

pub use arima::auto_arima;
pub use ces::fit_ces;
pub use ets::fit_ets;
pub use naive::{fit_seasonal_naive, seasonal_naive};
pub use theta::fit_theta;

/// Every forecaster the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ForecasterKind {
    Naive,
    SeasonalNaive,
    #[serde(rename = "ETS")]
    Ets,
    Theta,
    #[serde(rename = "AutoARIMA")]
    AutoArima,
    #[serde(rename = "CES")]
    Ces,
    #[serde(rename = "SiCoUM")]
    SiCoUM,
    Neural,
}

impl ForecasterKind {
    pub const STATISTICAL: [ForecasterKind; 7] = [
        ForecasterKind::Naive,
        ForecasterKind::SeasonalNaive,
        ForecasterKind::Ets,
        ForecasterKind::Theta,
        ForecasterKind::AutoArima,
        ForecasterKind::Ces,
        ForecasterKind::SiCoUM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ForecasterKind::Naive => "Naive",
            ForecasterKind::SeasonalNaive => "SeasonalNaive",
            ForecasterKind::Ets => "ETS",
            ForecasterKind::Theta => "Theta",
            ForecasterKind::AutoArima => "ARIMA",
            ForecasterKind::Ces => "CES",
            ForecasterKind::SiCoUM => "SiCoUM",
            ForecasterKind::Neural => "NBEATS",
        }
    }

    /// Deterministic forecasters produce a single score row (no seed spread).
    pub fn is_deterministic(self) -> bool {
        self != ForecasterKind::Neural
    }

    fn legal_options(self) -> &'static [&'static str] {
        match self {
            ForecasterKind::Naive => &[],
            ForecasterKind::SeasonalNaive
            | ForecasterKind::Ets
            | ForecasterKind::Theta
            | ForecasterKind::Ces
            | ForecasterKind::SiCoUM => &["season_length"],
            ForecasterKind::AutoArima => &["season_length", "max_p", "max_q", "max_sp", "max_sq"],
            ForecasterKind::Neural => &["checkpoint"],
        }
    }
}

impl fmt::Display for ForecasterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ForecasterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "naive" => ForecasterKind::Naive,
            "seasonalnaive" | "snaive" => ForecasterKind::SeasonalNaive,
            "ets" => ForecasterKind::Ets,
            "theta" => ForecasterKind::Theta,
            "arima" | "autoarima" => ForecasterKind::AutoArima,
            "ces" => ForecasterKind::Ces,
            "sicoum" => ForecasterKind::SiCoUM,
            "neural" | "nbeats" => ForecasterKind::Neural,
            _ => return Err(Error::Invalid(format!("unknown forecaster `{s}`"))),
        };
        Ok(k)
    }
}

/// A forecaster kind with its options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecasterSpec {
    pub kind: ForecasterKind,
    #[serde(default)]
    pub options: BTreeMap<String, String>,
}

impl ForecasterSpec {
    pub fn new(kind: ForecasterKind) -> Self {
        Self {
            kind,
            options: BTreeMap::new(),
        }
    }

    pub fn with_option(mut self, key: &str, value: impl ToString) -> Result<Self> {
        self.options.insert(key.to_string(), value.to_string());
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let legal = self.kind.legal_options();
        if let Some(k) = self.options.keys().find(|k| !legal.contains(&k.as_str())) {
            return Err(Error::Invalid(format!("option `{k}` is not valid for {}", self.kind)));
        }
        for (k, v) in &self.options {
            if k != "checkpoint" && v.parse::<usize>().is_err() {
                return Err(Error::Invalid(format!("option `{k}` needs an integer, got `{v}`")));
            }
        }
        Ok(())
    }

    pub fn usize_option(&self, key: &str) -> Option<usize> {
        self.options.get(key).and_then(|v| v.parse().ok())
    }

    /// Seasonal period, honouring a `season_length` override.
    pub fn season_length(&self, default: usize) -> usize {
        self.usize_option("season_length").unwrap_or(default).max(1)
    }
}

impl FromStr for ForecasterSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Self::new(s.parse()?))
    }
}

/// One scored candidate of a model-selection search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub label: String,
    pub aicc: f64,
}

/// A fitted model, immutable after fitting.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub kind: ForecasterKind,
    /// Selected structure, e.g. `AAdN` or `ARIMA(1,1,0)`.
    pub variant: String,
    pub parameters: BTreeMap<String, f64>,
    pub residual_variance: f64,
    pub aicc: Option<f64>,
    /// Every candidate evaluated during selection.
    pub candidates: Vec<CandidateScore>,
    pub(crate) state: ModelState,
}

#[derive(Debug, Clone)]
pub(crate) enum ModelState {
    SeasonalNaive(naive::NaiveState),
    Ets(ets::EtsState),
    Theta(theta::ThetaState),
    Arima(arima::ArimaState),
    Ces(ces::CesState),
}

impl FittedModel {
    /// Gaussian forecast for the next `horizon` steps.
    pub fn forecast(&self, horizon: usize) -> Result<GaussianForecast> {
        let (mean, var) = match &self.state {
            ModelState::SeasonalNaive(s) => s.forecast(horizon, self.residual_variance),
            ModelState::Ets(s) => s.forecast(horizon, self.residual_variance),
            ModelState::Theta(s) => s.forecast(horizon, self.residual_variance),
            ModelState::Arima(s) => s.forecast(horizon, self.residual_variance),
            ModelState::Ces(s) => s.forecast(horizon, self.residual_variance),
        };
        if mean.iter().chain(&var).any(|v| !v.is_finite()) {
            return Err(Error::Fit(format!("{} produced a non-finite forecast", self.kind)));
        }
        GaussianForecast::new(mean, var)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }
}

/// Fits one statistical forecaster on a training series.
pub fn fit(spec: &ForecasterSpec, train: &TimeSeries, m: usize) -> Result<FittedModel> {
    spec.validate()?;
    let m = spec.season_length(m);
    match spec.kind {
        ForecasterKind::Naive => fit_seasonal_naive(train, 1),
        ForecasterKind::SeasonalNaive => fit_seasonal_naive(train, m),
        ForecasterKind::Ets => fit_ets(train, m),
        ForecasterKind::Theta => fit_theta(train, m),
        ForecasterKind::AutoArima => {
            let mut opts = arima::AutoArimaOptions::default();
            if let Some(v) = spec.usize_option("max_p") {
                opts.max_p = v;
            }
            if let Some(v) = spec.usize_option("max_q") {
                opts.max_q = v;
            }
            if let Some(v) = spec.usize_option("max_sp") {
                opts.max_sp = v;
            }
            if let Some(v) = spec.usize_option("max_sq") {
                opts.max_sq = v;
            }
            arima::auto_arima_with(train, m, &opts)
        }
        ForecasterKind::Ces => fit_ces(train, m),
        ForecasterKind::SiCoUM | ForecasterKind::Neural => Err(Error::Invalid(format!(
            "{} is not a single statistical model",
            spec.kind
        ))),
    }
}

/// Corrected Akaike criterion; `k` counts every estimated quantity.
pub(crate) fn aicc(loglik: f64, k: usize, n: usize) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    if n <= k + 1 {
        return f64::INFINITY;
    }
    -2.0 * loglik + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (nf - kf - 1.0)
}

/// Gaussian log-likelihood with the variance concentrated out.
///
/// The variance is floored relative to the data scale so exact fits give a
/// very large but finite likelihood.
pub(crate) fn concentrated_loglik(sse: f64, n: usize, scale: f64) -> f64 {
    let nf = n as f64;
    let floor = 1e-20 * scale.max(1e-300);
    let var = (sse / nf).max(floor);
    -0.5 * nf * ((2.0 * std::f64::consts::PI * var).ln() + 1.0)
}

/// Mean square of a series, used as the scale of variance floors.
pub(crate) fn mean_square(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 1.0;
    }
    (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).max(1e-300)
}

/// Residual variance with denominator `n − n_params` (at least 1).
pub(crate) fn residual_variance(residuals: &[f64], n_params: usize) -> f64 {
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let dof = residuals.len().saturating_sub(n_params).max(1);
    sse / dof as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ForecasterKind::STATISTICAL {
            assert_eq!(k.name().parse::<ForecasterKind>().unwrap(), k);
        }
        assert_eq!("nbeats".parse::<ForecasterKind>().unwrap(), ForecasterKind::Neural);
    }

    #[test]
    fn option_legality() {
        assert!(ForecasterSpec::new(ForecasterKind::AutoArima)
            .with_option("max_p", 3)
            .is_ok());
        assert!(ForecasterSpec::new(ForecasterKind::Naive)
            .with_option("max_p", 3)
            .is_err());
        assert!(ForecasterSpec::new(ForecasterKind::Ets)
            .with_option("season_length", "x")
            .is_err());
    }

    #[test]
    fn aicc_penalises_parameters() {
        assert!(aicc(-10.0, 3, 50) > aicc(-10.0, 2, 50));
        assert_eq!(aicc(-10.0, 5, 6), f64::INFINITY);
    }
}
