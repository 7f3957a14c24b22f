//! Quantile loss, Riemann-sum CRPS, dataset-level sCRPS and MASE, and the
//! uniform / observation-weighted summaries across datasets.
//!
//! Dataset sums iterate series in id order (`BTreeMap`) so results are
//! bitwise reproducible regardless of how forecasts were produced.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statmodels::seasonal_naive;
use crate::types::{FrequencyKind, QuantileForecast, QuantileGrid, TimeSeries};

/// Pinball loss `q(y − ŷ)⁺ + (1 − q)(ŷ − y)⁺`.
pub fn quantile_loss(y: f64, yhat: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level {q} outside (0, 1)")));
    }
    Ok(q * (y - yhat).max(0.0) + (1.0 - q) * (yhat - y).max(0.0))
}

/// `2 · mean_k QL(y, row[k], probs[k])`.
pub fn crps_riemann(y: f64, row: &[f64], grid: &QuantileGrid) -> Result<f64> {
    if row.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} quantile values for a {}-level grid",
            row.len(),
            grid.len()
        )));
    }
    let mut total = 0.0;
    for (&yhat, &q) in row.iter().zip(grid.probs()) {
        total += quantile_loss(y, yhat, q)?;
    }
    Ok(2.0 * total / grid.len() as f64)
}

/// Numerator and denominator of sCRPS, kept separate so partial datasets
/// can be merged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CrpsSums {
    pub crps: f64,
    pub abs_actual: f64,
    pub n_obs: usize,
}

impl CrpsSums {
    pub fn ratio(&self) -> Result<f64> {
        if self.abs_actual == 0.0 {
            return Err(Error::Denominator("sum of absolute actuals is zero".into()));
        }
        Ok(self.crps / self.abs_actual)
    }
}

pub fn crps_sums(
    actuals: &BTreeMap<String, Vec<f64>>,
    forecasts: &BTreeMap<String, QuantileForecast>,
    grid: &QuantileGrid,
) -> Result<CrpsSums> {
    let mut sums = CrpsSums::default();
    for (id, ys) in actuals {
        let fc = forecasts
            .get(id)
            .ok_or_else(|| Error::Shape(format!("no forecast for series `{id}`")))?;
        if fc.horizon() != ys.len() {
            return Err(Error::Shape(format!(
                "series `{id}`: forecast horizon {} vs {} actuals",
                fc.horizon(),
                ys.len()
            )));
        }
        for (h, &y) in ys.iter().enumerate() {
            sums.crps += crps_riemann(y, fc.row(h), grid)?;
            sums.abs_actual += y.abs();
            sums.n_obs += 1;
        }
    }
    Ok(sums)
}

/// `Σ CRPS / Σ |y|` over every series and step of a dataset.
pub fn scrps(
    actuals: &BTreeMap<String, Vec<f64>>,
    forecasts: &BTreeMap<String, QuantileForecast>,
    grid: &QuantileGrid,
) -> Result<f64> {
    crps_sums(actuals, forecasts, grid)?.ratio()
}

/// Which naive errors form the MASE denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaseScaling {
    /// Seasonal-naive forecast errors over the same test points.
    #[default]
    OutOfSample,
    /// Classical in-sample `m`-lag naive errors, averaged per series and
    /// scaled to the horizon.
    InSample,
}

impl FromStr for MaseScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out-of-sample" | "oos" => Ok(MaseScaling::OutOfSample),
            "in-sample" | "is" => Ok(MaseScaling::InSample),
            _ => Err(Error::Invalid(format!("unknown MASE scaling `{s}`"))),
        }
    }
}

/// `Σ|y − ŷ| / Σ|y − ỹ|` given the benchmark forecasts `ỹ` directly.
pub fn mase_ratio(
    actuals: &BTreeMap<String, Vec<f64>>,
    forecasts: &BTreeMap<String, Vec<f64>>,
    benchmark: &BTreeMap<String, Vec<f64>>,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (id, ys) in actuals {
        let lookup = |map: &BTreeMap<String, Vec<f64>>, what: &str| -> Result<Vec<f64>> {
            let v = map
                .get(id)
                .ok_or_else(|| Error::Shape(format!("no {what} for series `{id}`")))?;
            if v.len() < ys.len() {
                return Err(Error::Shape(format!("series `{id}`: {what} is too short")));
            }
            Ok(v[..ys.len()].to_vec())
        };
        let f = lookup(forecasts, "forecast")?;
        let b = lookup(benchmark, "benchmark forecast")?;
        for ((y, fh), bh) in ys.iter().zip(&f).zip(&b) {
            num += (y - fh).abs();
            den += (y - bh).abs();
        }
    }
    if den == 0.0 {
        return Err(Error::Denominator("seasonal-naive absolute error is zero".into()));
    }
    Ok(num / den)
}

/// MASE against the seasonal naive fitted on each training series.
pub fn mase(
    actuals: &BTreeMap<String, Vec<f64>>,
    forecasts: &BTreeMap<String, Vec<f64>>,
    trains: &BTreeMap<String, TimeSeries>,
    m: usize,
    scaling: MaseScaling,
) -> Result<f64> {
    let train = |id: &str| {
        trains
            .get(id)
            .ok_or_else(|| Error::Shape(format!("no training series for `{id}`")))
    };
    match scaling {
        MaseScaling::OutOfSample => {
            let mut bench = BTreeMap::new();
            for (id, ys) in actuals {
                let f = seasonal_naive(train(id)?, m, ys.len())?;
                bench.insert(id.clone(), f.mean().to_vec());
            }
            mase_ratio(actuals, forecasts, &bench)
        }
        MaseScaling::InSample => {
            let mut num = 0.0;
            let mut den = 0.0;
            for (id, ys) in actuals {
                let y = train(id)?.values();
                if y.len() <= m {
                    return Err(Error::Fit(format!("series `{id}` too short for in-sample naive")));
                }
                let scale = y.windows(m + 1).map(|w| (w[m] - w[0]).abs()).sum::<f64>() / (y.len() - m) as f64;
                let f = forecasts
                    .get(id)
                    .ok_or_else(|| Error::Shape(format!("no forecast for series `{id}`")))?;
                num += ys.iter().zip(f).map(|(a, b)| (a - b).abs()).sum::<f64>();
                den += scale * ys.len() as f64;
            }
            if den == 0.0 {
                return Err(Error::Denominator("in-sample naive error is zero".into()));
            }
            Ok(num / den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "sCRPS")]
    SCrps,
    #[serde(rename = "MASE")]
    Mase,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::SCrps => "sCRPS",
            Metric::Mase => "MASE",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scrps" => Ok(Metric::SCrps),
            "mase" => Ok(Metric::Mase),
            _ => Err(Error::Invalid(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub dataset: String,
    pub frequency: FrequencyKind,
    pub model: String,
    pub metric: Metric,
    pub value: f64,
    /// Test observations scored: `#series · H`.
    pub n_obs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn push(&mut self, row: ScoreRow) -> Result<()> {
        if !row.value.is_finite() {
            return Err(Error::Numerical(format!(
                "{} {} on {} is not finite",
                row.model, row.metric, row.dataset
            )));
        }
        if row.n_obs == 0 {
            return Err(Error::Invalid(format!("{} has no scored observations", row.dataset)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: ScoreTable) -> Result<()> {
        other.rows.into_iter().try_for_each(|r| self.push(r))
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn models(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.model) {
                seen.push(r.model.clone());
            }
        }
        seen
    }
}

/// One dataset × model × metric after reducing over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub dataset: String,
    pub frequency: FrequencyKind,
    pub model: String,
    pub metric: Metric,
    pub mean: f64,
    /// Sample standard deviation; `None` with a single seed.
    pub std: Option<f64>,
    pub n_seeds: usize,
    pub n_obs: usize,
}

/// Mean and sample standard deviation over seeds, in first-seen row order.
pub fn reduce_seeds(table: &ScoreTable) -> Vec<SeedSummary> {
    let mut order: Vec<(String, String, Metric)> = Vec::new();
    let mut groups: BTreeMap<(String, String, Metric), Vec<&ScoreRow>> = BTreeMap::new();
    for r in &table.rows {
        let key = (r.dataset.clone(), r.model.clone(), r.metric);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let mut rows = groups.remove(&key).unwrap_or_default();
            rows.sort_by_key(|r| r.seed);
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r.value).sum::<f64>() / n;
            let std = (rows.len() > 1)
                .then(|| (rows.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
            SeedSummary {
                frequency: rows[0].frequency,
                n_obs: rows[0].n_obs,
                n_seeds: rows.len(),
                dataset: key.0,
                model: key.1,
                metric: key.2,
                mean,
                std,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMode {
    Uniform,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model: String,
    pub metric: Metric,
    pub mode: AggregateMode,
    pub value: f64,
    pub n_datasets: usize,
    pub n_obs: usize,
}

/// Cross-dataset summary per model × metric, after the seed reduction.
pub fn aggregate(table: &ScoreTable, mode: AggregateMode) -> Result<Vec<AggregateRow>> {
    if table.is_empty() {
        return Err(Error::Invalid("cannot aggregate an empty score table".into()));
    }
    let mut groups: BTreeMap<(String, Metric), Vec<SeedSummary>> = BTreeMap::new();
    let mut order = Vec::new();
    for s in reduce_seeds(table) {
        let key = (s.model.clone(), s.metric);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(s);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let mut rows = groups.remove(&key).unwrap_or_default();
            rows.sort_by(|a, b| a.dataset.cmp(&b.dataset));
            let total: usize = rows.iter().map(|r| r.n_obs).sum();
            let value = match mode {
                AggregateMode::Uniform => rows.iter().map(|r| r.mean).sum::<f64>() / rows.len() as f64,
                AggregateMode::Weighted => rows.iter().map(|r| r.mean * r.n_obs as f64).sum::<f64>() / total as f64,
            };
            AggregateRow {
                model: key.0,
                metric: key.1,
                mode,
                value,
                n_datasets: rows.len(),
                n_obs: total,
            }
        })
        .collect())
}
