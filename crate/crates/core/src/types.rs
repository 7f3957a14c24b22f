//! Domain types shared by every stage of the benchmark: series, datasets,
//! quantile grids and the two forecast representations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::normal_ppf;
use crate::error::{Error, Result};

/// Sampling frequency of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyKind {
    Yearly,
    Quarterly,
    Monthly,
    Weekly,
    Daily,
    Hourly,
    Other,
}

impl FrequencyKind {
    pub const ALL: [FrequencyKind; 7] = [
        FrequencyKind::Yearly,
        FrequencyKind::Quarterly,
        FrequencyKind::Monthly,
        FrequencyKind::Weekly,
        FrequencyKind::Daily,
        FrequencyKind::Hourly,
        FrequencyKind::Other,
    ];

    /// Seasonal period used by the competition task table.
    pub fn seasonal_period(self) -> usize {
        match self {
            FrequencyKind::Yearly | FrequencyKind::Weekly | FrequencyKind::Daily => 1,
            FrequencyKind::Quarterly | FrequencyKind::Other => 4,
            FrequencyKind::Monthly => 12,
            FrequencyKind::Hourly => 24,
        }
    }

    /// Horizon used when a frequency appears without a task (synthetic corpora).
    pub fn default_horizon(self) -> usize {
        match self {
            FrequencyKind::Yearly => 6,
            FrequencyKind::Quarterly | FrequencyKind::Other => 8,
            FrequencyKind::Monthly => 18,
            FrequencyKind::Weekly => 13,
            FrequencyKind::Daily => 14,
            FrequencyKind::Hourly => 48,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FrequencyKind::Yearly => "yearly",
            FrequencyKind::Quarterly => "quarterly",
            FrequencyKind::Monthly => "monthly",
            FrequencyKind::Weekly => "weekly",
            FrequencyKind::Daily => "daily",
            FrequencyKind::Hourly => "hourly",
            FrequencyKind::Other => "other",
        }
    }
}

impl fmt::Display for FrequencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrequencyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        // full name or its first letter (M, Q, Y, ... as in competition tables)
        FrequencyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower || (lower.len() == 1 && k.as_str().starts_with(&lower)))
            .ok_or_else(|| Error::Invalid(format!("unknown frequency `{s}`")))
    }
}

/// A frequency together with its seasonal period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "FrequencyKind", into = "FrequencyKind")]
pub struct Frequency {
    pub kind: FrequencyKind,
    pub seasonal_period: usize,
}

impl Frequency {
    pub fn new(kind: FrequencyKind) -> Self {
        Self {
            kind,
            seasonal_period: kind.seasonal_period(),
        }
    }
}

impl From<FrequencyKind> for Frequency {
    fn from(kind: FrequencyKind) -> Self {
        Frequency::new(kind)
    }
}

impl From<Frequency> for FrequencyKind {
    fn from(f: Frequency) -> Self {
        f.kind
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

/// An identified, finite-valued univariate series on an integer time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: String,
    pub frequency: Frequency,
    pub start_index: i64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, frequency: Frequency, start_index: i64, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values.is_empty() {
            return Err(Error::Invalid(format!("series `{id}` is empty")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "series `{id}` has a non-finite value at position {pos}"
            )));
        }
        Ok(Self {
            id,
            frequency,
            start_index,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A named collection of series sharing one frequency and forecast horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub frequency: Frequency,
    pub horizon: usize,
    pub series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, frequency: Frequency, horizon: usize, series: Vec<TimeSeries>) -> Result<Self> {
        let name = name.into();
        if horizon == 0 {
            return Err(Error::Invalid(format!("dataset `{name}` has zero horizon")));
        }
        if let Some(s) = series.iter().find(|s| s.frequency != frequency) {
            return Err(Error::Invalid(format!(
                "series `{}` is {} but dataset `{name}` is {frequency}",
                s.id, s.frequency
            )));
        }
        Ok(Self {
            name,
            frequency,
            horizon,
            series,
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

/// Strictly increasing probability levels in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileGrid {
    probs: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Invalid("quantile grid is empty".into()));
        }
        if probs.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::Domain("quantile levels must lie in (0, 1)".into()));
        }
        if probs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("quantile levels must be strictly increasing".into()));
        }
        Ok(Self { probs })
    }

    /// `k` evenly spaced levels `1/(k+1), …, k/(k+1)`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| i as f64 / (k + 1) as f64).collect())
    }

    /// The 99 percentiles `0.01, …, 0.99`.
    pub fn percentiles() -> Self {
        Self::uniform(99).expect("valid grid")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the 0.5 level, if present.
    pub fn median_index(&self) -> Option<usize> {
        self.probs.iter().position(|&q| (q - 0.5).abs() < 1e-12)
    }
}

impl Default for QuantileGrid {
    fn default() -> Self {
        Self::percentiles()
    }
}

impl TryFrom<Vec<f64>> for QuantileGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantileGrid> for Vec<f64> {
    fn from(g: QuantileGrid) -> Self {
        g.probs
    }
}

impl FromStr for QuantileGrid {
    type Err = Error;

    /// Either a count (`99` → percentiles) or a comma-separated level list.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(k) = s.parse::<usize>() {
            return Self::uniform(k);
        }
        let probs = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Invalid(format!("bad quantile level `{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }
}

/// Per-horizon Gaussian predictive distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianForecast {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl GaussianForecast {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::Shape(format!(
                "mean has {} steps, variance has {}",
                mean.len(),
                variance.len()
            )));
        }
        if variance.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invalid(
                "forecast variance must be finite and non-negative".into(),
            ));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Numerical("forecast mean is not finite".into()));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn horizon(&self) -> usize {
        self.mean.len()
    }
}

/// Forecast quantiles: `horizon` rows of `grid.len()` non-decreasing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileForecast {
    horizon: usize,
    levels: usize,
    values: Vec<f64>,
}

impl QuantileForecast {
    /// Builds from row-major values; rows must already be non-decreasing.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let horizon = rows.len();
        let levels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != levels) {
            return Err(Error::Shape("ragged quantile rows".into()));
        }
        Self::from_flat(horizon, levels, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(horizon: usize, levels: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != horizon * levels {
            return Err(Error::Shape(format!(
                "{} values for a {horizon}x{levels} forecast",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("quantile forecast is not finite".into()));
        }
        let fc = Self {
            horizon,
            levels,
            values,
        };
        if (0..horizon).any(|h| fc.row(h).windows(2).any(|w| w[0] > w[1])) {
            return Err(Error::Invalid("quantile rows must be non-decreasing".into()));
        }
        Ok(fc)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.values[h * self.levels..(h + 1) * self.levels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.levels.max(1)).take(self.horizon)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// First `h` rows.
    pub fn truncated(&self, h: usize) -> Self {
        let h = h.min(self.horizon);
        Self {
            horizon: h,
            levels: self.levels,
            values: self.values[..h * self.levels].to_vec(),
        }
    }

    /// Point forecast per step: the 0.5 quantile, linearly interpolated when
    /// the grid does not contain it.
    pub fn median(&self, grid: &QuantileGrid) -> Vec<f64> {
        let probs = grid.probs();
        if let Some(k) = grid.median_index() {
            return self.rows().map(|r| r[k]).collect();
        }
        let upper = probs.iter().position(|&q| q > 0.5);
        self.rows()
            .map(|r| match upper {
                None => r[r.len() - 1],
                Some(0) => r[0],
                Some(j) => {
                    let w = (0.5 - probs[j - 1]) / (probs[j] - probs[j - 1]);
                    r[j - 1] + w * (r[j] - r[j - 1])
                }
            })
            .collect()
    }
}

/// Holdout configuration for a single forecast origin at the series end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub horizon: usize,
    pub validation_len: usize,
}

impl SplitSpec {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            validation_len: 24,
        }
    }
}

/// Splits off the last `spec.horizon` values as the test window.
pub fn split_train_test(series: &TimeSeries, spec: &SplitSpec) -> Result<(TimeSeries, Vec<f64>)> {
    let n = series.len();
    if spec.horizon == 0 {
        return Err(Error::Split("horizon must be positive".into()));
    }
    if n <= spec.horizon {
        return Err(Error::Split(format!(
            "series `{}` has {n} values, needs more than {}",
            series.id, spec.horizon
        )));
    }
    let cut = n - spec.horizon;
    let train = TimeSeries {
        id: series.id.clone(),
        frequency: series.frequency,
        start_index: series.start_index,
        values: series.values[..cut].to_vec(),
    };
    Ok((train, series.values[cut..].to_vec()))
}

/// `mean + sqrt(variance) · z(q)` at every step and level.
pub fn gaussian_to_quantiles(f: &GaussianForecast, grid: &QuantileGrid) -> QuantileForecast {
    let z: Vec<f64> = grid
        .probs()
        .iter()
        .map(|&q| normal_ppf(q).expect("grid levels lie in (0,1)"))
        .collect();
    let mut values = Vec::with_capacity(f.horizon() * z.len());
    for (mu, var) in f.mean.iter().zip(&f.variance) {
        let sd = var.sqrt();
        values.extend(z.iter().map(|zk| mu + sd * zk));
    }
    QuantileForecast {
        horizon: f.horizon(),
        levels: z.len(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::new("s", FrequencyKind::Monthly.into(), 0, values.to_vec()).unwrap()
    }

    #[test]
    fn seasonal_periods_follow_task_table() {
        use FrequencyKind::*;
        let want = [
            (Yearly, 1),
            (Quarterly, 4),
            (Monthly, 12),
            (Weekly, 1),
            (Daily, 1),
            (Hourly, 24),
            (Other, 4),
        ];
        for (k, m) in want {
            assert_eq!(Frequency::new(k).seasonal_period, m);
        }
    }

    #[test]
    fn frequency_parsing() {
        assert_eq!("Monthly".parse::<FrequencyKind>().unwrap(), FrequencyKind::Monthly);
        assert_eq!("h".parse::<FrequencyKind>().unwrap(), FrequencyKind::Hourly);
        assert!("fortnightly".parse::<FrequencyKind>().is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(TimeSeries::new("x", FrequencyKind::Daily.into(), 0, vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new("x", FrequencyKind::Daily.into(), 0, vec![]).is_err());
    }

    #[test]
    fn split_examples() {
        let (train, test) = split_train_test(&ts(&[1., 2., 3., 4., 5.]), &SplitSpec::new(2)).unwrap();
        assert_eq!(train.values(), &[1., 2., 3.]);
        assert_eq!(test, vec![4., 5.]);

        assert!(matches!(
            split_train_test(&ts(&[7.]), &SplitSpec::new(1)),
            Err(Error::Split(_))
        ));

        let m3_monthly_min: Vec<f64> = (0..66).map(f64::from).collect();
        let (train, test) = split_train_test(&ts(&m3_monthly_min), &SplitSpec::new(18)).unwrap();
        assert_eq!(train.len(), 48);
        assert_eq!(test.len(), 18);
    }

    #[test]
    fn gaussian_quantile_examples() {
        let g = GaussianForecast::new(vec![2.5], vec![1.0]).unwrap();
        let q = gaussian_to_quantiles(&g, &QuantileGrid::new(vec![0.5]).unwrap());
        assert_eq!(q.row(0), &[2.5]);

        let g = GaussianForecast::new(vec![0.0], vec![4.0]).unwrap();
        let q = gaussian_to_quantiles(&g, &QuantileGrid::new(vec![0.975]).unwrap());
        assert!((q.row(0)[0] - 3.919_928).abs() < 1e-6);

        let g = GaussianForecast::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let q = gaussian_to_quantiles(&g, &QuantileGrid::percentiles());
        assert!(q.as_flat().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn grid_validation() {
        assert!(QuantileGrid::new(vec![0.5, 0.5]).is_err());
        assert!(QuantileGrid::new(vec![0.0, 0.5]).is_err());
        assert!(QuantileGrid::new(vec![0.9, 0.1]).is_err());
        let g: QuantileGrid = "0.1, 0.5,0.9".parse().unwrap();
        assert_eq!(g.probs(), &[0.1, 0.5, 0.9]);
        let g: QuantileGrid = "99".parse().unwrap();
        assert_eq!(g.len(), 99);
        assert!((g.probs()[0] - 0.01).abs() < 1e-15);
        assert_eq!(g.median_index(), Some(49));
    }

    #[test]
    fn median_interpolates_when_missing() {
        let grid = QuantileGrid::new(vec![0.25, 0.75]).unwrap();
        let fc = QuantileForecast::from_rows(vec![vec![1.0, 3.0]]).unwrap();
        assert_eq!(fc.median(&grid), vec![2.0]);
    }

    proptest! {
        #[test]
        fn split_round_trips(values in prop::collection::vec(-1e6f64..1e6, 2..60), h in 1usize..20) {
            prop_assume!(h < values.len());
            let s = ts(&values);
            let (train, test) = split_train_test(&s, &SplitSpec::new(h)).unwrap();
            let mut joined = train.values().to_vec();
            joined.extend(test);
            prop_assert_eq!(joined, values);
        }

        #[test]
        fn gaussian_quantiles_are_monotone(
            mean in prop::collection::vec(-1e3f64..1e3, 1..8),
            sd in 0f64..50.0,
        ) {
            let var = vec![sd * sd; mean.len()];
            let g = GaussianForecast::new(mean, var).unwrap();
            let q = gaussian_to_quantiles(&g, &QuantileGrid::percentiles());
            for row in q.rows() {
                prop_assert!(row.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
