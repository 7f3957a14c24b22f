//! On-disk results: forecast files, score tables and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! re-reading a forecast file reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{AggregateRow, ScoreRow, ScoreTable};
use crate::types::{GaussianForecast, QuantileForecast, QuantileGrid};

pub const SCHEMA_VERSION: u32 = 1;

/// One series' forecast; the Gaussian form is kept when the model has one.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesForecast {
    pub quantiles: QuantileForecast,
    pub gaussian: Option<GaussianForecast>,
}

impl SeriesForecast {
    /// Mean for Gaussian models, median otherwise.
    pub fn point(&self, grid: &QuantileGrid) -> Vec<f64> {
        match &self.gaussian {
            Some(g) => g.mean().to_vec(),
            None => self.quantiles.median(grid),
        }
    }
}

pub type ForecastSet = BTreeMap<String, SeriesForecast>;

fn file_stem(model: &str, seed: u64) -> String {
    format!("{model}-seed{seed}")
}

#[derive(Debug, Clone)]
pub struct ResultStore {
    root: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct QuantileRow {
    series_id: String,
    h: usize,
    q: f64,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianRow {
    series_id: String,
    h: usize,
    mean: f64,
    variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    /// SHA-256 of the serialised `config`.
    pub config_hash: String,
    pub code_version: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub config: serde_json::Value,
}

pub fn config_hash(config: &serde_json::Value) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(config)?)))
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config_hash: config_hash(&config)?,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
            config,
        })
    }

    /// Stamps the completion time.
    pub fn finish(&mut self) {
        self.finished_at = Some(chrono::Utc::now().to_rfc3339());
    }

    pub fn verify(&self) -> Result<()> {
        if config_hash(&self.config)? != self.config_hash {
            return Err(Error::Invalid("manifest hash does not match its config".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

impl ResultStore {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(Error::Invalid(format!("no result directory at {}", root.display())));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn forecast_dir(&self, task: &str) -> PathBuf {
        self.root.join("forecasts").join(task)
    }

    pub fn write_forecasts(
        &self,
        task: &str,
        model: &str,
        seed: u64,
        grid: &QuantileGrid,
        set: &ForecastSet,
    ) -> Result<()> {
        let dir = self.forecast_dir(task);
        fs::create_dir_all(&dir)?;
        let stem = file_stem(model, seed);
        let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
        for (id, f) in set {
            for (h, row) in f.quantiles.rows().enumerate() {
                for (&q, &value) in grid.probs().iter().zip(row) {
                    w.serialize(QuantileRow {
                        series_id: id.clone(),
                        h: h + 1,
                        q,
                        value,
                    })?;
                }
            }
        }
        w.flush()?;
        if set.values().any(|f| f.gaussian.is_some()) {
            let mut w = csv::Writer::from_path(dir.join(format!("{stem}.gaussian.csv")))?;
            for (id, g) in set.iter().filter_map(|(id, f)| f.gaussian.as_ref().map(|g| (id, g))) {
                for (h, (&mean, &variance)) in g.mean().iter().zip(g.variance()).enumerate() {
                    w.serialize(GaussianRow {
                        series_id: id.clone(),
                        h: h + 1,
                        mean,
                        variance,
                    })?;
                }
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn read_forecasts(&self, task: &str, model: &str, seed: u64, grid: &QuantileGrid) -> Result<ForecastSet> {
        let dir = self.forecast_dir(task);
        let stem = file_stem(model, seed);
        let k = grid.len();
        let mut flat: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for row in csv::Reader::from_path(dir.join(format!("{stem}.csv")))?.deserialize::<QuantileRow>() {
            let row = row?;
            let v = flat.entry(row.series_id).or_default();
            let expect_q = grid.probs()[v.len() % k];
            if row.h != v.len() / k + 1 || row.q != expect_q {
                return Err(Error::Invalid(format!("forecast file {stem} is out of order")));
            }
            v.push(row.value);
        }
        let mut gauss: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        let gpath = dir.join(format!("{stem}.gaussian.csv"));
        if gpath.exists() {
            for row in csv::Reader::from_path(gpath)?.deserialize::<GaussianRow>() {
                let row = row?;
                let e = gauss.entry(row.series_id).or_default();
                e.0.push(row.mean);
                e.1.push(row.variance);
            }
        }
        flat.into_iter()
            .map(|(id, values)| {
                if values.len() % k != 0 {
                    return Err(Error::Shape(format!("series `{id}` has a partial forecast row")));
                }
                let quantiles = QuantileForecast::from_flat(values.len() / k, k, values)?;
                let gaussian = gauss
                    .remove(&id)
                    .map(|(m, v)| GaussianForecast::new(m, v))
                    .transpose()?;
                Ok((id, SeriesForecast { quantiles, gaussian }))
            })
            .collect()
    }

    pub fn write_scores(&self, table: &ScoreTable) -> Result<()> {
        let mut w = csv::Writer::from_path(self.root.join("scores.csv"))?;
        for r in &table.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let json = Versioned {
            schema_version: SCHEMA_VERSION,
            body: table.clone(),
        };
        fs::write(self.root.join("scores.json"), serde_json::to_vec_pretty(&json)?)?;
        Ok(())
    }

    pub fn read_scores(&self) -> Result<ScoreTable> {
        let raw = fs::read(self.root.join("scores.json"))?;
        let v: Versioned<ScoreTable> = serde_json::from_slice(&raw)?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "score schema {} is not supported",
                v.schema_version
            )));
        }
        Ok(v.body)
    }

    /// Reads the CSV copy of the score table.
    pub fn read_scores_csv(&self) -> Result<ScoreTable> {
        let mut table = ScoreTable::default();
        for r in csv::Reader::from_path(self.root.join("scores.csv"))?.deserialize::<ScoreRow>() {
            table.push(r?)?;
        }
        Ok(table)
    }

    pub fn write_summary(&self, rows: &[AggregateRow]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.root.join("summary.csv"))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let json = serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows });
        fs::write(self.root.join("summary.json"), serde_json::to_vec_pretty(&json)?)?;
        Ok(())
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<()> {
        fs::write(self.root.join("manifest.json"), serde_json::to_vec_pretty(m)?)?;
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        let m: Manifest = serde_json::from_slice(&fs::read(self.root.join("manifest.json"))?)?;
        m.verify()?;
        Ok(m)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        fs::write(self.root.join(name), serde_json::to_vec_pretty(value)?)?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.root.join(name), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metric;
    use crate::types::{gaussian_to_quantiles, FrequencyKind};

    #[test]
    fn forecasts_roundtrip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::create(dir.path()).unwrap();
        let grid = QuantileGrid::percentiles();
        let g = GaussianForecast::new(vec![0.1, 1.0 / 3.0], vec![2.0f64.sqrt(), 1e-300]).unwrap();
        let mut set = ForecastSet::new();
        set.insert(
            "s1".into(),
            SeriesForecast {
                quantiles: gaussian_to_quantiles(&g, &grid),
                gaussian: Some(g),
            },
        );
        let q = QuantileForecast::from_flat(1, 99, (0..99).map(|i| i as f64 * 0.1).collect()).unwrap();
        set.insert(
            "s0".into(),
            SeriesForecast {
                quantiles: q,
                gaussian: None,
            },
        );
        store.write_forecasts("T", "ETS", 0, &grid, &set).unwrap();
        assert_eq!(store.read_forecasts("T", "ETS", 0, &grid).unwrap(), set);
    }

    #[test]
    fn scores_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::create(dir.path()).unwrap();
        let mut t = ScoreTable::default();
        t.push(ScoreRow {
            dataset: "M3-Yearly".into(),
            frequency: FrequencyKind::Yearly,
            model: "SiCoUM".into(),
            metric: Metric::SCrps,
            value: 0.1 + 0.2,
            n_obs: 3870,
            seed: 0,
        })
        .unwrap();
        store.write_scores(&t).unwrap();
        assert_eq!(store.read_scores().unwrap(), t);
        assert_eq!(store.read_scores_csv().unwrap(), t);

        let m = Manifest::new("stats", serde_json::json!({"b": 1, "a": [1, 2]})).unwrap();
        store.write_manifest(&m).unwrap();
        assert_eq!(store.read_manifest().unwrap(), m);
        let mut tampered = m.clone();
        tampered.config["b"] = serde_json::json!(2);
        assert!(tampered.verify().is_err());
    }
}
