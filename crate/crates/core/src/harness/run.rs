//! Run orchestration: statistical baselines, CFTL pre-train + zero-shot, and
//! the with/without-synthetic ablation.

use std::collections::{BTreeMap, BTreeSet};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ingest::IngestReport;
use super::registry::TaskSpec;
use super::store::{ForecastSet, SeriesForecast};
use crate::ensemble::{sicoum_combine, EnsembleInput, SICOUM_MEMBERS};
use crate::error::{Error, Result};
use crate::metrics::{crps_sums, mase, MaseScaling, Metric, ScoreRow, ScoreTable};
use crate::neural::{pretrain, zero_shot_predict, NBeatsConfig, TrainConfig, TrainLog};
use crate::statmodels::{self, ForecasterKind, ForecasterSpec};
use crate::types::{
    gaussian_to_quantiles, split_train_test, Dataset, GaussianForecast, QuantileGrid, SplitSpec, TimeSeries,
};

/// An evaluation task with its ingested series (training and test values).
#[derive(Debug, Clone)]
pub struct TaskData {
    pub task: TaskSpec,
    pub dataset: Dataset,
    pub ingest: IngestReport,
}

impl TaskData {
    pub fn new(task: TaskSpec, dataset: Dataset) -> Self {
        let ingest = IngestReport {
            ingested: dataset.len(),
            excluded_short: Vec::new(),
        };
        Self { task, dataset, ingest }
    }
}

/// Training prefixes and test windows, keyed by series id.
#[derive(Debug, Clone, Default)]
pub struct Holdout {
    pub trains: BTreeMap<String, TimeSeries>,
    pub actuals: BTreeMap<String, Vec<f64>>,
}

pub fn holdout(data: &TaskData) -> Result<Holdout> {
    let spec = SplitSpec::new(data.task.horizon);
    let mut h = Holdout::default();
    for s in &data.dataset.series {
        let (train, test) = split_train_test(s, &spec)?;
        h.actuals.insert(s.id.clone(), test);
        h.trains.insert(s.id.clone(), train);
    }
    Ok(h)
}

/// Per (task, model) bookkeeping: `scored + failed + excluded_short = ingested`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub task: String,
    pub model: String,
    pub seed: u64,
    pub ingested: usize,
    pub excluded_short: usize,
    pub scored: usize,
    /// `(series id, reason)` for series with no usable forecast.
    pub failed: Vec<(String, String)>,
}

/// sCRPS and MASE rows for the series present in `set`.
pub fn score_forecasts(
    task: &TaskSpec,
    holdout: &Holdout,
    set: &ForecastSet,
    grid: &QuantileGrid,
    model: &str,
    seed: u64,
) -> Result<Vec<ScoreRow>> {
    let actuals: BTreeMap<String, Vec<f64>> = set
        .keys()
        .map(|id| {
            holdout
                .actuals
                .get(id)
                .map(|a| (id.clone(), a.clone()))
                .ok_or_else(|| Error::Shape(format!("forecast for unknown series `{id}`")))
        })
        .collect::<Result<_>>()?;
    if actuals.is_empty() {
        return Err(Error::Fit(format!(
            "{model} produced no forecasts for {}",
            task.dataset
        )));
    }
    let quantiles = set.iter().map(|(id, f)| (id.clone(), f.quantiles.clone())).collect();
    let points = set.iter().map(|(id, f)| (id.clone(), f.point(grid))).collect();
    let sums = crps_sums(&actuals, &quantiles, grid)?;
    let mase = mase(
        &actuals,
        &points,
        &holdout.trains,
        task.seasonality,
        MaseScaling::OutOfSample,
    )?;
    let row = |metric, value| ScoreRow {
        dataset: task.dataset.clone(),
        frequency: task.frequency,
        model: model.to_string(),
        metric,
        value,
        n_obs: sums.n_obs,
        seed,
    };
    Ok(vec![row(Metric::SCrps, sums.ratio()?), row(Metric::Mase, mase)])
}

/// Worker count: the request (or all cores), capped by `CFTL_BENCH_THREADS`.
pub fn worker_count(requested: Option<usize>) -> usize {
    let default = std::thread::available_parallelism().map_or(1, |n| n.get());
    let n = requested.unwrap_or(default).max(1);
    match std::env::var("CFTL_BENCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(cap) if cap > 0 => n.min(cap),
        _ => n,
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))
}

#[derive(Debug, Clone)]
pub struct StatOutcome {
    pub table: ScoreTable,
    /// Model name → per-series forecasts.
    pub forecasts: BTreeMap<String, ForecastSet>,
    pub accounting: Vec<Accounting>,
}

type FitResult = std::result::Result<GaussianForecast, String>;

/// Fits every requested model on one training series. Member fits are
/// shared between the individual models and SiCoUM.
fn fit_series(train: &TimeSeries, specs: &[ForecasterSpec], m: usize, h: usize) -> Vec<FitResult> {
    let mut cache: BTreeMap<(ForecasterKind, usize), FitResult> = BTreeMap::new();
    let mut single = |spec: &ForecasterSpec, m: usize| -> FitResult {
        let key = (spec.kind, spec.season_length(m));
        let compute = || {
            statmodels::fit(spec, train, m)
                .and_then(|f| f.forecast(h))
                .map_err(|e| e.to_string())
        };
        if !spec.options.keys().all(|k| k == "season_length") {
            return compute();
        }
        cache.entry(key).or_insert_with(compute).clone()
    };
    specs
        .iter()
        .map(|spec| match spec.kind {
            ForecasterKind::SiCoUM => {
                let m = spec.season_length(m);
                let mut members = Vec::new();
                let mut errors = Vec::new();
                for kind in SICOUM_MEMBERS {
                    match single(&ForecasterSpec::new(kind), m) {
                        Ok(f) => members.push((kind, f)),
                        Err(e) => errors.push(format!("{kind}: {e}")),
                    }
                }
                sicoum_combine(&EnsembleInput::new(members)).map_err(|e| format!("{e} ({})", errors.join("; ")))
            }
            _ => single(spec, m),
        })
        .collect()
}

/// Fits, forecasts and scores statistical models on one task.
pub fn run_statistical(
    data: &TaskData,
    specs: &[ForecasterSpec],
    grid: &QuantileGrid,
    workers: usize,
) -> Result<StatOutcome> {
    if let Some(s) = specs.iter().find(|s| s.kind == ForecasterKind::Neural) {
        return Err(Error::Invalid(format!("{} is not a statistical model", s.kind)));
    }
    let task = &data.task;
    let hold = holdout(data)?;
    let trains: Vec<&TimeSeries> = hold.trains.values().collect();
    let fits: Vec<Vec<FitResult>> = pool(workers)?.install(|| {
        trains
            .par_iter()
            .map(|t| fit_series(t, specs, task.seasonality, task.horizon))
            .collect()
    });

    let mut out = StatOutcome {
        table: ScoreTable::default(),
        forecasts: BTreeMap::new(),
        accounting: Vec::new(),
    };
    for (j, spec) in specs.iter().enumerate() {
        let model = spec.kind.name().to_string();
        let mut set = ForecastSet::new();
        let mut failed = Vec::new();
        for (train, per_model) in trains.iter().zip(&fits) {
            match &per_model[j] {
                Ok(g) => {
                    set.insert(
                        train.id.clone(),
                        SeriesForecast {
                            quantiles: gaussian_to_quantiles(g, grid),
                            gaussian: Some(g.clone()),
                        },
                    );
                }
                Err(e) => {
                    warn!("{}: {model} failed on `{}`: {e}", task.dataset, train.id);
                    failed.push((train.id.clone(), e.clone()));
                }
            }
        }
        info!(
            "{}: {model} scored {} of {} series",
            task.dataset,
            set.len(),
            trains.len()
        );
        out.accounting.push(Accounting {
            task: task.dataset.clone(),
            model: model.clone(),
            seed: 0,
            ingested: data.ingest.ingested,
            excluded_short: data.ingest.excluded_short.len(),
            scored: set.len(),
            failed,
        });
        if !set.is_empty() {
            for row in score_forecasts(task, &hold, &set, grid, &model, 0)? {
                out.table.push(row)?;
            }
        }
        out.forecasts.insert(model, set);
    }
    Ok(out)
}

fn value_hash(values: &[f64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().into()
}

/// Aborts when any target series (or its training prefix) shares an id or
/// exact values with a pre-training series.
pub fn check_leakage(corpora: &[Dataset], targets: &[TaskData]) -> Result<()> {
    let mut ids = BTreeSet::new();
    let mut hashes = BTreeMap::new();
    for s in corpora.iter().flat_map(|d| &d.series) {
        ids.insert(s.id.as_str());
        hashes.insert(value_hash(s.values()), s.id.as_str());
    }
    for t in targets {
        for s in &t.dataset.series {
            if ids.contains(s.id.as_str()) {
                return Err(Error::Leakage(format!(
                    "series `{}` of {} also appears in the pre-training corpus",
                    s.id, t.task.dataset
                )));
            }
            let n = s.len();
            let prefix = &s.values()[..n.saturating_sub(t.task.horizon).max(1)];
            for v in [s.values(), prefix] {
                if let Some(src) = hashes.get(&value_hash(v)) {
                    return Err(Error::Leakage(format!(
                        "series `{}` of {} duplicates pre-training series `{src}`",
                        s.id, t.task.dataset
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CftlConfig {
    pub network: NBeatsConfig,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    /// Model label written to score rows.
    pub label: String,
}

impl CftlConfig {
    pub fn new(network: NBeatsConfig, train: TrainConfig, seeds: Vec<u64>) -> Self {
        Self {
            network,
            train,
            seeds,
            label: ForecasterKind::Neural.name().to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CftlOutcome {
    pub table: ScoreTable,
    pub logs: Vec<(u64, TrainLog)>,
    /// `(task, seed)` → forecasts.
    pub forecasts: BTreeMap<(String, u64), ForecastSet>,
    pub accounting: Vec<Accounting>,
    /// Flat parameters of each seed's selected snapshot.
    pub params: Vec<(u64, crate::neural::ModelParams)>,
}

/// Pre-trains once per seed on `corpora` and scores zero-shot forecasts on
/// every target. The leakage guard runs before any training step.
pub fn run_cftl(corpora: &[Dataset], targets: &[TaskData], cfg: &CftlConfig) -> Result<CftlOutcome> {
    if cfg.seeds.is_empty() {
        return Err(Error::Invalid("at least one seed is required".into()));
    }
    check_leakage(corpora, targets)?;
    if let Some(t) = targets.iter().find(|t| t.task.horizon > cfg.network.horizon) {
        return Err(Error::Invalid(format!(
            "{} needs horizon {} but the network emits {}",
            t.task.dataset, t.task.horizon, cfg.network.horizon
        )));
    }
    let grid = &cfg.network.quantile_grid;
    let holdouts: Vec<Holdout> = targets.iter().map(holdout).collect::<Result<_>>()?;
    let mut out = CftlOutcome {
        table: ScoreTable::default(),
        logs: Vec::new(),
        forecasts: BTreeMap::new(),
        accounting: Vec::new(),
        params: Vec::new(),
    };
    for &seed in &cfg.seeds {
        let tcfg = TrainConfig {
            seed,
            ..cfg.train.clone()
        };
        info!("pre-training {} seed {seed}", cfg.label);
        let model = pretrain(corpora, &cfg.network, &tcfg)?;
        for (t, hold) in targets.iter().zip(&holdouts) {
            let trains = Dataset::new(
                &t.task.dataset,
                t.dataset.frequency,
                t.task.horizon,
                hold.trains.values().cloned().collect(),
            )?;
            let mut set = ForecastSet::new();
            let mut failed = Vec::new();
            for (id, fc) in zero_shot_predict(&model.params, &trains)? {
                match fc {
                    Ok(q) => {
                        set.insert(
                            id,
                            SeriesForecast {
                                quantiles: q,
                                gaussian: None,
                            },
                        );
                    }
                    Err(e) => failed.push((id, e.to_string())),
                }
            }
            out.accounting.push(Accounting {
                task: t.task.dataset.clone(),
                model: cfg.label.clone(),
                seed,
                ingested: t.ingest.ingested,
                excluded_short: t.ingest.excluded_short.len(),
                scored: set.len(),
                failed,
            });
            for row in score_forecasts(&t.task, hold, &set, grid, &cfg.label, seed)? {
                out.table.push(row)?;
            }
            out.forecasts.insert((t.task.dataset.clone(), seed), set);
        }
        out.logs.push((seed, model.log));
        out.params.push((seed, model.params));
    }
    Ok(out)
}

/// `(base − augmented) / base`: positive when augmentation lowers the error.
pub fn relative_change(base: f64, augmented: f64) -> Result<f64> {
    if base == 0.0 {
        return Err(Error::Denominator("base score is zero".into()));
    }
    Ok((base - augmented) / base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub task: String,
    pub metric: Metric,
    /// Seed-averaged scores of each arm.
    pub base: f64,
    pub augmented: f64,
    pub delta: f64,
    pub relative: f64,
}

impl AblationRow {
    pub fn new(task: &str, metric: Metric, base: f64, augmented: f64) -> Result<Self> {
        Ok(Self {
            task: task.to_string(),
            metric,
            base,
            augmented,
            delta: augmented - base,
            relative: relative_change(base, augmented)?,
        })
    }

    pub fn sentence(&self) -> String {
        let verb = if self.relative >= 0.0 { "gain" } else { "loss" };
        format!(
            "{} {}: from {:.3} to {:.3}, a {:.1}% {verb}",
            self.task,
            self.metric,
            self.base,
            self.augmented,
            100.0 * self.relative.abs()
        )
    }
}

#[derive(Debug, Clone)]
pub struct AblationOutcome {
    pub base: CftlOutcome,
    pub augmented: CftlOutcome,
    pub rows: Vec<AblationRow>,
}

/// Pairs seed-averaged scores of two score tables by (task, metric).
pub fn ablation_rows(base: &ScoreTable, augmented: &ScoreTable) -> Result<Vec<AblationRow>> {
    let mean = |t: &ScoreTable| {
        let mut m: BTreeMap<(String, Metric), Vec<f64>> = BTreeMap::new();
        for r in &t.rows {
            m.entry((r.dataset.clone(), r.metric)).or_default().push(r.value);
        }
        m.into_iter()
            .map(|(k, v)| (k, v.iter().sum::<f64>() / v.len() as f64))
            .collect::<BTreeMap<_, _>>()
    };
    let (b, a) = (mean(base), mean(augmented));
    b.iter()
        .map(|((task, metric), &bv)| {
            let av = a
                .get(&(task.clone(), *metric))
                .ok_or_else(|| Error::Shape(format!("augmented arm has no {metric} for {task}")))?;
            AblationRow::new(task, *metric, bv, *av)
        })
        .collect()
}

/// Runs the same CFTL configuration on both corpora.
pub fn run_ablation(
    base: &[Dataset],
    augmented: &[Dataset],
    targets: &[TaskData],
    cfg: &CftlConfig,
) -> Result<AblationOutcome> {
    check_leakage(base, targets)?;
    check_leakage(augmented, targets)?;
    let base_out = run_cftl(
        base,
        targets,
        &CftlConfig {
            label: format!("{}[base]", cfg.label),
            ..cfg.clone()
        },
    )?;
    let aug_out = run_cftl(
        augmented,
        targets,
        &CftlConfig {
            label: format!("{}[augmented]", cfg.label),
            ..cfg.clone()
        },
    )?;
    let rows = ablation_rows(&base_out.table, &aug_out.table)?;
    Ok(AblationOutcome {
        base: base_out,
        augmented: aug_out,
        rows,
    })
}
