//! `cftl-bench`: synthetic corpora, statistical baselines, pre-training,
//! zero-shot evaluation, ablation and reporting.
//!
//! Exit codes: 0 success, 2 input error, 3 leakage abort, 4 numerical failure.

mod args;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use args::{parse_seeds, CorpusInput, TaskInput};
use cftl_core::harness::{
    self, load_dataset, registry, report, run_ablation, run_cftl, run_statistical, worker_count, CftlConfig, Manifest,
    ResultStore, TaskData, TaskSpec,
};
use cftl_core::metrics::{AggregateMode, ScoreTable};
use cftl_core::neural::{load_checkpoint, save_checkpoint, zero_shot_predict, NBeatsConfig, TrainConfig};
use cftl_core::statmodels::ForecasterSpec;
use cftl_core::synthgen::{generate_corpus, SynthConfig};
use cftl_core::{Dataset, FrequencyKind, QuantileGrid};

#[derive(Parser, Debug)]
#[command(name = "cftl-bench", version, about = "Cross-frequency transfer learning benchmark")]
struct Cli {
    /// Quantile grid: a level count (99 → percentiles) or comma-separated levels.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Seeds, e.g. `1..5` or `1,3,7`.
    #[arg(long, global = true)]
    seeds: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for series-level work (capped by CFTL_BENCH_THREADS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON file supplying defaults for any of the options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus, one CSV per frequency.
    Synth(SynthArgs),
    /// Fit and score statistical forecasters.
    Stats(StatsArgs),
    /// Pre-train the network once per seed and save checkpoints.
    Pretrain(PretrainArgs),
    /// Zero-shot forecasts from checkpoints, or pre-train then forecast.
    Zeroshot(ZeroshotArgs),
    /// Compare a base and an augmented pre-training corpus.
    Ablate(AblateArgs),
    /// Render tables and summaries from a stored score table.
    Report(ReportArgs),
    /// Check dataset files against the ingest rules and the task registry.
    ValidateData(ValidateArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_delimiter = ',', default_value = "monthly")]
    frequencies: Vec<FrequencyKind>,
    /// Series per frequency.
    #[arg(long, default_value_t = 1000)]
    n_series: usize,
    #[arg(long, default_value_t = 48)]
    min_length: usize,
    #[arg(long, default_value_t = 240)]
    max_length: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Shift each series so its minimum is non-negative.
    #[arg(long)]
    nonneg: bool,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// `TASK=PATH`; TASK is a registry name or `name:frequency:H:m`.
    #[arg(long = "input", required = false)]
    inputs: Vec<TaskInput>,
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct NetArgs {
    #[arg(long)]
    input_size: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    stacks: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Network output horizon; must cover every target task.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    decay_steps: Option<Vec<usize>>,
    /// Start from the full-size topology and schedule instead of desk scale.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args, Debug)]
struct PretrainArgs {
    /// `FREQUENCY=PATH` corpus file; repeat for each frequency.
    #[arg(long = "corpus")]
    corpora: Vec<CorpusInput>,
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args, Debug)]
struct ZeroshotArgs {
    #[arg(long = "input")]
    inputs: Vec<TaskInput>,
    /// Saved checkpoints; when absent the network is pre-trained on --corpus.
    #[arg(long = "checkpoint")]
    checkpoints: Vec<PathBuf>,
    /// Pre-training corpora, also used for the leakage check.
    #[arg(long = "corpus")]
    corpora: Vec<CorpusInput>,
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[arg(long = "input")]
    inputs: Vec<TaskInput>,
    #[arg(long = "base")]
    base: Vec<CorpusInput>,
    #[arg(long = "augmented")]
    augmented: Vec<CorpusInput>,
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long, value_delimiter = ',', default_value = "uniform,weighted")]
    modes: Vec<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long = "input")]
    inputs: Vec<TaskInput>,
}

/// Keys accepted by `--config`; command-line flags take precedence.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    grid: Option<String>,
    seeds: Option<Vec<u64>>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    models: Option<Vec<String>>,
    /// `TASK=PATH` entries.
    inputs: Option<Vec<String>>,
    /// `FREQUENCY=PATH` entries.
    corpora: Option<Vec<String>>,
    network: Option<NBeatsConfig>,
    train: Option<TrainConfig>,
}

struct Ctx {
    grid: QuantileGrid,
    seeds: Vec<u64>,
    out: PathBuf,
    workers: usize,
    file: FileConfig,
}

impl Ctx {
    fn new(cli: &Cli) -> anyhow::Result<Self> {
        let file: FileConfig = match &cli.config {
            Some(p) => serde_json::from_slice(&std::fs::read(p).with_context(|| format!("reading {}", p.display()))?)
                .map_err(cftl_core::Error::from)?,
            None => FileConfig::default(),
        };
        let grid = match cli.grid.as_ref().or(file.grid.as_ref()) {
            Some(g) => g.parse()?,
            None => QuantileGrid::percentiles(),
        };
        let seeds = match &cli.seeds {
            Some(s) => parse_seeds(s)?,
            None => file.seeds.clone().unwrap_or_else(|| vec![1]),
        };
        Ok(Self {
            grid,
            seeds,
            out: cli
                .out
                .clone()
                .or(file.out.clone())
                .unwrap_or_else(|| PathBuf::from("runs/latest")),
            workers: worker_count(cli.workers.or(file.workers)),
            file,
        })
    }

    fn inputs(&self, given: &[TaskInput]) -> anyhow::Result<Vec<TaskInput>> {
        if !given.is_empty() {
            return Ok(given.to_vec());
        }
        let from_file: Vec<TaskInput> = self
            .file
            .inputs
            .iter()
            .flatten()
            .map(|s| s.parse())
            .collect::<anyhow::Result<_>>()?;
        if from_file.is_empty() {
            bail!(cftl_core::Error::Invalid("no --input TASK=PATH given".into()));
        }
        Ok(from_file)
    }

    fn corpora(&self, given: &[CorpusInput]) -> anyhow::Result<Vec<CorpusInput>> {
        if !given.is_empty() {
            return Ok(given.to_vec());
        }
        self.file.corpora.iter().flatten().map(|s| s.parse()).collect()
    }

    fn network(&self, net: &NetArgs) -> anyhow::Result<(NBeatsConfig, TrainConfig)> {
        let (mut n, mut t) = if net.full_scale {
            (NBeatsConfig::full_scale(), TrainConfig::full_scale())
        } else {
            (
                self.file.network.clone().unwrap_or_default(),
                self.file.train.clone().unwrap_or_default(),
            )
        };
        n.quantile_grid = self.grid.clone();
        let set = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut n.input_size, net.input_size);
        set(&mut n.hidden_size, net.hidden);
        set(&mut n.stacks, net.stacks);
        set(&mut n.blocks_per_stack, net.blocks);
        set(&mut n.mlp_layers, net.layers);
        set(&mut n.horizon, net.horizon);
        set(&mut t.batch_size, net.batch_size);
        if let Some(steps) = net.steps {
            t.max_steps = steps;
            if net.decay_steps.is_none() {
                // Keep the decay points at the same fractions of the run.
                t.decay_steps = vec![steps * 2 / 3, steps * 5 / 6];
                t.decay_steps.retain(|&s| s > 0);
                t.decay_steps.dedup();
            }
        }
        if let Some(d) = &net.decay_steps {
            t.decay_steps = d.clone();
        }
        if let Some(lr) = net.lr {
            t.initial_lr = lr;
        }
        n.validate()?;
        t.validate()?;
        Ok((n, t))
    }

    fn store(&self) -> anyhow::Result<ResultStore> {
        Ok(ResultStore::create(&self.out)?)
    }
}

fn load_tasks(inputs: &[TaskInput]) -> anyhow::Result<Vec<TaskData>> {
    inputs
        .iter()
        .map(|i| {
            let (dataset, ingest) = load_dataset(&i.path, &i.task)?;
            info!(
                "{}: {} series ({} too short)",
                i.task.dataset,
                dataset.len(),
                ingest.excluded_short.len()
            );
            Ok(TaskData {
                task: i.task.clone(),
                dataset,
                ingest,
            })
        })
        .collect()
}

fn load_corpora(inputs: &[CorpusInput]) -> anyhow::Result<Vec<Dataset>> {
    if inputs.is_empty() {
        bail!(cftl_core::Error::Invalid("no --corpus FREQUENCY=PATH given".into()));
    }
    inputs
        .iter()
        .map(|c| {
            let name = c
                .path
                .file_stem()
                .map_or("corpus".into(), |s| s.to_string_lossy().into_owned());
            let spec = TaskSpec::custom(name, c.frequency, 1, c.frequency.seasonal_period())?;
            Ok(load_dataset(&c.path, &spec)?.0)
        })
        .collect()
}

fn finish(
    store: &ResultStore,
    mut manifest: Manifest,
    table: &ScoreTable,
    grid_modes: &[AggregateMode],
) -> anyhow::Result<()> {
    store.write_scores(table)?;
    let r = report(table, grid_modes)?;
    store.write_summary(&r.summaries)?;
    store.write_text("report.txt", &r.text)?;
    print!("{}", r.text);
    manifest.finish();
    store.write_manifest(&manifest)?;
    Ok(())
}

const DEFAULT_MODES: [AggregateMode; 2] = [AggregateMode::Uniform, AggregateMode::Weighted];

fn synth(ctx: &Ctx, a: &SynthArgs) -> anyhow::Result<()> {
    let store = ctx.store()?;
    let seed = ctx.seeds[0];
    let mut configs = Vec::new();
    for &frequency in &a.frequencies {
        let cfg = SynthConfig {
            length_range: [a.min_length, a.max_length],
            noise_sigma: a.noise,
            nonneg_shift: a.nonneg,
            ..SynthConfig::new(a.n_series, frequency, seed)
        };
        let d = generate_corpus(&cfg)?;
        let path = store.root().join(format!("synthetic-{frequency}-seed{seed}.csv"));
        harness::write_dataset(std::fs::File::create(&path)?, &d)?;
        println!("{}: {} series", path.display(), d.len());
        configs.push(cfg);
    }
    let mut m = Manifest::new("synth", serde_json::to_value(&configs)?)?;
    m.finish();
    store.write_manifest(&m)?;
    Ok(())
}

fn stats(ctx: &Ctx, a: &StatsArgs) -> anyhow::Result<()> {
    let models = if a.models.is_empty() {
        ctx.file.models.clone().unwrap_or_else(|| vec!["SiCoUM".into()])
    } else {
        a.models.clone()
    };
    let specs: Vec<ForecasterSpec> = models.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
    let inputs = ctx.inputs(&a.inputs)?;
    let store = ctx.store()?;
    let manifest = Manifest::new(
        "stats",
        serde_json::json!({
            "inputs": inputs.iter().map(|i| (&i.task, i.path.display().to_string())).collect::<Vec<_>>(),
            "models": specs,
            "grid": ctx.grid,
        }),
    )?;
    let mut table = ScoreTable::default();
    let mut accounting = Vec::new();
    for data in load_tasks(&inputs)? {
        let started = std::time::Instant::now();
        let out = run_statistical(&data, &specs, &ctx.grid, ctx.workers)?;
        info!("{} done in {:.1?}", data.task.dataset, started.elapsed());
        for (model, set) in &out.forecasts {
            store.write_forecasts(&data.task.dataset, model, 0, &ctx.grid, set)?;
        }
        table.extend(out.table)?;
        accounting.extend(out.accounting);
    }
    store.write_json("accounting.json", &accounting)?;
    finish(&store, manifest, &table, &DEFAULT_MODES)
}

fn pretrain_cmd(ctx: &Ctx, a: &PretrainArgs) -> anyhow::Result<()> {
    let (net, train) = ctx.network(&a.net)?;
    let corpora = load_corpora(&ctx.corpora(&a.corpora)?)?;
    let store = ctx.store()?;
    let manifest = Manifest::new(
        "pretrain",
        serde_json::json!({ "network": net, "train": train, "seeds": ctx.seeds,
            "corpora": corpora.iter().map(|d| (&d.name, d.len())).collect::<Vec<_>>() }),
    )?;
    for &seed in &ctx.seeds {
        let t = TrainConfig { seed, ..train.clone() };
        let model = cftl_core::neural::pretrain(&corpora, &net, &t)?;
        let path = store.root().join(format!("model-seed{seed}.ckpt"));
        save_checkpoint(
            &path,
            &model.params,
            serde_json::json!({ "seed": seed, "train": t, "best_step": model.log.best_step }),
        )?;
        store.write_json(&format!("train-log-seed{seed}.json"), &model.log)?;
        println!(
            "seed {seed}: best validation {:?} at step {} -> {}",
            model.log.best_validation_loss,
            model.log.best_step,
            path.display()
        );
    }
    let mut manifest = manifest;
    manifest.finish();
    store.write_manifest(&manifest)?;
    Ok(())
}

fn zeroshot(ctx: &Ctx, a: &ZeroshotArgs) -> anyhow::Result<()> {
    let targets = load_tasks(&ctx.inputs(&a.inputs)?)?;
    let corpus_inputs = ctx.corpora(&a.corpora)?;
    let corpora = if corpus_inputs.is_empty() {
        Vec::new()
    } else {
        load_corpora(&corpus_inputs)?
    };
    let store = ctx.store()?;
    let mut table = ScoreTable::default();
    if a.checkpoints.is_empty() {
        let (net, train) = ctx.network(&a.net)?;
        let cfg = CftlConfig::new(net, train, ctx.seeds.clone());
        let manifest = Manifest::new("zeroshot", serde_json::to_value(&cfg)?)?;
        let out = run_cftl(&corpora, &targets, &cfg)?;
        for ((task, seed), set) in &out.forecasts {
            store.write_forecasts(task, &cfg.label, *seed, &ctx.grid, set)?;
        }
        for (seed, log) in &out.logs {
            store.write_json(&format!("train-log-seed{seed}.json"), log)?;
        }
        for (seed, p) in &out.params {
            save_checkpoint(
                &store.root().join(format!("model-seed{seed}.ckpt")),
                p,
                serde_json::json!({ "seed": seed }),
            )?;
        }
        store.write_json("accounting.json", &out.accounting)?;
        return finish(&store, manifest, &out.table, &DEFAULT_MODES);
    }
    harness::check_leakage(&corpora, &targets)?;
    let manifest = Manifest::new(
        "zeroshot",
        serde_json::json!({ "checkpoints": a.checkpoints.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }),
    )?;
    for (i, path) in a.checkpoints.iter().enumerate() {
        let (params, meta) = load_checkpoint(path)?;
        let seed = meta.get("seed").and_then(|s| s.as_u64()).unwrap_or(i as u64);
        let grid = &params.config().quantile_grid;
        for t in &targets {
            let hold = harness::holdout(t)?;
            let trains = Dataset::new(
                &t.task.dataset,
                t.dataset.frequency,
                t.task.horizon,
                hold.trains.values().cloned().collect(),
            )?;
            let mut set = harness::ForecastSet::new();
            for (id, fc) in zero_shot_predict(&params, &trains)? {
                set.insert(
                    id,
                    harness::SeriesForecast {
                        quantiles: fc?,
                        gaussian: None,
                    },
                );
            }
            store.write_forecasts(&t.task.dataset, "NBEATS", seed, grid, &set)?;
            for row in harness::score_forecasts(&t.task, &hold, &set, grid, "NBEATS", seed)? {
                table.push(row)?;
            }
        }
    }
    finish(&store, manifest, &table, &DEFAULT_MODES)
}

fn ablate(ctx: &Ctx, a: &AblateArgs) -> anyhow::Result<()> {
    let targets = load_tasks(&ctx.inputs(&a.inputs)?)?;
    let base = load_corpora(&a.base)?;
    let augmented = load_corpora(&a.augmented)?;
    let (net, train) = ctx.network(&a.net)?;
    let cfg = CftlConfig::new(net, train, ctx.seeds.clone());
    let store = ctx.store()?;
    let manifest = Manifest::new("ablate", serde_json::to_value(&cfg)?)?;
    let out = run_ablation(&base, &augmented, &targets, &cfg)?;
    let mut table = out.base.table.clone();
    table.extend(out.augmented.table.clone())?;
    store.write_json("ablation.json", &out.rows)?;
    let text: String = out.rows.iter().map(|r| r.sentence() + "\n").collect();
    store.write_text("ablation.txt", &text)?;
    print!("{text}");
    finish(&store, manifest, &table, &DEFAULT_MODES)
}

fn report_cmd(ctx: &Ctx, a: &ReportArgs) -> anyhow::Result<()> {
    let store = ResultStore::open(&ctx.out)?;
    let modes: Vec<AggregateMode> = a
        .modes
        .iter()
        .map(|m| match m.as_str() {
            "uniform" => Ok(AggregateMode::Uniform),
            "weighted" => Ok(AggregateMode::Weighted),
            _ => Err(cftl_core::Error::Invalid(format!("unknown mode `{m}`"))),
        })
        .collect::<Result<_, _>>()?;
    let table = store.read_scores()?;
    let r = report(&table, &modes)?;
    store.write_summary(&r.summaries)?;
    store.write_text("report.txt", &r.text)?;
    print!("{}", r.text);
    Ok(())
}

fn validate(ctx: &Ctx, a: &ValidateArgs) -> anyhow::Result<()> {
    let inputs = ctx.inputs(&a.inputs)?;
    for i in &inputs {
        let (d, rep) = load_dataset(&i.path, &i.task)?;
        let expected = registry()
            .iter()
            .any(|t| t.dataset == i.task.dataset)
            .then(|| harness::registry::expected_series(&i.task.dataset))
            .flatten();
        let note = match expected {
            Some(n) if n == rep.ingested => format!(" (matches the published count {n})"),
            Some(n) => format!(" (published count is {n})"),
            None => String::new(),
        };
        println!(
            "{}: {} series ingested{note}, {} kept, {} shorter than H+1={}",
            i.task.dataset,
            rep.ingested,
            d.len(),
            rep.excluded_short.len(),
            i.task.horizon + 1
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let ctx = Ctx::new(cli)?;
    match &cli.command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Pretrain(a) => pretrain_cmd(&ctx, a),
        Command::Zeroshot(a) => zeroshot(&ctx, a),
        Command::Ablate(a) => ablate(&ctx, a),
        Command::Report(a) => report_cmd(&ctx, a),
        Command::ValidateData(a) => validate(&ctx, a),
    }
}

/// 2 unless a benchmark error in the chain says otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<cftl_core::Error>())
        .map_or(2, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
