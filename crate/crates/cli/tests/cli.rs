use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cftl-bench"))
        .args(args)
        .env("CFTL_BENCH_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn synth(out: &Path, seed: &str) -> String {
    let o = bench(&[
        "synth",
        "--out",
        out.to_str().unwrap(),
        "--seeds",
        seed,
        "--n-series",
        "12",
        "--min-length",
        "40",
        "--max-length",
        "60",
        "--nonneg",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out.join(format!("synthetic-monthly-seed{seed}.csv"))
        .display()
        .to_string()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&bench(&["--help"])), 0);
    assert_eq!(code(&bench(&[])), 2);
    assert_eq!(code(&bench(&["stats", "--bogus"])), 2);
    assert_eq!(code(&bench(&["stats", "--input", "nonsense"])), 2);
}

#[test]
fn missing_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&[
        "validate-data",
        "--input",
        &format!("M3-Yearly={}", dir.path().join("absent.csv").display()),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synth_stats_report_flow() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(&dir.path().join("corpus"), "4");
    let runs = dir.path().join("run");
    let input = format!("syn:monthly:6:12={data}");

    let o = bench(&["validate-data", "--input", &input]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("12 series ingested"), "{}", stdout(&o));

    let o = bench(&[
        "stats",
        "--input",
        &input,
        "--models",
        "SeasonalNaive,ETS",
        "--grid",
        "0.1,0.5,0.9",
        "--out",
        runs.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "scores.csv",
        "scores.json",
        "summary.csv",
        "manifest.json",
        "report.txt",
    ] {
        assert!(runs.join(f).exists(), "{f} missing");
    }
    assert!(runs.join("forecasts/syn/ETS-seed0.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(runs.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "stats");
    assert!(manifest["finished_at"].is_string());

    let o = bench(&["report", "--out", runs.to_str().unwrap(), "--modes", "uniform"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("ETS") && text.contains("SeasonalNaive"), "{text}");
}

#[test]
fn zero_shot_with_leaked_corpus_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(&dir.path().join("corpus"), "5");
    let o = bench(&[
        "zeroshot",
        "--input",
        &format!("syn:monthly:6:12={data}"),
        "--corpus",
        &format!("monthly={data}"),
        "--grid",
        "0.1,0.5,0.9",
        "--steps",
        "10",
        "--hidden",
        "8",
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_shot_tiny_run_and_checkpoint_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(&dir.path().join("corpus"), "6");
    let target = synth(&dir.path().join("target"), "7");
    let run = dir.path().join("run");
    let input = format!("syn:monthly:6:12={target}");
    let common = [
        "--grid",
        "0.1,0.5,0.9",
        "--steps",
        "20",
        "--hidden",
        "8",
        "--input-size",
        "12",
        "--horizon",
        "6",
    ];
    let mut args = vec!["zeroshot", "--input", &input];
    let c = format!("monthly={corpus}");
    args.extend(["--corpus", &c, "--out", run.to_str().unwrap()]);
    args.extend(common);
    let o = bench(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = run.join("model-seed1.ckpt");
    assert!(ckpt.exists());

    let again = dir.path().join("again");
    let o = bench(&[
        "zeroshot",
        "--input",
        &input,
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read_to_string(run.join("forecasts/syn/NBEATS-seed1.csv")).unwrap();
    let b = std::fs::read_to_string(again.join("forecasts/syn/NBEATS-seed1.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"gird": "0.5"}"#).unwrap();
    let o = bench(&["report", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}
