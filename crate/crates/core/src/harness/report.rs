//! Text tables in the disaggregated layout: one row per dataset, one column
//! per model, seed spread on the line beneath, best score starred.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::error::Result;
use crate::metrics::{aggregate, reduce_seeds, AggregateMode, AggregateRow, Metric, ScoreTable, SeedSummary};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub text: String,
    pub summaries: Vec<AggregateRow>,
}

fn cell(s: Option<&SeedSummary>, best: bool) -> String {
    match s {
        Some(s) => format!("{:.3}{}", s.mean, if best { "*" } else { "" }),
        None => "-".into(),
    }
}

fn metric_table(out: &mut String, metric: Metric, summaries: &[SeedSummary], models: &[String]) {
    let mut rows: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(&str, &str), &SeedSummary> = BTreeMap::new();
    for s in summaries.iter().filter(|s| s.metric == metric) {
        if !rows.contains(&s.dataset.as_str()) {
            rows.push(&s.dataset);
        }
        cells.insert((&s.dataset, &s.model), s);
    }
    if rows.is_empty() {
        return;
    }
    let width = models.iter().map(String::len).max().unwrap_or(0).max(9) + 2;
    let first = rows.iter().map(|r| r.len()).max().unwrap_or(0).max(7) + 2;
    let _ = write!(out, "{:<first$}", metric.to_string());
    for m in models {
        let _ = write!(out, "{m:>width$}");
    }
    out.push('\n');
    for ds in rows {
        let best = models
            .iter()
            .filter_map(|m| cells.get(&(ds, m.as_str())).map(|s| s.mean))
            .fold(f64::INFINITY, f64::min);
        let _ = write!(out, "{ds:<first$}");
        for m in models {
            let s = cells.get(&(ds, m.as_str())).copied();
            let _ = write!(out, "{:>width$}", cell(s, s.is_some_and(|s| s.mean == best)));
        }
        out.push('\n');
        // Deterministic models have no spread; skip the line when none do.
        if models
            .iter()
            .any(|m| cells.get(&(ds, m.as_str())).is_some_and(|s| s.std.is_some()))
        {
            let _ = write!(out, "{:<first$}", "");
            for m in models {
                let std = cells.get(&(ds, m.as_str())).and_then(|s| s.std);
                let text = std.map_or(String::new(), |v| format!("±{v:.3}"));
                let _ = write!(out, "{text:>width$}");
            }
            out.push('\n');
        }
    }
    out.push('\n');
}

/// Renders per-dataset tables for each metric followed by the summaries in
/// every requested mode.
pub fn report(table: &ScoreTable, modes: &[AggregateMode]) -> Result<Report> {
    let summaries = reduce_seeds(table);
    let models = table.models();
    let mut text = String::new();
    for metric in [Metric::SCrps, Metric::Mase] {
        metric_table(&mut text, metric, &summaries, &models);
    }
    let mut agg = Vec::new();
    for &mode in modes {
        let rows = aggregate(table, mode)?;
        let _ = writeln!(text, "{mode:?} average");
        for r in &rows {
            let _ = writeln!(
                text,
                "  {:<16} {:<6} {:.4}  ({} datasets, {} obs)",
                r.model,
                r.metric.to_string(),
                r.value,
                r.n_datasets,
                r.n_obs
            );
        }
        agg.extend(rows);
    }
    Ok(Report { text, summaries: agg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ScoreRow;
    use crate::types::FrequencyKind;

    fn row(ds: &str, model: &str, metric: Metric, value: f64, n_obs: usize, seed: u64) -> ScoreRow {
        ScoreRow {
            dataset: ds.into(),
            frequency: FrequencyKind::Monthly,
            model: model.into(),
            metric,
            value,
            n_obs,
            seed,
        }
    }

    #[test]
    fn single_cell() {
        let t = ScoreTable {
            rows: vec![row("A", "ETS", Metric::SCrps, 0.25, 10, 0)],
        };
        let r = report(&t, &[]).unwrap();
        assert_eq!(r.text.lines().count(), 3);
        assert!(r.text.contains("0.250*"));
        assert!(!r.text.contains('±'));
    }

    #[test]
    fn weighted_differs_and_std_shown_for_seeds() {
        let t = ScoreTable {
            rows: vec![
                row("A", "ETS", Metric::SCrps, 0.1, 100, 0),
                row("B", "ETS", Metric::SCrps, 0.4, 300, 0),
                row("A", "NBEATS", Metric::SCrps, 0.2, 100, 1),
                row("A", "NBEATS", Metric::SCrps, 0.3, 100, 2),
            ],
        };
        let r = report(&t, &[AggregateMode::Uniform, AggregateMode::Weighted]).unwrap();
        assert!(r.text.contains('±'));
        let ets: Vec<f64> = r
            .summaries
            .iter()
            .filter(|a| a.model == "ETS")
            .map(|a| a.value)
            .collect();
        assert!((ets[0] - 0.25).abs() < 1e-12);
        assert!((ets[1] - 0.325).abs() < 1e-12);
        assert!(r.text.contains("0.100*"));
    }
}
