//! Dataset files: UTF-8 CSV with header `series_id,timestamp,value`.
//!
//! Timestamps are plain integers (ordinal periods) or ISO dates/datetimes,
//! which are mapped to ordinal periods of the task frequency. Within one id
//! timestamps must increase strictly in file order; ids may interleave.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use log::warn;
use serde::Serialize;

use super::registry::TaskSpec;
use crate::error::{Error, Result};
use crate::types::{Dataset, FrequencyKind, TimeSeries};

/// What ingestion kept and dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub ingested: usize,
    /// Ids of series with at most `H` values.
    pub excluded_short: Vec<String>,
}

fn ordinal(ts: &str, kind: FrequencyKind) -> Option<i64> {
    if let Ok(i) = ts.parse::<i64>() {
        return Some(i);
    }
    let dt = NaiveDateTime::parse_from_str(ts, "%Y-%m-%d %H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S"))
        .ok()
        .or_else(|| {
            NaiveDate::parse_from_str(ts, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })?;
    let (y, mo) = (i64::from(dt.year()), i64::from(dt.month0()));
    let secs = dt.and_utc().timestamp();
    Some(match kind {
        FrequencyKind::Yearly => y,
        FrequencyKind::Quarterly | FrequencyKind::Other => y * 4 + mo / 3,
        FrequencyKind::Monthly => y * 12 + mo,
        FrequencyKind::Weekly => secs.div_euclid(7 * 86_400),
        FrequencyKind::Daily => secs.div_euclid(86_400),
        FrequencyKind::Hourly => secs.div_euclid(3_600),
    })
}

#[derive(serde::Deserialize)]
struct Row {
    series_id: String,
    timestamp: String,
    value: String,
}

/// Parses a dataset from any reader. Series with `H` or fewer values are
/// dropped with a warning and listed in the report.
pub fn read_dataset<R: Read>(input: R, task: &TaskSpec) -> Result<(Dataset, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["series_id", "timestamp", "value"] {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header must be `series_id,timestamp,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut series: BTreeMap<String, (i64, Vec<f64>)> = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let parse = |msg: String| Error::Parse { line, msg };
        let row = rec.map_err(|e| parse(e.to_string()))?;
        if row.series_id.is_empty() {
            return Err(parse("empty series_id".into()));
        }
        let t = ordinal(&row.timestamp, task.frequency)
            .ok_or_else(|| parse(format!("bad timestamp `{}`", row.timestamp)))?;
        let v: f64 = row
            .value
            .parse()
            .map_err(|_| parse(format!("bad value `{}`", row.value)))?;
        if !v.is_finite() {
            return Err(parse(format!("non-finite value `{}`", row.value)));
        }
        match series.get_mut(&row.series_id) {
            None => {
                series.insert(row.series_id, (t, vec![v]));
            }
            Some((start, values)) => {
                let last = *start + values.len() as i64 - 1;
                if t == last {
                    return Err(parse(format!(
                        "duplicate timestamp {} for `{}`",
                        row.timestamp, row.series_id
                    )));
                }
                if t < last {
                    return Err(Error::Order(format!(
                        "line {line}: timestamp {} of `{}` is not after the previous one",
                        row.timestamp, row.series_id
                    )));
                }
                values.push(v);
            }
        }
    }
    let mut report = IngestReport {
        ingested: series.len(),
        ..IngestReport::default()
    };
    let mut kept = Vec::with_capacity(series.len());
    for (id, (start, values)) in series {
        if values.len() <= task.horizon {
            warn!(
                "{}: series `{id}` has {} values, needs more than {}; excluded",
                task.dataset,
                values.len(),
                task.horizon
            );
            report.excluded_short.push(id);
            continue;
        }
        kept.push(TimeSeries::new(id, task.frequency(), start, values)?);
    }
    Ok((
        Dataset::new(&task.dataset, task.frequency(), task.horizon, kept)?,
        report,
    ))
}

pub fn load_dataset(path: &Path, task: &TaskSpec) -> Result<(Dataset, IngestReport)> {
    let f = std::fs::File::open(path).map_err(|e| Error::Invalid(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(std::io::BufReader::new(f), task)
}

/// Renders a dataset in the ingest format with integer timestamps.
pub fn write_dataset<W: std::io::Write>(out: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series_id", "timestamp", "value"])?;
    for s in &dataset.series {
        for (i, v) in s.values().iter().enumerate() {
            w.write_record([s.id.clone(), (s.start_index + i as i64).to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
