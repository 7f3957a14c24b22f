//! Argument types shared by several subcommands.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use cftl_core::harness::{task, TaskSpec};
use cftl_core::FrequencyKind;

/// `TASK=PATH`, where `TASK` is a registry name or `name:frequency:H:m`.
#[derive(Debug, Clone)]
pub struct TaskInput {
    pub task: TaskSpec,
    pub path: PathBuf,
}

impl FromStr for TaskInput {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (key, path) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("expected TASK=PATH, got `{s}`"))?;
        Ok(Self {
            task: parse_task(key)?,
            path: PathBuf::from(path),
        })
    }
}

pub fn parse_task(key: &str) -> anyhow::Result<TaskSpec> {
    let parts: Vec<&str> = key.split(':').collect();
    match parts.as_slice() {
        [name] => Ok(task(name)?),
        [name, freq, h, m] => Ok(TaskSpec::custom(
            *name,
            freq.parse()?,
            h.parse().context("horizon")?,
            m.parse().context("seasonality")?,
        )?),
        _ => bail!("task `{key}` is neither a registry name nor name:frequency:H:m"),
    }
}

/// `FREQUENCY=PATH` for a pre-training corpus file.
#[derive(Debug, Clone)]
pub struct CorpusInput {
    pub frequency: FrequencyKind,
    pub path: PathBuf,
}

impl FromStr for CorpusInput {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (freq, path) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("expected FREQUENCY=PATH, got `{s}`"))?;
        Ok(Self {
            frequency: freq.parse()?,
            path: PathBuf::from(path),
        })
    }
}

/// Comma-separated seeds, with `a..b` ranges (inclusive).
pub fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
                if a > b {
                    bail!("empty seed range `{part}`");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse()?),
        }
    }
    if out.is_empty() {
        bail!("no seeds given");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("1..3,7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3..1").is_err());
    }

    #[test]
    fn tasks() {
        let t: TaskInput = "M3-Yearly=data/y.csv".parse().unwrap();
        assert_eq!((t.task.horizon, t.task.seasonality), (6, 1));
        let c: TaskInput = "holdout:monthly:12:12=h.csv".parse().unwrap();
        assert_eq!(c.task.dataset, "holdout");
        assert!("M3-Yearly".parse::<TaskInput>().is_err());
        assert!("a:b=x".parse::<TaskInput>().is_err());
    }
}
