//! SiCoUM: equal-weight Gaussian pooling of CES, Theta, ARIMA and ETS.
//!
//! μ̂ is the mean of the member means and σ̂² the mean of the member
//! variances, with no covariance terms. Members that failed to fit are
//! dropped and the average runs over the survivors.

use log::debug;

use crate::error::{Error, Result};
use crate::statmodels::{self, ForecasterKind, ForecasterSpec};
use crate::types::{gaussian_to_quantiles, GaussianForecast, QuantileForecast, QuantileGrid, TimeSeries};

/// The four pooled model families.
pub const SICOUM_MEMBERS: [ForecasterKind; 4] = [
    ForecasterKind::Ces,
    ForecasterKind::Theta,
    ForecasterKind::AutoArima,
    ForecasterKind::Ets,
];

#[derive(Debug, Clone)]
pub struct EnsembleInput {
    pub members: Vec<(ForecasterKind, GaussianForecast)>,
    pub requested: Vec<ForecasterKind>,
}

impl EnsembleInput {
    pub fn new(members: Vec<(ForecasterKind, GaussianForecast)>) -> Self {
        Self {
            members,
            requested: SICOUM_MEMBERS.to_vec(),
        }
    }

    pub fn kinds(&self) -> Vec<ForecasterKind> {
        self.members.iter().map(|(k, _)| *k).collect()
    }
}

/// Order-independent mean: values are sorted before summation, and the
/// result is clamped to the member range so rounding never leaves it.
fn pooled(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let (lo, hi) = (values[0], values[values.len() - 1]);
    if lo == hi {
        return lo;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    mean.clamp(lo, hi)
}

pub fn sicoum_combine(input: &EnsembleInput) -> Result<GaussianForecast> {
    let members: Vec<&GaussianForecast> = input
        .members
        .iter()
        .filter(|(k, _)| input.requested.contains(k))
        .map(|(_, f)| f)
        .collect();
    let first = members
        .first()
        .ok_or_else(|| Error::Ensemble("no ensemble members survived".into()))?;
    let h = first.horizon();
    if members.iter().any(|f| f.horizon() != h) {
        return Err(Error::Shape("ensemble members disagree on the horizon".into()));
    }
    if members.len() < input.requested.len() {
        debug!(
            "SiCoUM pooling {} of {} requested members",
            members.len(),
            input.requested.len()
        );
    }
    let mut buf = vec![0.0; members.len()];
    let mut mean = Vec::with_capacity(h);
    let mut var = Vec::with_capacity(h);
    for step in 0..h {
        for (b, f) in buf.iter_mut().zip(&members) {
            *b = f.mean()[step];
        }
        mean.push(pooled(&mut buf));
        for (b, f) in buf.iter_mut().zip(&members) {
            *b = f.variance()[step];
        }
        var.push(pooled(&mut buf));
    }
    GaussianForecast::new(mean, var)
}

pub fn sicoum_quantiles(input: &EnsembleInput, grid: &QuantileGrid) -> Result<QuantileForecast> {
    Ok(gaussian_to_quantiles(&sicoum_combine(input)?, grid))
}

/// Fits every SiCoUM member on `train`. Failed fits are returned alongside
/// the survivors rather than aborting.
pub fn fit_members(train: &TimeSeries, m: usize, horizon: usize) -> (EnsembleInput, Vec<(ForecasterKind, Error)>) {
    let mut members = Vec::new();
    let mut failed = Vec::new();
    for kind in SICOUM_MEMBERS {
        let res = statmodels::fit(&ForecasterSpec::new(kind), train, m).and_then(|f| f.forecast(horizon));
        match res {
            Ok(f) => members.push((kind, f)),
            Err(e) => {
                debug!("{kind} failed on `{}`: {e}", train.id);
                failed.push((kind, e));
            }
        }
    }
    (EnsembleInput::new(members), failed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(mean: Vec<f64>, var: Vec<f64>) -> GaussianForecast {
        GaussianForecast::new(mean, var).unwrap()
    }

    #[test]
    fn identical_members() {
        let members = SICOUM_MEMBERS.iter().map(|&k| (k, g(vec![1.0], vec![4.0]))).collect();
        let f = sicoum_combine(&EnsembleInput::new(members)).unwrap();
        assert_eq!(f.mean(), &[1.0]);
        assert_eq!(f.variance(), &[4.0]);
    }

    #[test]
    fn arithmetic_means() {
        let members = SICOUM_MEMBERS
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, g(vec![i as f64 + 1.0], vec![i as f64 + 1.0])))
            .collect();
        let f = sicoum_combine(&EnsembleInput::new(members)).unwrap();
        assert_eq!(f.mean(), &[2.5]);
        assert_eq!(f.variance(), &[2.5]);
    }

    #[test]
    fn single_survivor_passes_through() {
        let only = g(vec![1.5, 2.5], vec![0.3, 0.7]);
        let f = sicoum_combine(&EnsembleInput::new(vec![(ForecasterKind::Theta, only.clone())])).unwrap();
        assert_eq!(f, only);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(
            sicoum_combine(&EnsembleInput::new(vec![])),
            Err(Error::Ensemble(_))
        ));
    }

    #[test]
    fn quantile_examples() {
        let grid = QuantileGrid::new(vec![0.5, 0.9, 0.975]).unwrap();
        let one = |m, v| EnsembleInput::new(vec![(ForecasterKind::Ets, g(vec![m], vec![v]))]);
        let q = sicoum_quantiles(&one(2.5, 1.0), &grid).unwrap();
        assert_eq!(q.row(0)[0], 2.5);
        let q = sicoum_quantiles(&one(0.0, 1.0), &grid).unwrap();
        assert!((q.row(0)[2] - 1.959964).abs() < 1e-6);
        let q = sicoum_quantiles(&one(2.5, 2.5), &grid).unwrap();
        assert!((q.row(0)[1] - (2.5 + 2.5f64.sqrt() * 1.281552)).abs() < 1e-6);
        assert!((q.row(0)[1] - 4.526).abs() < 1e-3);
    }

    #[test]
    fn horizon_mismatch() {
        let members = vec![
            (ForecasterKind::Ets, g(vec![1.0], vec![1.0])),
            (ForecasterKind::Ces, g(vec![1.0, 2.0], vec![1.0, 1.0])),
        ];
        assert!(matches!(
            sicoum_combine(&EnsembleInput::new(members)),
            Err(Error::Shape(_))
        ));
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_bounded(
            rows in prop::collection::vec((-1e3f64..1e3, 0.0f64..1e3), 1..5),
            rot in 0usize..4,
        ) {
            let members: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(i, &(m, v))| (SICOUM_MEMBERS[i % 4], g(vec![m, m * 0.5], vec![v, v * 2.0])))
                .collect();
            let mut shuffled = members.clone();
            shuffled.rotate_left(rot % members.len());
            shuffled.reverse();
            let a = sicoum_combine(&EnsembleInput::new(members)).unwrap();
            let b = sicoum_combine(&EnsembleInput::new(shuffled)).unwrap();
            prop_assert_eq!(&a, &b);
            let n = rows.len() as f64;
            let want_mu = rows.iter().map(|r| r.0).sum::<f64>() / n;
            let want_var = rows.iter().map(|r| r.1).sum::<f64>() / n;
            prop_assert!((a.mean()[0] - want_mu).abs() <= 1e-12 * (1.0 + want_mu.abs()));
            prop_assert!((a.variance()[0] - want_var).abs() <= 1e-12 * (1.0 + want_var));
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r.1), h.max(r.1)));
            prop_assert!(a.variance()[0] >= lo && a.variance()[0] <= hi);
        }
    }
}
