//! Complex exponential smoothing with a (level, information) state pair.
//!
//! With α = α₀ + iα₁ the one-step recursion is
//!   ŷ_t = l_{t−lag}
//!   l_t = l_{t−lag} − (1 − α₁)c_{t−lag} + (α₀ − α₁)e_t
//!   c_t = l_{t−lag} + (1 − α₀)c_{t−lag} + (α₀ + α₁)e_t
//! where `lag` is 1 for the plain model and `m` for the simple seasonal
//! variant, which keeps `m` independent state pairs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::statmodels::{
    aicc, concentrated_loglik, mean_square, residual_variance, CandidateScore, FittedModel, ForecasterKind, ModelState,
};
use crate::types::TimeSeries;

const START: [f64; 2] = [1.3, 1.0];

#[derive(Debug, Clone)]
pub(crate) struct CesState {
    a0: f64,
    a1: f64,
    /// (level, information) per state, indexed by `t mod lag`.
    states: Vec<(f64, f64)>,
    n: usize,
}

impl CesState {
    pub(crate) fn forecast(&self, horizon: usize, sigma2: f64) -> (Vec<f64>, Vec<f64>) {
        let lag = self.states.len();
        let mut states = self.states.clone();
        let mut mean = Vec::with_capacity(horizon);
        for h in 1..=horizon {
            let j = (self.n - 1 + h) % lag;
            let (l, c) = states[j];
            mean.push(l);
            states[j] = (l - (1.0 - self.a1) * c, l + (1.0 - self.a0) * c);
        }
        let var = (1..=horizon).map(|h| sigma2 * h as f64).collect();
        (mean, var)
    }
}

/// Spectral radius of the discount matrix is below one.
pub(crate) fn admissible(a0: f64, a1: f64) -> bool {
    let d = [[1.0 - a0 + a1, -(1.0 - a1)], [1.0 - a0 - a1, 1.0 - a0]];
    let tr = d[0][0] + d[1][1];
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    let disc = tr * tr - 4.0 * det;
    let radius = if disc >= 0.0 {
        let s = disc.sqrt();
        ((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs())
    } else {
        det.sqrt()
    };
    radius < 1.0
}

/// One-step errors for `t ≥ lag` plus the final states.
fn filter(y: &[f64], lag: usize, a0: f64, a1: f64) -> (Vec<f64>, Vec<(f64, f64)>) {
    let mut states: Vec<(f64, f64)> = y[..lag].iter().map(|&v| (v, v / 1.1)).collect();
    let mut errors = Vec::with_capacity(y.len() - lag);
    for (t, &obs) in y.iter().enumerate().skip(lag) {
        let (l, c) = states[t % lag];
        let e = obs - l;
        states[t % lag] = (l - (1.0 - a1) * c + (a0 - a1) * e, l + (1.0 - a0) * c + (a0 + a1) * e);
        errors.push(e);
    }
    (errors, states)
}

struct Candidate {
    lag: usize,
    a0: f64,
    a1: f64,
    errors: Vec<f64>,
    states: Vec<(f64, f64)>,
    aicc: f64,
}

fn fit_lag(y: &[f64], lag: usize, skip: usize) -> Option<Candidate> {
    let objective = |p: &[f64]| {
        if !admissible(p[0], p[1]) {
            return f64::INFINITY;
        }
        let (e, _) = filter(y, lag, p[0], p[1]);
        e.iter().map(|v| v * v).sum::<f64>()
    };
    let best = NelderMead::default().minimize(objective, &START);
    let (a0, a1) = (best.x[0], best.x[1]);
    if !best.fx.is_finite() || !admissible(a0, a1) {
        return None;
    }
    let (errors, states) = filter(y, lag, a0, a1);
    // score every variant on the same observations
    let scored = &errors[skip - lag..];
    let sse: f64 = scored.iter().map(|e| e * e).sum();
    let score = aicc(concentrated_loglik(sse, scored.len(), mean_square(y)), 3, scored.len());
    Some(Candidate {
        lag,
        a0,
        a1,
        errors,
        states,
        aicc: score,
    })
}

/// Fits CES; with `m > 1` the simple seasonal variant is also fitted and
/// the lower AICc wins.
pub fn fit_ces(train: &TimeSeries, m: usize) -> Result<FittedModel> {
    let y = train.values();
    let n = y.len();
    if n < 3 {
        return Err(Error::Fit(format!("CES needs 3 observations, got {n}")));
    }
    let mut lags = vec![1];
    if m > 1 && n >= 2 * m {
        lags.push(m);
    }
    let skip = *lags.iter().max().unwrap_or(&1);
    let fits: Vec<Candidate> = lags.iter().filter_map(|&l| fit_lag(y, l, skip)).collect();
    let candidates = fits
        .iter()
        .map(|c| CandidateScore {
            label: variant_name(c.lag),
            aicc: c.aicc,
        })
        .collect();
    let best = fits
        .into_iter()
        .reduce(|a, b| if b.aicc < a.aicc { b } else { a })
        .ok_or_else(|| Error::Fit(format!("CES left the admissible region for `{}`", train.id)))?;
    let mut parameters = BTreeMap::new();
    parameters.insert("alpha0".into(), best.a0);
    parameters.insert("alpha1".into(), best.a1);
    parameters.insert("lag".into(), best.lag as f64);
    Ok(FittedModel {
        kind: ForecasterKind::Ces,
        variant: variant_name(best.lag),
        parameters,
        residual_variance: residual_variance(&best.errors, 2),
        aicc: Some(best.aicc),
        candidates,
        state: ModelState::Ces(CesState {
            a0: best.a0,
            a1: best.a1,
            states: best.states,
            n,
        }),
    })
}

fn variant_name(lag: usize) -> String {
    if lag == 1 {
        "CES(N)".into()
    } else {
        format!("CES(S,{lag})")
    }
}
