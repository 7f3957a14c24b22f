//! Additive-error exponential smoothing (ANN, AAN, AAdN, ANA, AAA) with
//! AICc selection.
//!
//! Smoothing parameters and the initial level/trend are estimated by
//! Nelder–Mead on the concentrated Gaussian likelihood of the one-step
//! errors. Initial seasonal states come from the first complete seasons and
//! are held fixed, but still count towards the AICc penalty.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::statmodels::{
    aicc, concentrated_loglik, mean_square, residual_variance, CandidateScore, FittedModel, ForecasterKind, ModelState,
};
use crate::types::TimeSeries;

const SMOOTH_LO: f64 = 1e-4;
const SMOOTH_HI: f64 = 0.9999;
const PHI_LO: f64 = 0.8;
const PHI_HI: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    None,
    Additive,
    Damped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtsSpec {
    pub trend: Trend,
    pub seasonal: bool,
}

impl fmt::Display for EtsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.trend {
            Trend::None => "N",
            Trend::Additive => "A",
            Trend::Damped => "Ad",
        };
        write!(f, "A{t}{}", if self.seasonal { "A" } else { "N" })
    }
}

impl EtsSpec {
    const ANN: EtsSpec = EtsSpec {
        trend: Trend::None,
        seasonal: false,
    };
    const AAN: EtsSpec = EtsSpec {
        trend: Trend::Additive,
        seasonal: false,
    };
    const AADN: EtsSpec = EtsSpec {
        trend: Trend::Damped,
        seasonal: false,
    };
    const ANA: EtsSpec = EtsSpec {
        trend: Trend::None,
        seasonal: true,
    };
    const AAA: EtsSpec = EtsSpec {
        trend: Trend::Additive,
        seasonal: true,
    };

    fn has_trend(&self) -> bool {
        self.trend != Trend::None
    }
}

#[derive(Debug, Clone, Copy)]
struct Smoothing {
    alpha: f64,
    beta: f64,
    gamma: f64,
    phi: f64,
}

/// Layout of the optimisation vector: alpha, [beta], [gamma], [phi], l0, [b0].
fn unpack(spec: EtsSpec, x: &[f64]) -> (Smoothing, f64, f64) {
    let mut i = 0;
    let mut next = || {
        i += 1;
        x[i - 1]
    };
    let alpha = next();
    let beta = if spec.has_trend() { next() } else { 0.0 };
    let gamma = if spec.seasonal { next() } else { 0.0 };
    let phi = if spec.trend == Trend::Damped { next() } else { 1.0 };
    let l0 = next();
    let b0 = if spec.has_trend() { next() } else { 0.0 };
    (
        Smoothing {
            alpha,
            beta,
            gamma,
            phi,
        },
        l0,
        b0,
    )
}

fn admissible(s: &Smoothing) -> bool {
    s.beta <= s.alpha && s.gamma <= 1.0 - s.alpha
}

/// Runs the filter; returns one-step errors and the final states.
fn filter(y: &[f64], s: &Smoothing, l0: f64, b0: f64, season0: &[f64]) -> (Vec<f64>, f64, f64, Vec<f64>) {
    let m = season0.len().max(1);
    let mut season = season0.to_vec();
    let (mut l, mut b) = (l0, b0);
    let mut errors = Vec::with_capacity(y.len());
    for (t, &obs) in y.iter().enumerate() {
        let st = if season.is_empty() { 0.0 } else { season[t % m] };
        let pred = l + s.phi * b + st;
        let e = obs - pred;
        let level = l + s.phi * b + s.alpha * e;
        b = s.phi * b + s.beta * e;
        l = level;
        if !season.is_empty() {
            season[t % m] = st + s.gamma * e;
        }
        errors.push(e);
    }
    (errors, l, b, season)
}

#[derive(Debug, Clone)]
pub(crate) struct EtsState {
    spec: EtsSpec,
    smoothing: Smoothing,
    level: f64,
    trend: f64,
    /// Seasonal states indexed by absolute time mod m.
    season: Vec<f64>,
    n: usize,
}

impl EtsState {
    pub(crate) fn forecast(&self, horizon: usize, sigma2: f64) -> (Vec<f64>, Vec<f64>) {
        let s = &self.smoothing;
        let m = self.season.len().max(1);
        let mut mean = Vec::with_capacity(horizon);
        let mut damp_sum = 0.0;
        let mut phi_pow = 1.0;
        for h in 1..=horizon {
            phi_pow *= s.phi;
            damp_sum += phi_pow;
            let seasonal = if self.season.is_empty() {
                0.0
            } else {
                self.season[(self.n + h - 1) % m]
            };
            mean.push(self.level + damp_sum * self.trend + seasonal);
        }
        // class-1 variance: σ²(1 + Σ_{j<h} c_j²)
        let mut var = Vec::with_capacity(horizon);
        let mut acc = 1.0;
        let mut damp_j = 0.0;
        let mut phi_j = 1.0;
        for h in 1..=horizon {
            var.push(sigma2 * acc);
            let j = h;
            phi_j *= s.phi;
            damp_j += phi_j;
            let mut c = s.alpha;
            if self.spec.has_trend() {
                c += s.beta * damp_j;
            }
            if self.spec.seasonal && j % m == 0 {
                c += s.gamma;
            }
            acc += c * c;
        }
        (mean, var)
    }
}

fn initial_season(y: &[f64], m: usize) -> (Vec<f64>, f64, f64) {
    let seasons = (y.len() / m).clamp(1, 3);
    let means: Vec<f64> = (0..seasons)
        .map(|k| y[k * m..(k + 1) * m].iter().sum::<f64>() / m as f64)
        .collect();
    let mut idx = vec![0.0; m];
    for (k, mu) in means.iter().enumerate() {
        for (i, v) in idx.iter_mut().enumerate() {
            *v += (y[k * m + i] - mu) / seasons as f64;
        }
    }
    let avg = idx.iter().sum::<f64>() / m as f64;
    idx.iter_mut().for_each(|v| *v -= avg);
    let slope = if seasons > 1 {
        (means[1] - means[0]) / m as f64
    } else {
        0.0
    };
    (idx, means[0], slope)
}

struct CandidateFit {
    spec: EtsSpec,
    aicc: f64,
    state: EtsState,
    residuals: Vec<f64>,
    n_params: usize,
    l0: f64,
    b0: f64,
}

fn fit_candidate(y: &[f64], m: usize, spec: EtsSpec) -> Option<CandidateFit> {
    let n = y.len();
    let (season0, l_init, b_init) = if spec.seasonal {
        initial_season(y, m)
    } else {
        let b = if n > 1 { y[1] - y[0] } else { 0.0 };
        (Vec::new(), y[0], b)
    };
    let scale = mean_square(y);

    let mut x0 = vec![0.3];
    let mut lo = vec![SMOOTH_LO];
    let mut hi = vec![SMOOTH_HI];
    if spec.has_trend() {
        x0.push(0.05);
        lo.push(SMOOTH_LO);
        hi.push(SMOOTH_HI);
    }
    if spec.seasonal {
        x0.push(0.05);
        lo.push(SMOOTH_LO);
        hi.push(SMOOTH_HI);
    }
    if spec.trend == Trend::Damped {
        x0.push(0.95);
        lo.push(PHI_LO);
        hi.push(PHI_HI);
    }
    x0.push(l_init);
    lo.push(f64::NEG_INFINITY);
    hi.push(f64::INFINITY);
    if spec.has_trend() {
        x0.push(b_init);
        lo.push(f64::NEG_INFINITY);
        hi.push(f64::INFINITY);
    }

    let objective = |x: &[f64]| {
        let (s, l0, b0) = unpack(spec, x);
        if !admissible(&s) {
            return f64::INFINITY;
        }
        let (errors, ..) = filter(y, &s, l0, b0, &season0);
        let sse: f64 = errors.iter().map(|e| e * e).sum();
        -concentrated_loglik(sse, n, scale)
    };
    let best = NelderMead::with_bounds(lo, hi).minimize(objective, &x0);
    if !best.fx.is_finite() {
        return None;
    }
    let (s, l0, b0) = unpack(spec, &best.x);
    let (residuals, level, trend, season) = filter(y, &s, l0, b0, &season0);
    let n_params = best.x.len() + if spec.seasonal { m - 1 } else { 0 };
    let score = aicc(-best.fx, n_params + 1, n);
    Some(CandidateFit {
        spec,
        aicc: score,
        state: EtsState {
            spec,
            smoothing: s,
            level,
            trend,
            season,
            n,
        },
        residuals,
        n_params,
        l0,
        b0,
    })
}

/// Fits the additive-error ETS family and keeps the minimum-AICc model.
pub fn fit_ets(train: &TimeSeries, m: usize) -> Result<FittedModel> {
    let y = train.values();
    let n = y.len();
    if n < 3 {
        return Err(Error::Fit(format!("ETS needs 3 observations, got {n}")));
    }
    let mut specs = vec![EtsSpec::ANN, EtsSpec::AAN, EtsSpec::AADN];
    if m > 1 && n >= 2 * m {
        specs.extend([EtsSpec::ANA, EtsSpec::AAA]);
    }
    let fits: Vec<CandidateFit> = specs.iter().filter_map(|&s| fit_candidate(y, m, s)).collect();
    let candidates: Vec<CandidateScore> = fits
        .iter()
        .map(|f| CandidateScore {
            label: f.spec.to_string(),
            aicc: f.aicc,
        })
        .collect();
    let best = fits
        .into_iter()
        .filter(|f| !f.aicc.is_nan())
        .reduce(|a, b| if b.aicc < a.aicc { b } else { a })
        .ok_or_else(|| Error::Fit(format!("no ETS candidate converged for `{}`", train.id)))?;

    let s = best.state.smoothing;
    let mut parameters = BTreeMap::new();
    parameters.insert("alpha".into(), s.alpha);
    if best.spec.has_trend() {
        parameters.insert("beta".into(), s.beta);
        parameters.insert("b0".into(), best.b0);
    }
    if best.spec.seasonal {
        parameters.insert("gamma".into(), s.gamma);
    }
    if best.spec.trend == Trend::Damped {
        parameters.insert("phi".into(), s.phi);
    }
    parameters.insert("l0".into(), best.l0);
    Ok(FittedModel {
        kind: ForecasterKind::Ets,
        variant: best.spec.to_string(),
        parameters,
        residual_variance: residual_variance(&best.residuals, best.n_params),
        aicc: Some(best.aicc),
        candidates,
        state: ModelState::Ets(best.state),
    })
}
