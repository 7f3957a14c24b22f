//! Automatic seasonal ARIMA: KPSS / seasonal-strength differencing followed
//! by a stepwise AICc search over ARMA orders.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::statmodels::decompose::seasonal_strength;
use crate::statmodels::{mean_square, CandidateScore, FittedModel, ForecasterKind, ModelState};
use crate::types::TimeSeries;

pub mod kpss;
pub mod model;

use model::{fit_arma, kalman, psi_weights, ArmaFit, Method, Order};

const SEASONAL_STRENGTH_THRESHOLD: f64 = 0.64;
const MAX_MODELS: usize = 94;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoArimaOptions {
    pub max_p: usize,
    pub max_q: usize,
    pub max_sp: usize,
    pub max_sq: usize,
    /// Bound on `p + q + P + Q`.
    pub max_order: usize,
    pub max_d: usize,
    /// Select orders by conditional sum of squares and refit only the
    /// winner by exact likelihood. Faster, less accurate AICc.
    pub approximation: bool,
}

impl Default for AutoArimaOptions {
    fn default() -> Self {
        Self {
            max_p: 5,
            max_q: 5,
            max_sp: 2,
            max_sq: 2,
            max_order: 5,
            max_d: 2,
            approximation: false,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ArimaState {
    phi: Vec<f64>,
    mean: f64,
    /// Predicted forecast-state after the last observation, mean removed.
    state: Vec<f64>,
    /// `ψ*` source: AR polynomial including differencing, and the MA part.
    ar_star: Vec<f64>,
    theta: Vec<f64>,
    /// Differencing polynomial `y_t = w_t + Σ delta[i] y_{t−1−i}`.
    delta: Vec<f64>,
    /// Last `delta.len()` observations, oldest first.
    tail: Vec<f64>,
}

impl ArimaState {
    pub(crate) fn forecast(&self, horizon: usize, sigma2: f64) -> (Vec<f64>, Vec<f64>) {
        let mut a = self.state.clone();
        let mut phi = self.phi.clone();
        phi.resize(a.len(), 0.0);
        let mut hist = self.tail.clone();
        let mut mean = Vec::with_capacity(horizon);
        for h in 0..horizon {
            if h > 0 {
                model::advance(&mut a, &phi);
            }
            let w = self.mean + a[0];
            let k = hist.len();
            let y = w + self
                .delta
                .iter()
                .enumerate()
                .map(|(i, d)| d * hist[k - 1 - i])
                .sum::<f64>();
            hist.push(y);
            mean.push(y);
        }
        let psi = psi_weights(&self.ar_star, &self.theta, horizon);
        let mut acc = 0.0;
        let var = psi
            .iter()
            .map(|p| {
                acc += p * p;
                sigma2 * acc
            })
            .collect();
        (mean, var)
    }
}

/// `(1 − B)^d (1 − B^m)^D` as coefficients on `B^0, B^1, …`.
fn differencing_poly(d: usize, sd: usize, m: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut mul = |lag: usize| {
        let mut out = vec![0.0; poly.len() + lag];
        for (i, c) in poly.iter().enumerate() {
            out[i] += c;
            out[i + lag] -= c;
        }
        poly = out;
    };
    for _ in 0..d {
        mul(1);
    }
    for _ in 0..sd {
        mul(m);
    }
    poly
}

fn apply_poly(y: &[f64], poly: &[f64]) -> Vec<f64> {
    let k = poly.len() - 1;
    (k..y.len())
        .map(|t| poly.iter().enumerate().map(|(i, c)| c * y[t - i]).sum())
        .collect()
}

fn label(o: &Order, d: usize, sd: usize, m: usize) -> String {
    let mut s = format!("ARIMA({},{},{})", o.p, d, o.q);
    if o.sp + sd + o.sq > 0 {
        s.push_str(&format!("({},{},{})[{m}]", o.sp, sd, o.sq));
    }
    if o.constant {
        s.push_str(if d + sd == 0 { " with mean" } else { " with drift" });
    }
    s
}

struct Search<'a> {
    w: &'a [f64],
    m: usize,
    method: Method,
    scale: f64,
    cache: HashMap<Order, Option<ArmaFit>>,
    visited: Vec<Order>,
}

impl Search<'_> {
    fn eval(&mut self, o: Order) -> f64 {
        if let Some(f) = self.cache.get(&o) {
            return f.as_ref().map_or(f64::INFINITY, |f| f.aicc);
        }
        let fit = fit_arma(self.w, self.m, o, self.method, self.scale);
        let score = fit.as_ref().map_or(f64::INFINITY, |f| f.aicc);
        self.cache.insert(o, fit);
        self.visited.push(o);
        score
    }
}

/// Automatic ARIMA with default search limits.
pub fn auto_arima(train: &TimeSeries, m: usize) -> Result<FittedModel> {
    auto_arima_with(train, m, &AutoArimaOptions::default())
}

pub fn auto_arima_with(train: &TimeSeries, m: usize, opts: &AutoArimaOptions) -> Result<FittedModel> {
    let y = train.values();
    let n = y.len();
    if n < 10 {
        return Err(Error::Fit(format!("AutoARIMA needs 10 observations, got {n}")));
    }
    let seasonal = m > 1 && n >= 3 * m;
    let sd = usize::from(seasonal && seasonal_strength(y, m) > SEASONAL_STRENGTH_THRESHOLD);
    let ys = if sd == 1 { kpss::difference(y, m) } else { y.to_vec() };
    let d = kpss::ndiffs(&ys, opts.max_d);
    let m_eff = if seasonal { m } else { 1 };
    let delta_poly = differencing_poly(d, sd, m_eff);
    let w = apply_poly(y, &delta_poly);
    if w.len() < 3 {
        return Err(Error::Fit(format!(
            "series `{}` too short after differencing",
            train.id
        )));
    }
    let method = if opts.approximation { Method::Css } else { Method::CssMl };
    let allow_constant = d + sd <= 1;
    let (max_sp, max_sq) = if seasonal { (opts.max_sp, opts.max_sq) } else { (0, 0) };
    let legal = |o: &Order| {
        o.p <= opts.max_p
            && o.q <= opts.max_q
            && o.sp <= max_sp
            && o.sq <= max_sq
            && o.n_coef() <= opts.max_order
            && (allow_constant || !o.constant)
            && o.p + m_eff * o.sp < w.len().saturating_sub(1)
    };

    let mut search = Search {
        w: &w,
        m: m_eff,
        method,
        scale: mean_square(&w),
        cache: HashMap::new(),
        visited: Vec::new(),
    };
    let s = usize::from(seasonal);
    let starts = [
        Order::new(2, 2, s, s, allow_constant),
        Order::new(0, 0, 0, 0, allow_constant),
        Order::new(1, 0, s, 0, allow_constant),
        Order::new(0, 1, 0, s, allow_constant),
        Order::new(0, 0, 0, 0, false),
    ];
    let mut best: Option<(Order, f64)> = None;
    for o in starts.into_iter().filter(|o| legal(o)) {
        let score = search.eval(o);
        if best.map_or(true, |(_, b)| score < b) {
            best = Some((o, score));
        }
    }

    loop {
        let Some((cur, cur_score)) = best else { break };
        if search.visited.len() >= MAX_MODELS {
            break;
        }
        let mut improved = false;
        for cand in neighbours(&cur) {
            if !legal(&cand) || search.cache.contains_key(&cand) {
                continue;
            }
            if search.visited.len() >= MAX_MODELS {
                break;
            }
            let score = search.eval(cand);
            if score < cur_score {
                best = Some((cand, score));
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }

    let (best_order, best_score) = best
        .filter(|(_, s)| s.is_finite())
        .ok_or_else(|| Error::Fit(format!("no admissible ARIMA for `{}`", train.id)))?;
    let mut fit = search.cache[&best_order].clone().expect("finite score has a fit");
    let candidates: Vec<CandidateScore> = search
        .visited
        .iter()
        .map(|o| CandidateScore {
            label: label(o, d, sd, m_eff),
            aicc: search.cache[o].as_ref().map_or(f64::INFINITY, |f| f.aicc),
        })
        .collect();
    if method == Method::Css {
        // coefficients come from an exact-likelihood refit; the reported
        // AICc stays the selection score
        if let Some(ml) = fit_arma(&w, m_eff, best_order, Method::CssMl, search.scale) {
            fit = ml;
        }
    }
    fit.aicc = best_score;

    let filtered =
        kalman(&w, &fit.coef).ok_or_else(|| Error::Fit(format!("ARIMA filter failed for `{}`", train.id)))?;
    let k = fit.order.n_params();
    let dof = filtered.n.saturating_sub(k).max(1);
    let sigma2 = filtered.ssq / dof as f64;

    let mut ar_star = vec![0.0; fit.coef.phi.len() + delta_poly.len() - 1];
    // (1 − Σφ B^i) · δ(B) = 1 − Σ ar_star B^i
    let mut phi_poly = vec![1.0];
    phi_poly.extend(fit.coef.phi.iter().map(|v| -v));
    for (i, a) in phi_poly.iter().enumerate() {
        for (j, b) in delta_poly.iter().enumerate() {
            if i + j > 0 {
                ar_star[i + j - 1] -= a * b;
            }
        }
    }
    let delta: Vec<f64> = delta_poly[1..].iter().map(|v| -v).collect();
    let tail = y[n - delta.len()..].to_vec();

    let mut parameters = BTreeMap::new();
    let c = &fit.coef;
    for (prefix, vals) in [("ar", &c.ar), ("ma", &c.ma), ("sar", &c.sar), ("sma", &c.sma)] {
        for (i, v) in vals.iter().enumerate() {
            parameters.insert(format!("{prefix}{}", i + 1), *v);
        }
    }
    if fit.order.constant {
        let name = if d + sd == 0 { "mean" } else { "drift" };
        parameters.insert(name.into(), c.mean);
    }
    parameters.insert("d".into(), d as f64);
    parameters.insert("D".into(), sd as f64);
    Ok(FittedModel {
        kind: ForecasterKind::AutoArima,
        variant: label(&best_order, d, sd, m_eff),
        parameters,
        residual_variance: sigma2,
        aicc: Some(fit.aicc),
        candidates,
        state: ModelState::Arima(ArimaState {
            phi: c.phi.clone(),
            mean: c.mean,
            state: filtered.state,
            ar_star,
            theta: c.theta.clone(),
            delta,
            tail,
        }),
    })
}

fn neighbours(o: &Order) -> Vec<Order> {
    let mut out = Vec::new();
    let steps: [(isize, isize, isize, isize); 12] = [
        (0, 0, -1, 0),
        (0, 0, 1, 0),
        (0, 0, 0, -1),
        (0, 0, 0, 1),
        (0, 0, -1, -1),
        (0, 0, 1, 1),
        (-1, 0, 0, 0),
        (1, 0, 0, 0),
        (0, -1, 0, 0),
        (0, 1, 0, 0),
        (-1, -1, 0, 0),
        (1, 1, 0, 0),
    ];
    for (dp, dq, dsp, dsq) in steps {
        let add = |v: usize, d: isize| v.checked_add_signed(d);
        if let (Some(p), Some(q), Some(sp), Some(sq)) = (add(o.p, dp), add(o.q, dq), add(o.sp, dsp), add(o.sq, dsq)) {
            out.push(Order::new(p, q, sp, sq, o.constant));
        }
    }
    out.push(Order {
        constant: !o.constant,
        ..*o
    });
    out
}
