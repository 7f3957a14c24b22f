//! Seasonal ARMA estimation on an already differenced series.
//!
//! Coefficients are optimised in an unconstrained space: each polynomial is
//! mapped through tanh to partial autocorrelations and then through the
//! Durbin–Levinson recursion, so every trial point is stationary (AR) or
//! invertible (MA).

use num_complex::Complex64;

use crate::optim::NelderMead;
use crate::statmodels::{aicc, concentrated_loglik};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order {
    pub p: usize,
    pub q: usize,
    pub sp: usize,
    pub sq: usize,
    pub constant: bool,
}

impl Order {
    pub fn new(p: usize, q: usize, sp: usize, sq: usize, constant: bool) -> Self {
        Self { p, q, sp, sq, constant }
    }

    pub fn n_coef(&self) -> usize {
        self.p + self.q + self.sp + self.sq
    }

    pub fn n_params(&self) -> usize {
        self.n_coef() + usize::from(self.constant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Conditional sum of squares only.
    Css,
    /// CSS start followed by exact Gaussian likelihood.
    CssMl,
}

/// Partial autocorrelations in (−1, 1) to AR coefficients.
pub fn partrans(raw: &[f64]) -> Vec<f64> {
    let p = raw.len();
    let mut phi: Vec<f64> = raw.iter().map(|v| v.tanh()).collect();
    let mut work = phi.clone();
    for j in 1..p {
        let a = phi[j];
        for k in 0..j {
            work[k] -= a * phi[j - k - 1];
        }
        phi[..j].copy_from_slice(&work[..j]);
    }
    phi
}

/// Coefficients of one parameter vector.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    pub mean: f64,
    /// Expanded AR polynomial: `w_t = Σ phi[i] w_{t−1−i} + …`.
    pub phi: Vec<f64>,
    /// Expanded MA polynomial: `… + e_t + Σ theta[j] e_{t−1−j}`.
    pub theta: Vec<f64>,
}

pub fn expand(order: &Order, m: usize, x: &[f64]) -> Coefficients {
    let (p, q, sp, sq) = (order.p, order.q, order.sp, order.sq);
    let ar = partrans(&x[..p]);
    let ma: Vec<f64> = partrans(&x[p..p + q]).iter().map(|v| -v).collect();
    let sar = partrans(&x[p + q..p + q + sp]);
    let sma: Vec<f64> = partrans(&x[p + q + sp..p + q + sp + sq]).iter().map(|v| -v).collect();
    let mean = if order.constant { x[order.n_coef()] } else { 0.0 };

    let mut phi = vec![0.0; p + m * sp];
    phi[..p].copy_from_slice(&ar);
    for (j, s) in sar.iter().enumerate() {
        let lag = m * (j + 1);
        phi[lag - 1] += s;
        for (i, a) in ar.iter().enumerate() {
            phi[lag + i] -= a * s;
        }
    }
    let mut theta = vec![0.0; q + m * sq];
    theta[..q].copy_from_slice(&ma);
    for (j, s) in sma.iter().enumerate() {
        let lag = m * (j + 1);
        theta[lag - 1] += s;
        for (i, a) in ma.iter().enumerate() {
            theta[lag + i] += a * s;
        }
    }
    Coefficients {
        ar,
        ma,
        sar,
        sma,
        mean,
        phi,
        theta,
    }
}

/// Conditional sum of squares; returns (sse, number of terms).
pub fn css(w: &[f64], c: &Coefficients) -> (f64, usize) {
    let (p, q, n) = (c.phi.len(), c.theta.len(), w.len());
    if n <= p {
        return (f64::INFINITY, 0);
    }
    let mut e = vec![0.0; n];
    let mut sse = 0.0;
    for t in p..n {
        let mut v = w[t] - c.mean;
        for (i, phi) in c.phi.iter().enumerate() {
            v -= phi * (w[t - i - 1] - c.mean);
        }
        for (j, th) in c.theta.iter().enumerate().take(q.min(t)) {
            v -= th * e[t - j - 1];
        }
        e[t] = v;
        sse += v * v;
    }
    (sse, n - p)
}

/// ψ weights `ψ_0 = 1, ψ_1, …` of the MA(∞) form, `len` terms.
pub fn psi_weights(phi: &[f64], theta: &[f64], len: usize) -> Vec<f64> {
    let mut psi = vec![0.0; len];
    if len == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..len {
        let mut v = theta.get(j - 1).copied().unwrap_or(0.0);
        for i in 1..=phi.len().min(j) {
            v += phi[i - 1] * psi[j - i];
        }
        psi[j] = v;
    }
    psi
}

/// Dense solve with partial pivoting; `a` is row-major `n × n`.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Autocovariances `γ(0..=max_lag)` of a unit-variance ARMA process.
pub fn autocovariances(phi: &[f64], theta: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let (p, q) = (phi.len(), theta.len());
    let psi = psi_weights(phi, theta, q + 1);
    let th = |j: usize| if j == 0 { 1.0 } else { theta[j - 1] };
    let rhs = |k: usize| -> f64 { (k..=q).map(|j| th(j) * psi[j - k]).sum() };
    let mut a = vec![vec![0.0; p + 1]; p + 1];
    let mut b = vec![0.0; p + 1];
    for k in 0..=p {
        a[k][k] += 1.0;
        for i in 1..=p {
            a[k][k.abs_diff(i)] -= phi[i - 1];
        }
        b[k] = rhs(k);
    }
    let head = solve(a, b)?;
    let mut gamma = vec![0.0; max_lag.max(p) + 1];
    gamma[..=p].copy_from_slice(&head);
    for k in p + 1..gamma.len() {
        let mut v = rhs(k);
        for i in 1..=p {
            v += phi[i - 1] * gamma[k - i];
        }
        gamma[k] = v;
    }
    gamma.truncate(max_lag + 1);
    Some(gamma)
}

/// Smallest root modulus of `1 + Σ c_i z^i` (∞ for a constant polynomial),
/// by Durand–Kerner iteration.
pub fn min_root_modulus(c: &[f64]) -> f64 {
    let mut coef = vec![1.0];
    coef.extend_from_slice(c);
    while coef.len() > 1 && coef.last().is_some_and(|v| v.abs() < 1e-12) {
        coef.pop();
    }
    let deg = coef.len() - 1;
    if deg == 0 {
        return f64::INFINITY;
    }
    let lead = coef[deg];
    let monic: Vec<f64> = coef.iter().map(|v| v / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let radius = 1.0 + monic[..deg].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let zi = roots[i];
            let denom = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, &zj)| acc * (zi - zj));
            let step = eval(zi) / denom;
            if step.is_finite() {
                roots[i] = zi - step;
                delta = delta.max(step.norm());
            }
        }
        if delta < 1e-12 {
            break;
        }
    }
    roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

/// Rejects fits with an AR or MA root within `1.01` of the unit circle,
/// which signals near-nonstationarity or near-cancellation.
pub fn near_unit_root(c: &Coefficients, m: usize) -> bool {
    const LIMIT: f64 = 1.01;
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let seasonal = |v: &[f64]| min_root_modulus(v).powf(1.0 / m as f64);
    min_root_modulus(&neg(&c.ar)) < LIMIT
        || min_root_modulus(&c.ma) < LIMIT
        || seasonal(&neg(&c.sar)) < LIMIT
        || seasonal(&c.sma) < LIMIT
}

/// Result of running the exact-likelihood filter.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// Σ v²/F over the sample.
    pub ssq: f64,
    /// Σ ln F.
    pub sumlog: f64,
    pub n: usize,
    /// Predicted state `(w_{n+1|n}, …, w_{n+r|n})` with the mean removed.
    pub state: Vec<f64>,
    /// Standardised innovations `v/√F`.
    pub innovations: Vec<f64>,
}

/// Kalman filter on the forecast-state form with state
/// `(w_t, w_{t+1|t}, …, w_{t+r−1|t})`, `r = max(p, q + 1)`.
pub fn kalman(w: &[f64], c: &Coefficients) -> Option<FilterOutput> {
    let r = c.phi.len().max(c.theta.len() + 1);
    let mut phi = c.phi.clone();
    phi.resize(r, 0.0);
    let psi = psi_weights(&c.phi, &c.theta, r);
    let gamma = autocovariances(&c.phi, &c.theta, r)?;

    // Row-major r × r covariance; the AR terms are kept sparse because
    // seasonal expansions are mostly zeros.
    let nz: Vec<(usize, f64)> = (0..r)
        .filter_map(|l| {
            let v = phi[r - 1 - l];
            (v != 0.0).then_some((l, v))
        })
        .collect();
    let mut p = vec![0.0; r * r];
    for i in 0..r {
        for j in i..r {
            let lag = j - i;
            let mut v = gamma[lag];
            for k in 0..i {
                v -= psi[k] * psi[k + lag];
            }
            p[i * r + j] = v;
            p[j * r + i] = v;
        }
    }
    let mut a = vec![0.0; r];
    let mut out = FilterOutput {
        ssq: 0.0,
        sumlog: 0.0,
        n: w.len(),
        state: Vec::new(),
        innovations: Vec::with_capacity(w.len()),
    };
    let mut steady = false;
    let mut tp = vec![0.0; r * r];
    let mut k = vec![0.0; r];
    let mut row0 = vec![0.0; r];
    for &obs in w {
        let v = obs - c.mean - a[0];
        if steady {
            out.ssq += v * v;
            out.innovations.push(v);
            for (ai, psi_i) in a.iter_mut().zip(&psi) {
                *ai += psi_i * v;
            }
            advance(&mut a, &phi);
            continue;
        }
        let f = p[0];
        if !(f > 0.0) || !f.is_finite() {
            return None;
        }
        out.ssq += v * v / f;
        out.sumlog += f.ln();
        out.innovations.push(v / f.sqrt());
        row0.copy_from_slice(&p[..r]);
        for i in 0..r {
            k[i] = row0[i] / f;
            a[i] += k[i] * v;
        }
        for (i, &ki) in k.iter().enumerate() {
            if ki != 0.0 {
                for (pij, r0j) in p[i * r..(i + 1) * r].iter_mut().zip(&row0) {
                    *pij -= ki * r0j;
                }
            }
        }
        advance(&mut a, &phi);
        // P ← T P T' + ψψ'
        tp[..(r - 1) * r].copy_from_slice(&p[r..]);
        {
            let last = &mut tp[(r - 1) * r..];
            last.iter_mut().for_each(|x| *x = 0.0);
            for &(l, ph) in &nz {
                for (x, plj) in last.iter_mut().zip(&p[l * r..(l + 1) * r]) {
                    *x += ph * plj;
                }
            }
        }
        for i in 0..r {
            let row = &tp[i * r..(i + 1) * r];
            let dst = &mut p[i * r..(i + 1) * r];
            dst[..r - 1].copy_from_slice(&row[1..]);
            dst[r - 1] = nz.iter().map(|&(l, ph)| row[l] * ph).sum();
            for (x, psi_j) in dst.iter_mut().zip(&psi) {
                *x += psi[i] * psi_j;
            }
        }
        steady = (p[0] - 1.0).abs() < 1e-9;
    }
    out.state = a;
    Some(out)
}

/// One transition step of the forecast-state form.
pub fn advance(a: &mut [f64], phi: &[f64]) {
    let r = a.len();
    let last: f64 = (0..r).map(|l| phi[r - 1 - l] * a[l]).sum();
    a.copy_within(1.., 0);
    a[r - 1] = last;
}

#[derive(Debug, Clone)]
pub struct ArmaFit {
    pub order: Order,
    pub x: Vec<f64>,
    pub coef: Coefficients,
    pub loglik: f64,
    pub aicc: f64,
    pub method: Method,
}

fn exact_loglik(w: &[f64], c: &Coefficients, scale: f64) -> Option<(f64, FilterOutput)> {
    let out = kalman(w, c)?;
    let ll = concentrated_loglik(out.ssq, out.n, scale) - 0.5 * out.sumlog;
    ll.is_finite().then_some((ll, out))
}

/// Fits one order. `scale` is the mean square of `w`, used for the variance
/// floor.
pub fn fit_arma(w: &[f64], m: usize, order: Order, method: Method, scale: f64) -> Option<ArmaFit> {
    let nc = order.n_coef();
    let mut x0 = vec![0.0; order.n_params()];
    if order.constant {
        x0[nc] = w.iter().sum::<f64>() / w.len() as f64;
    }
    let css_obj = |x: &[f64]| {
        let c = expand(&order, m, x);
        let (sse, n) = css(w, &c);
        if n == 0 {
            return f64::INFINITY;
        }
        -concentrated_loglik(sse * w.len() as f64 / n as f64, w.len(), scale)
    };
    let start = if order.n_params() == 0 {
        x0
    } else {
        NelderMead::default().minimize(css_obj, &x0).x
    };
    let (x, loglik, n_eff) = match method {
        Method::Css => {
            let c = expand(&order, m, &start);
            let (sse, n) = css(w, &c);
            if n == 0 {
                return None;
            }
            // σ² from the conditional terms, likelihood over the full sample
            let full = w.len();
            (
                start,
                concentrated_loglik(sse * full as f64 / n as f64, full, scale),
                full,
            )
        }
        Method::CssMl => {
            let ml_obj = |x: &[f64]| match exact_loglik(w, &expand(&order, m, x), scale) {
                Some((ll, _)) => -ll,
                None => f64::INFINITY,
            };
            let x = if order.n_params() == 0 {
                start
            } else {
                NelderMead::default().restarts(2).minimize(ml_obj, &start).x
            };
            let (ll, _) = exact_loglik(w, &expand(&order, m, &x), scale)?;
            (x, ll, w.len())
        }
    };
    if !loglik.is_finite() {
        return None;
    }
    let coef = expand(&order, m, &x);
    let score = if near_unit_root(&coef, m) {
        f64::INFINITY
    } else {
        aicc(loglik, order.n_params() + 1, n_eff)
    };
    Some(ArmaFit {
        order,
        coef,
        x,
        loglik,
        aicc: score,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coef(phi: Vec<f64>, theta: Vec<f64>) -> Coefficients {
        Coefficients {
            ar: vec![],
            ma: vec![],
            sar: vec![],
            sma: vec![],
            mean: 0.0,
            phi,
            theta,
        }
    }

    #[test]
    fn partrans_is_stationary() {
        // AR(2) from pacf (a, b): phi2 = b, phi1 = a(1 − b)
        let phi = partrans(&[0.5f64.atanh(), 0.3f64.atanh()]);
        assert!((phi[1] - 0.3).abs() < 1e-12);
        assert!((phi[0] - 0.5 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn root_moduli() {
        // 1 − 0.5z → root 2
        assert!((min_root_modulus(&[-0.5]) - 2.0).abs() < 1e-10);
        // 1 − 1.5z + 0.5z² = (1 − z)(1 − 0.5z) → roots 1, 2
        assert!((min_root_modulus(&[-1.5, 0.5]) - 1.0).abs() < 1e-8);
        // 1 + 0.25z² → roots ±2i
        assert!((min_root_modulus(&[0.0, 0.25]) - 2.0).abs() < 1e-10);
        assert_eq!(min_root_modulus(&[]), f64::INFINITY);
    }

    #[test]
    fn ar1_autocovariances() {
        let g = autocovariances(&[0.6], &[], 3).unwrap();
        let g0 = 1.0 / (1.0 - 0.36);
        for (k, v) in g.iter().enumerate() {
            assert!((v - g0 * 0.6f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn ma1_autocovariances() {
        let g = autocovariances(&[], &[0.4], 3).unwrap();
        assert!((g[0] - 1.16).abs() < 1e-12);
        assert!((g[1] - 0.4).abs() < 1e-12);
        assert_eq!(g[2], 0.0);
    }

    #[test]
    fn seasonal_expansion() {
        let order = Order::new(1, 1, 1, 1, false);
        let x: Vec<f64> = [0.5f64, -0.3, 0.4, 0.2].iter().map(|v| v.atanh()).collect();
        let c = expand(&order, 4, &x);
        assert_eq!(c.phi.len(), 5);
        assert!((c.phi[0] - 0.5).abs() < 1e-12);
        assert!((c.phi[3] - 0.4).abs() < 1e-12);
        assert!((c.phi[4] + 0.2).abs() < 1e-12);
        // θ = −tanh(raw): (1 + 0.3B)(1 − 0.2B⁴)
        assert!((c.theta[0] - 0.3).abs() < 1e-12);
        assert!((c.theta[3] + 0.2).abs() < 1e-12);
        assert!((c.theta[4] + 0.06).abs() < 1e-12);
    }

    #[test]
    fn ar1_exact_likelihood_matches_closed_form() {
        let w = [0.3, -0.5, 1.2, 0.8, -0.1, 0.4];
        let phi = 0.6;
        let out = kalman(&w, &coef(vec![phi], vec![])).unwrap();
        // first innovation has variance 1/(1−φ²), the rest unit variance
        let f0 = 1.0 / (1.0 - phi * phi);
        let mut ssq = w[0] * w[0] / f0;
        for t in 1..w.len() {
            ssq += (w[t] - phi * w[t - 1]).powi(2);
        }
        assert!((out.ssq - ssq).abs() < 1e-12);
        assert!((out.sumlog - f0.ln()).abs() < 1e-12);
    }

    #[test]
    fn ma1_innovations_match_direct_recursion() {
        // exact MA(1) prediction errors: F_t = 1 + θ² − θ²/F_{t−1}
        let w = [0.3, -0.5, 1.2, 0.8, -0.1, 0.4, 2.0];
        let th = 0.5;
        let out = kalman(&w, &coef(vec![], vec![th])).unwrap();
        let mut f = 1.0 + th * th;
        let mut prev_v = 0.0;
        let mut prev_f = f64::INFINITY;
        let (mut ssq, mut sumlog) = (0.0, 0.0);
        for (t, obs) in w.iter().enumerate() {
            let pred = if t == 0 { 0.0 } else { th * prev_v / prev_f };
            if t > 0 {
                f = 1.0 + th * th - th * th / prev_f;
            }
            let v = obs - pred;
            ssq += v * v / f;
            sumlog += f.ln();
            prev_v = v;
            prev_f = f;
        }
        assert!((out.ssq - ssq).abs() < 1e-10, "{} vs {ssq}", out.ssq);
        assert!((out.sumlog - sumlog).abs() < 1e-10);
    }
}
