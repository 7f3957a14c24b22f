//! Classical decomposition, autocorrelation and seasonality diagnostics
//! shared by Theta and AutoARIMA.

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn acf(y: &[f64], max_lag: usize) -> Vec<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let denom: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    (1..=max_lag)
        .map(|k| {
            if k >= n || denom <= 0.0 {
                return 0.0;
            }
            let num: f64 = (k..n).map(|t| (y[t] - mean) * (y[t - k] - mean)).sum();
            num / denom
        })
        .collect()
}

/// 90% two-sided autocorrelation test at the seasonal lag, with Bartlett
/// standard errors from the lower-order autocorrelations.
pub fn is_seasonal(y: &[f64], m: usize) -> bool {
    let n = y.len();
    if m <= 1 || n < 2 * m {
        return false;
    }
    let r = acf(y, m);
    let cum: f64 = r[..m - 1].iter().map(|v| v * v).sum();
    let limit = 1.645 * ((1.0 + 2.0 * cum) / n as f64).sqrt();
    r[m - 1].abs() > limit
}

/// Centred moving average of order `m` (2×m when `m` is even).
/// Entries without a full window are `None`.
pub fn centred_moving_average(y: &[f64], m: usize) -> Vec<Option<f64>> {
    let n = y.len();
    let mut out = vec![None; n];
    if m <= 1 {
        return y.iter().map(|&v| Some(v)).collect();
    }
    let half = m / 2;
    if m % 2 == 1 {
        for (t, o) in out.iter_mut().enumerate().take(n.saturating_sub(half)).skip(half) {
            *o = Some(y[t - half..=t + half].iter().sum::<f64>() / m as f64);
        }
    } else {
        for (t, o) in out.iter_mut().enumerate().take(n.saturating_sub(half)).skip(half) {
            let inner: f64 = y[t + 1 - half..t + half].iter().sum();
            let edge = 0.5 * (y[t - half] + y[t + half]);
            *o = Some((inner + edge) / m as f64);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    Additive,
    Multiplicative,
}

/// Seasonal indices from classical decomposition, one per position `t mod m`.
///
/// Multiplicative indices average to 1, additive ones to 0.
pub fn seasonal_indices(y: &[f64], m: usize, kind: DecompositionKind) -> Vec<f64> {
    let trend = centred_moving_average(y, m);
    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    for (t, (v, tr)) in y.iter().zip(&trend).enumerate() {
        if let Some(tr) = tr {
            let detrended = match kind {
                DecompositionKind::Additive => v - tr,
                DecompositionKind::Multiplicative => v / tr,
            };
            sums[t % m] += detrended;
            counts[t % m] += 1;
        }
    }
    let neutral = match kind {
        DecompositionKind::Additive => 0.0,
        DecompositionKind::Multiplicative => 1.0,
    };
    let mut idx: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { neutral })
        .collect();
    let avg = idx.iter().sum::<f64>() / m as f64;
    match kind {
        DecompositionKind::Additive => idx.iter_mut().for_each(|v| *v -= avg),
        DecompositionKind::Multiplicative => idx.iter_mut().for_each(|v| *v /= avg),
    }
    idx
}

fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Seasonal strength `max(0, 1 − Var(R)/Var(S + R))` from an additive
/// classical decomposition, over the span where the trend is defined.
pub fn seasonal_strength(y: &[f64], m: usize) -> f64 {
    if m <= 1 || y.len() < 2 * m {
        return 0.0;
    }
    let trend = centred_moving_average(y, m);
    let idx = seasonal_indices(y, m, DecompositionKind::Additive);
    let mut remainder = Vec::new();
    let mut detrended = Vec::new();
    for (t, (v, tr)) in y.iter().zip(&trend).enumerate() {
        if let Some(tr) = tr {
            detrended.push(v - tr);
            remainder.push(v - tr - idx[t % m]);
        }
    }
    let vd = variance(&detrended);
    if vd <= 0.0 {
        return 0.0;
    }
    (1.0 - variance(&remainder) / vd).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_even_order() {
        let y: Vec<f64> = (0..8).map(f64::from).collect();
        let ma = centred_moving_average(&y, 4);
        assert_eq!(ma[0], None);
        assert_eq!(ma[1], None);
        // linear input is reproduced by a symmetric filter
        assert_eq!(ma[2], Some(2.0));
        assert_eq!(ma[5], Some(5.0));
        assert_eq!(ma[6], None);
    }

    #[test]
    fn multiplicative_indices_recover_pattern() {
        let pattern = [0.8, 1.2, 1.0, 1.0];
        let y: Vec<f64> = (0..40).map(|t| 100.0 * pattern[t % 4]).collect();
        let idx = seasonal_indices(&y, 4, DecompositionKind::Multiplicative);
        for (a, b) in idx.iter().zip(pattern) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(is_seasonal(&y, 4));
        assert!(seasonal_strength(&y, 4) > 0.99);
    }

    #[test]
    fn white_noise_is_not_seasonal() {
        let y: Vec<f64> = (0..60).map(|t| ((t * 7919) % 13) as f64).collect();
        assert!(seasonal_strength(&y, 1) == 0.0);
        let trend: Vec<f64> = (0..60).map(f64::from).collect();
        assert!(seasonal_strength(&trend, 12) < 0.1);
    }
}
