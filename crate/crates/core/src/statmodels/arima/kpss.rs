//! KPSS level-stationarity test used to choose the differencing order.

/// 5% asymptotic critical value of the level-stationarity statistic.
pub const KPSS_CRITICAL: f64 = 0.463;

/// Bartlett truncation lag `min(⌊12 (n/100)^¼⌋, ⌊n/8⌋)`. The long
/// bandwidth keeps persistent stationary series from being differenced; the
/// `n/8` cap keeps the test able to reject on short trending series.
pub fn kpss_lag(n: usize) -> usize {
    ((12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize).min(n / 8)
}

/// KPSS statistic with a Newey–West long-run variance. Returns `None` for a
/// constant input, which is trivially stationary.
pub fn kpss_statistic(y: &[f64], lag: usize) -> Option<f64> {
    let n = y.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let e: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let mut s2 = e.iter().map(|v| v * v).sum::<f64>() / nf;
    for k in 1..=lag.min(n - 1) {
        let w = 1.0 - k as f64 / (lag as f64 + 1.0);
        let cov: f64 = (k..n).map(|t| e[t] * e[t - k]).sum::<f64>() / nf;
        s2 += 2.0 * w * cov;
    }
    if s2 <= 1e-12 * (1.0 + mean * mean) {
        return None;
    }
    Some(eta / (nf * nf * s2))
}

pub fn difference(y: &[f64], lag: usize) -> Vec<f64> {
    (lag..y.len()).map(|t| y[t] - y[t - lag]).collect()
}

/// Number of first differences (at most `max_d`) needed for the KPSS test
/// to stop rejecting level stationarity.
pub fn ndiffs(y: &[f64], max_d: usize) -> usize {
    let mut x = y.to_vec();
    let mut d = 0;
    while d < max_d && x.len() > 3 {
        match kpss_statistic(&x, kpss_lag(x.len())) {
            Some(stat) if stat > KPSS_CRITICAL => {
                d += 1;
                x = difference(&x, 1);
            }
            _ => break,
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn random_walk_needs_differencing() {
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 1.0).unwrap();
            let mut y = vec![0.0; 500];
            for t in 1..500 {
                y[t] = y[t - 1] + noise.sample(&mut rng);
            }
            if ndiffs(&y, 2) >= 1 {
                hits += 1;
            }
        }
        assert!(hits >= 18, "{hits}/20");
    }

    #[test]
    fn white_noise_is_stationary() {
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let noise = Normal::new(0.0, 1.0).unwrap();
            let y: Vec<f64> = (0..300).map(|_| noise.sample(&mut rng)).collect();
            if ndiffs(&y, 2) == 0 {
                hits += 1;
            }
        }
        assert!(hits >= 17, "{hits}/20");
    }

    #[test]
    fn constant_is_stationary() {
        assert_eq!(ndiffs(&[2.0; 40], 2), 0);
        assert_eq!(kpss_statistic(&[2.0; 40], 3), None);
    }

    #[test]
    fn linear_trend_differenced_once() {
        let y: Vec<f64> = (0..100).map(|t| t as f64 + ((t * 7) % 5) as f64).collect();
        assert_eq!(ndiffs(&y, 2), 1);
    }
}
