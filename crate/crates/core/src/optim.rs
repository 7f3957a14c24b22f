//! Derivative-free minimisation by Nelder–Mead with box clamping and a
//! fixed restart schedule.

/// Simplex edge lengths (relative to the coordinate magnitude) for the three
/// successive runs. Each restart begins at the previous best vertex.
const RESTART_SCALES: [f64; 3] = [0.10, 0.05, 0.02];

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_iter: usize,
    pub f_tol: f64,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 500,
            f_tol: 1e-8,
            lower: None,
            upper: None,
            restarts: RESTART_SCALES.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn with_bounds(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self {
            lower: Some(lower),
            upper: Some(upper),
            ..Self::default()
        }
    }

    pub fn max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn restarts(mut self, n: usize) -> Self {
        self.restarts = n.clamp(1, RESTART_SCALES.len());
        self
    }

    fn clamp(&self, x: &mut [f64]) {
        if let (Some(lo), Some(hi)) = (&self.lower, &self.upper) {
            for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
                *v = v.clamp(*l, *h);
            }
        }
    }

    fn initial_simplex(&self, x0: &[f64], scale: f64) -> Vec<Vec<f64>> {
        let n = x0.len();
        let mut simplex = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            let mut step = scale * x0[i].abs().max(0.1);
            if let (Some(lo), Some(hi)) = (&self.lower, &self.upper) {
                step = step.min(0.5 * (hi[i] - lo[i]).max(0.0));
                if v[i] + step > hi[i] {
                    step = -step;
                }
            }
            if step == 0.0 {
                step = scale;
            }
            v[i] += step;
            self.clamp(&mut v);
            simplex.push(v);
        }
        simplex
    }

    /// Minimises `f` from `x0`. Non-finite objective values count as +∞.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut eval = |x: &[f64], count: &mut usize| {
            *count += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut best = x0.to_vec();
        self.clamp(&mut best);
        let mut evaluations = 0;
        let mut best_f = eval(&best, &mut evaluations);
        let mut iterations = 0;
        let mut converged = false;
        if best.is_empty() {
            return Minimum {
                x: best,
                fx: best_f,
                iterations,
                evaluations,
                converged: true,
            };
        }
        for &scale in RESTART_SCALES.iter().take(self.restarts) {
            let (x, fx, it, ok) = self.run(&mut eval, &best, best_f, scale, &mut evaluations);
            iterations += it;
            converged = ok;
            if fx <= best_f {
                best = x;
                best_f = fx;
            }
        }
        Minimum {
            x: best,
            fx: best_f,
            iterations,
            evaluations,
            converged,
        }
    }

    fn run<F>(
        &self,
        eval: &mut F,
        x0: &[f64],
        f0: f64,
        scale: f64,
        evaluations: &mut usize,
    ) -> (Vec<f64>, f64, usize, bool)
    where
        F: FnMut(&[f64], &mut usize) -> f64,
    {
        let n = x0.len();
        let mut simplex = self.initial_simplex(x0, scale);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        values.push(f0);
        for v in simplex.iter().skip(1) {
            values.push(eval(v, evaluations));
        }
        let mut order: Vec<usize> = (0..=n).collect();
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];

        for iter in 0..self.max_iter {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let (ib, iw, isw) = (order[0], order[n], order[n - 1]);
            let (fb, fw) = (values[ib], values[iw]);
            if fw.is_finite() && (fw - fb).abs() <= self.f_tol * (1.0 + fb.abs()) {
                return (simplex[ib].clone(), fb, iter, true);
            }
            let spread = (0..n)
                .map(|j| {
                    let (lo, hi) = simplex.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                        (l.min(v[j]), h.max(v[j]))
                    });
                    hi - lo
                })
                .fold(0.0, f64::max);
            if spread < 1e-12 {
                return (simplex[ib].clone(), fb, iter, fw.is_finite());
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &i in order.iter().take(n) {
                for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += v / n as f64;
                }
            }

            // reflection
            for j in 0..n {
                trial[j] = centroid[j] + (centroid[j] - simplex[iw][j]);
            }
            self.clamp(&mut trial);
            let fr = eval(&trial, evaluations);
            if fr < fb {
                for j in 0..n {
                    trial2[j] = centroid[j] + 2.0 * (trial[j] - centroid[j]);
                }
                self.clamp(&mut trial2);
                let fe = eval(&trial2, evaluations);
                if fe < fr {
                    simplex[iw].copy_from_slice(&trial2);
                    values[iw] = fe;
                } else {
                    simplex[iw].copy_from_slice(&trial);
                    values[iw] = fr;
                }
                continue;
            }
            if fr < values[isw] {
                simplex[iw].copy_from_slice(&trial);
                values[iw] = fr;
                continue;
            }
            // contraction, outside if the reflection improved on the worst
            let outside = fr < fw;
            for j in 0..n {
                let target = if outside { trial[j] } else { simplex[iw][j] };
                trial2[j] = centroid[j] + 0.5 * (target - centroid[j]);
            }
            self.clamp(&mut trial2);
            let fc = eval(&trial2, evaluations);
            if fc < fr.min(fw) {
                simplex[iw].copy_from_slice(&trial2);
                values[iw] = fc;
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[ib].clone();
            for &i in order.iter().skip(1) {
                for j in 0..n {
                    simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
                }
                values[i] = eval(&simplex[i], evaluations);
            }
        }
        let ib = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        (simplex[ib].clone(), values[ib], self.max_iter, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = NelderMead::default().max_iter(2000).minimize(rosen, &[-1.2, 1.0]);
        assert!((m.x[0] - 1.0).abs() < 1e-3, "{:?}", m.x);
        assert!((m.x[1] - 1.0).abs() < 2e-3, "{:?}", m.x);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2) + (x[1] + 3.0).powi(2);
        let nm = NelderMead::with_bounds(vec![0.0, 0.0], vec![1.0, 1.0]);
        let m = nm.minimize(f, &[0.5, 0.5]);
        assert!((m.x[0] - 1.0).abs() < 1e-6);
        assert!(m.x[1].abs() < 1e-6);
    }

    #[test]
    fn infinite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.3).powi(2) };
        let m = NelderMead::default().minimize(f, &[2.0]);
        assert!((m.x[0] - 0.3).abs() < 1e-4);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 1.5).powi(4) + v.sin()).sum::<f64>();
        let a = NelderMead::default().minimize(f, &[0.0, 0.2, -0.4]);
        let b = NelderMead::default().minimize(f, &[0.0, 0.2, -0.4]);
        assert_eq!(a.x, b.x);
        assert_eq!(a.fx.to_bits(), b.fx.to_bits());
    }
}
