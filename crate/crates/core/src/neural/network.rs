//! Parameters, batched forward pass and reverse-mode gradient.
//!
//! Every block owns `mlp_layers` ReLU layers followed by a linear backcast
//! head (`hidden → L`) and a linear forecast head (`hidden → H·K`). Weights
//! are stored `in × out` row-major so a batch is `X · W + b`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::window::ScaledWindow;
use super::NBeatsConfig;
use crate::error::{Error, Result};
use crate::metrics::quantile_loss;
use crate::types::QuantileGrid;

/// One named tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl TensorShape {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    fan_in: usize,
    fan_out: usize,
}

#[derive(Debug, Clone)]
struct BlockLayout {
    layers: Vec<Dense>,
    backcast: Dense,
    forecast: Dense,
}

#[derive(Debug, Clone)]
struct Layout {
    blocks: Vec<BlockLayout>,
    shapes: Vec<TensorShape>,
    len: usize,
}

impl Layout {
    fn new(cfg: &NBeatsConfig) -> Self {
        let mut shapes = Vec::new();
        let mut len = 0;
        let mut dense = |name: String, fan_in: usize, fan_out: usize| {
            let w = len;
            let b = w + fan_in * fan_out;
            len = b + fan_out;
            shapes.push(TensorShape {
                name: format!("{name}.weight"),
                rows: fan_in,
                cols: fan_out,
            });
            shapes.push(TensorShape {
                name: format!("{name}.bias"),
                rows: 1,
                cols: fan_out,
            });
            Dense { w, b, fan_in, fan_out }
        };
        let blocks = (0..cfg.n_blocks())
            .map(|i| {
                let layers = (0..cfg.mlp_layers)
                    .map(|l| {
                        let fan_in = if l == 0 { cfg.input_size } else { cfg.hidden_size };
                        dense(format!("block{i}.fc{l}"), fan_in, cfg.hidden_size)
                    })
                    .collect();
                let backcast = dense(format!("block{i}.backcast"), cfg.hidden_size, cfg.input_size);
                let forecast = dense(format!("block{i}.forecast"), cfg.hidden_size, cfg.output_size());
                BlockLayout {
                    layers,
                    backcast,
                    forecast,
                }
            })
            .collect();
        Self { blocks, shapes, len }
    }
}

/// Network weights as one flat vector plus the configuration that shapes it.
#[derive(Debug, Clone)]
pub struct ModelParams {
    config: NBeatsConfig,
    layout: Layout,
    values: Vec<f64>,
}

impl PartialEq for ModelParams {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.values == other.values
    }
}

impl ModelParams {
    pub fn zeros(config: &NBeatsConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(config);
        let values = vec![0.0; layout.len];
        Ok(Self {
            config: config.clone(),
            layout,
            values,
        })
    }

    /// Uniform Xavier weights `U(±√(6 / (fan_in + fan_out)))`, zero biases.
    pub fn xavier<R: Rng + ?Sized>(config: &NBeatsConfig, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let denses: Vec<Dense> = p
            .layout
            .blocks
            .iter()
            .flat_map(|b| b.layers.iter().chain([&b.backcast, &b.forecast]).copied())
            .collect();
        for d in denses {
            let limit = (6.0 / (d.fan_in + d.fan_out) as f64).sqrt();
            for w in &mut p.values[d.w..d.w + d.fan_in * d.fan_out] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(p)
    }

    pub fn from_values(config: &NBeatsConfig, values: Vec<f64>) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        if values.len() != p.values.len() {
            return Err(Error::Shape(format!(
                "{} parameters for a network of {}",
                values.len(),
                p.values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite parameter".into()));
        }
        p.values = values;
        Ok(p)
    }

    pub fn config(&self) -> &NBeatsConfig {
        &self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Tensor table in storage order.
    pub fn shapes(&self) -> &[TensorShape] {
        &self.layout.shapes
    }

    /// Flat offset range of the named tensor.
    pub fn tensor_range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        for s in &self.layout.shapes {
            if s.name == name {
                return Some(start..start + s.len());
            }
            start += s.len();
        }
        None
    }
}

/// Row-major stacked windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    /// `size × L`.
    pub context: Vec<f64>,
    /// `size × L`, 1.0 where observed.
    pub mask: Vec<f64>,
    /// `size × target_len`; may be empty for inference.
    pub target: Vec<f64>,
    pub target_len: usize,
}

impl Batch {
    pub fn from_windows(windows: &[ScaledWindow]) -> Result<Self> {
        let first = windows.first().ok_or_else(|| Error::Shape("empty batch".into()))?;
        let (l, h) = (first.context.len(), first.target.len());
        if windows
            .iter()
            .any(|w| w.context.len() != l || w.mask.len() != l || w.target.len() != h)
        {
            return Err(Error::Shape("windows in a batch differ in shape".into()));
        }
        Ok(Self {
            size: windows.len(),
            context: windows.iter().flat_map(|w| w.context.iter().copied()).collect(),
            mask: windows
                .iter()
                .flat_map(|w| w.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }))
                .collect(),
            target: windows.iter().flat_map(|w| w.target.iter().copied()).collect(),
            target_len: h,
        })
    }

    fn check(&self, cfg: &NBeatsConfig) -> Result<()> {
        let l = cfg.input_size;
        if self.size == 0
            || self.context.len() != self.size * l
            || self.mask.len() != self.size * l
            || self.target.len() != self.size * self.target_len
            || self.target_len > cfg.horizon
        {
            return Err(Error::Shape(format!(
                "batch of {} does not fit L={l}, H={}",
                self.size, cfg.horizon
            )));
        }
        Ok(())
    }
}

/// `C = op(A) · op(B) + beta · C` with `op(A)` m×k and `op(B)` k×n, all
/// stored row-major; a transposed operand is stored as its transpose.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], at: bool, b: &[f64], bt: bool, beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if at { (1, m) } else { (k, 1) };
    let (rsb, csb) = if bt { (1, k) } else { (n, 1) };
    // SAFETY: the strides address exactly the m×k, k×n and m×n extents
    // checked above, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn add_bias(rows: usize, out: &mut [f64], bias: &[f64]) {
    for r in out.chunks_exact_mut(bias.len()).take(rows) {
        for (o, b) in r.iter_mut().zip(bias) {
            *o += b;
        }
    }
}

fn add_colsum(g: &[f64], cols: usize, acc: &mut [f64]) {
    for r in g.chunks_exact(cols) {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
}

/// Activations kept for the backward pass.
struct Tape {
    /// Input residual of each block, `B × L`.
    inputs: Vec<Vec<f64>>,
    /// Post-ReLU outputs of each block's layers, `B × hidden`.
    hidden: Vec<Vec<Vec<f64>>>,
    /// Sum of forecast heads before rearrangement, `B × H·K`.
    raw: Vec<f64>,
}

fn forward_tape(p: &ModelParams, batch: &Batch) -> Tape {
    let cfg = &p.config;
    let (bs, l, hid, out) = (batch.size, cfg.input_size, cfg.hidden_size, cfg.output_size());
    let v = &p.values;
    let mut x = batch.context.clone();
    let mut raw = vec![0.0; bs * out];
    let mut inputs = Vec::with_capacity(p.layout.blocks.len());
    let mut hidden = Vec::with_capacity(p.layout.blocks.len());
    let mut backcast = vec![0.0; bs * l];
    for blk in &p.layout.blocks {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(blk.layers.len());
        for d in &blk.layers {
            let a_in: &[f64] = acts.last().map_or(&x, |a| a);
            let mut h = vec![0.0; bs * hid];
            gemm(bs, d.fan_in, hid, a_in, false, &v[d.w..], false, 0.0, &mut h);
            add_bias(bs, &mut h, &v[d.b..d.b + hid]);
            h.iter_mut().for_each(|z| *z = z.max(0.0));
            acts.push(h);
        }
        let top = acts.last().expect("at least one layer");
        let (bc, fc) = (blk.backcast, blk.forecast);
        gemm(bs, hid, out, top, false, &v[fc.w..], false, 1.0, &mut raw);
        add_bias(bs, &mut raw, &v[fc.b..fc.b + out]);
        gemm(bs, hid, l, top, false, &v[bc.w..], false, 0.0, &mut backcast);
        add_bias(bs, &mut backcast, &v[bc.b..bc.b + l]);
        let next: Vec<f64> = x
            .iter()
            .zip(&backcast)
            .zip(&batch.mask)
            .map(|((xi, b), m)| (xi - b) * m)
            .collect();
        inputs.push(std::mem::replace(&mut x, next));
        hidden.push(acts);
    }
    Tape { inputs, hidden, raw }
}

/// Sorts every K-row in place and returns, per row, the source index of
/// each sorted position.
fn rearrange(values: &mut [f64], k: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(values.len());
    let mut idx: Vec<usize> = Vec::with_capacity(k);
    let mut tmp = vec![0.0; k];
    for row in values.chunks_exact_mut(k) {
        idx.clear();
        idx.extend(0..k);
        idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
        for (t, &i) in tmp.iter_mut().zip(&idx) {
            *t = row[i];
        }
        row.copy_from_slice(&tmp);
        perm.extend_from_slice(&idx);
    }
    perm
}

/// Scaled quantile outputs for a batch, `B × H × K` row-major with each
/// K-row non-decreasing.
pub fn forward_batch(params: &ModelParams, batch: &Batch) -> Result<Vec<f64>> {
    batch.check(&params.config)?;
    let mut raw = forward_tape(params, batch).raw;
    rearrange(&mut raw, params.config.quantile_grid.len());
    Ok(raw)
}

/// Scaled `H × K` quantile outputs for one window.
pub fn forward(params: &ModelParams, window: &ScaledWindow) -> Result<Vec<f64>> {
    let mut w = window.clone();
    w.target.clear();
    forward_batch(params, &Batch::from_windows(std::slice::from_ref(&w))?)
}

/// Mean quantile loss over the first `target.len()` rows of an `H × K`
/// output.
pub fn loss(outputs: &[f64], target: &[f64], grid: &QuantileGrid) -> f64 {
    let k = grid.len();
    if target.is_empty() {
        return 0.0;
    }
    let total: f64 = target
        .iter()
        .zip(outputs.chunks_exact(k))
        .map(|(&y, row)| {
            row.iter()
                .zip(grid.probs())
                .map(|(&yhat, &q)| quantile_loss(y, yhat, q).expect("grid levels lie in (0, 1)"))
                .sum::<f64>()
        })
        .sum();
    total / (target.len() * k) as f64
}

/// Mean per-window loss of a batch.
pub fn batch_loss(params: &ModelParams, batch: &Batch) -> Result<f64> {
    let out = forward_batch(params, batch)?;
    let per = params.config.output_size();
    let h = batch.target_len;
    let grid = &params.config.quantile_grid;
    let total: f64 = out
        .chunks_exact(per)
        .zip(batch.target.chunks_exact(h.max(1)))
        .map(|(o, t)| loss(o, &t[..h], grid))
        .sum();
    Ok(total / batch.size as f64)
}

/// Mean batch loss and its gradient. The rearrangement is differentiated as
/// the fixed permutation it applied, and the quantile-loss subgradient at
/// `ŷ = y` is taken from the `ŷ > y` side.
pub fn loss_and_grad(params: &ModelParams, batch: &Batch) -> Result<(f64, Vec<f64>)> {
    batch.check(&params.config)?;
    let cfg = &params.config;
    let (bs, l, hid) = (batch.size, cfg.input_size, cfg.hidden_size);
    let (k, out) = (cfg.quantile_grid.len(), cfg.output_size());
    let th = batch.target_len;
    let v = &params.values;
    let tape = forward_tape(params, batch);
    let mut sorted = tape.raw.clone();
    let perm = rearrange(&mut sorted, k);

    let probs = cfg.quantile_grid.probs();
    let norm = 1.0 / (bs * th.max(1) * k) as f64;
    let mut total = 0.0;
    let mut g_out = vec![0.0; bs * out];
    for b in 0..bs {
        for h in 0..th {
            let y = batch.target[b * th + h];
            let row = (b * cfg.horizon + h) * k;
            for (j, &q) in probs.iter().enumerate() {
                let yhat = sorted[row + j];
                let d = yhat - y;
                total += if d >= 0.0 { (1.0 - q) * d } else { -q * d };
                g_out[row + perm[row + j]] = if d >= 0.0 { 1.0 - q } else { -q } * norm;
            }
        }
    }
    let loss = total * norm;

    let mut grad = vec![0.0; v.len()];
    let mut g_x = vec![0.0; bs * l];
    let mut g_bc = vec![0.0; bs * l];
    let mut g_h = vec![0.0; bs * hid];
    for (bi, blk) in params.layout.blocks.iter().enumerate().rev() {
        let acts = &tape.hidden[bi];
        let top = acts.last().expect("at least one layer");
        let (bc, fc) = (blk.backcast, blk.forecast);
        for ((gb, gx), m) in g_bc.iter_mut().zip(g_x.iter_mut()).zip(&batch.mask) {
            *gx *= m;
            *gb = -*gx;
        }
        gemm(hid, bs, out, top, true, &g_out, false, 1.0, &mut grad[fc.w..]);
        add_colsum(&g_out, out, &mut grad[fc.b..fc.b + out]);
        gemm(hid, bs, l, top, true, &g_bc, false, 1.0, &mut grad[bc.w..]);
        add_colsum(&g_bc, l, &mut grad[bc.b..bc.b + l]);
        gemm(bs, out, hid, &g_out, false, &v[fc.w..], true, 0.0, &mut g_h);
        gemm(bs, l, hid, &g_bc, false, &v[bc.w..], true, 1.0, &mut g_h);
        for (li, d) in blk.layers.iter().enumerate().rev() {
            for (g, a) in g_h.iter_mut().zip(&acts[li]) {
                if *a <= 0.0 {
                    *g = 0.0;
                }
            }
            let a_in: &[f64] = if li == 0 { &tape.inputs[bi] } else { &acts[li - 1] };
            gemm(d.fan_in, bs, hid, a_in, true, &g_h, false, 1.0, &mut grad[d.w..]);
            add_colsum(&g_h, hid, &mut grad[d.b..d.b + hid]);
            if li == 0 {
                // Residual path plus the gradient through this block's MLP.
                gemm(bs, hid, l, &g_h, false, &v[d.w..], true, 1.0, &mut g_x);
            } else {
                let mut g_prev = vec![0.0; bs * hid];
                gemm(bs, hid, hid, &g_h, false, &v[d.w..], true, 0.0, &mut g_prev);
                g_h = g_prev;
            }
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::window::make_window;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small(seed: u64) -> NBeatsConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        NBeatsConfig {
            input_size: rng.random_range(2..7),
            stacks: rng.random_range(1..3),
            blocks_per_stack: rng.random_range(1..3),
            mlp_layers: rng.random_range(1..4),
            hidden_size: rng.random_range(2..7),
            horizon: rng.random_range(1..4),
            quantile_grid: QuantileGrid::uniform(rng.random_range(1..5)).unwrap(),
        }
    }

    fn random_batch(cfg: &NBeatsConfig, n: usize, seed: u64) -> Batch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let windows: Vec<ScaledWindow> = (0..n)
            .map(|_| {
                let len = rng.random_range(cfg.horizon + 1..cfg.input_size + cfg.horizon + 3);
                let y: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..3.0)).collect();
                make_window(&y, len - cfg.horizon, cfg.input_size, cfg.horizon).unwrap()
            })
            .collect();
        Batch::from_windows(&windows).unwrap()
    }

    fn params(cfg: &NBeatsConfig, seed: u64) -> ModelParams {
        let mut p = ModelParams::xavier(cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        // Non-zero biases so every parameter group is exercised.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
        for v in p.values_mut() {
            if *v == 0.0 {
                *v = rng.random_range(-0.3..0.3);
            }
        }
        p
    }

    #[test]
    fn output_shape_and_zero_params() {
        let cfg = NBeatsConfig {
            hidden_size: 8,
            ..NBeatsConfig::default()
        };
        let p = ModelParams::zeros(&cfg).unwrap();
        let y: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let w = make_window(&y, 30, 48, 24).unwrap();
        let out = forward(&p, &w).unwrap();
        assert_eq!(out.len(), 24 * 99);
        assert!(out.iter().all(|&o| o == 0.0));
    }

    #[test]
    fn layout_matches_shapes() {
        let cfg = small(3);
        let p = ModelParams::zeros(&cfg).unwrap();
        assert_eq!(p.shapes().iter().map(TensorShape::len).sum::<usize>(), p.len());
        let per_block = cfg.input_size * cfg.hidden_size
            + (cfg.mlp_layers - 1) * cfg.hidden_size * cfg.hidden_size
            + cfg.mlp_layers * cfg.hidden_size
            + cfg.hidden_size * (cfg.input_size + cfg.output_size())
            + cfg.input_size
            + cfg.output_size();
        assert_eq!(p.len(), per_block * cfg.n_blocks());
    }

    #[test]
    fn loss_examples() {
        let grid = QuantileGrid::new(vec![0.5]).unwrap();
        assert_eq!(loss(&[0.0], &[1.0], &grid), 0.5);
        let grid = QuantileGrid::uniform(3).unwrap();
        assert_eq!(loss(&[2.0, 2.0, 2.0, -1.0, -1.0, -1.0], &[2.0, -1.0], &grid), 0.0);
    }

    /// Independent oracle: per-window forward plus the scalar loss.
    fn reference_loss(p: &ModelParams, batch: &Batch) -> f64 {
        let cfg = p.config();
        let l = cfg.input_size;
        let h = batch.target_len;
        (0..batch.size)
            .map(|b| {
                let w = ScaledWindow {
                    context: batch.context[b * l..(b + 1) * l].to_vec(),
                    target: vec![],
                    scale: 1.0,
                    mask: batch.mask[b * l..(b + 1) * l].iter().map(|&m| m > 0.0).collect(),
                };
                loss(
                    &forward(p, &w).unwrap(),
                    &batch.target[b * h..(b + 1) * h],
                    &cfg.quantile_grid,
                )
            })
            .sum::<f64>()
            / batch.size as f64
    }

    #[test]
    fn batched_loss_matches_per_window() {
        for seed in 0..5 {
            let cfg = small(seed);
            let p = params(&cfg, seed);
            let batch = random_batch(&cfg, 5, seed + 100);
            let (l, _) = loss_and_grad(&p, &batch).unwrap();
            let r = reference_loss(&p, &batch);
            assert!((l - r).abs() < 1e-12 * (1.0 + r), "{l} vs {r}");
            assert!((batch_loss(&p, &batch).unwrap() - r).abs() < 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn finite_differences() {
        for seed in 0..10 {
            let cfg = small(seed);
            let p = params(&cfg, seed);
            let batch = random_batch(&cfg, 4, seed + 50);
            let (_, g) = loss_and_grad(&p, &batch).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..p.len() {
                let f = |h: f64| {
                    let mut q = p.clone();
                    q.values_mut()[i] += h;
                    reference_loss(&q, &batch)
                };
                // Shrink the step while a kink lies inside it.
                let base = 1e-4 * p.values()[i].abs().max(1e-2);
                let f0 = f(0.0);
                let mut err = f64::INFINITY;
                for s in 0..6 {
                    let h = base * 10f64.powi(-s);
                    let (fp, fm) = (f(h), f(-h));
                    let (fwd, bwd) = ((fp - f0) / h, (f0 - fm) / h);
                    let central = (fp - fm) / (2.0 * h);
                    let rel = (g[i] - central).abs() / g[i].abs().max(central.abs()).max(1e-6);
                    err = err.min(rel);
                    if (fwd - bwd).abs() <= 1e-3 * fwd.abs().max(bwd.abs()).max(1e-6) {
                        break;
                    }
                }
                worst = worst.max(err);
            }
            assert!(worst < 1e-4, "seed {seed}: max rel err {worst}");
        }
    }

    #[test]
    fn unused_parameters_have_zero_gradient() {
        let cfg = small(7);
        let p = params(&cfg, 7);
        let batch = random_batch(&cfg, 3, 8);
        let (_, g) = loss_and_grad(&p, &batch).unwrap();
        let last = cfg.n_blocks() - 1;
        for t in ["weight", "bias"] {
            let r = p.tensor_range(&format!("block{last}.backcast.{t}")).unwrap();
            assert!(g[r].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn duplicated_batch_same_gradient() {
        let cfg = small(11);
        let p = params(&cfg, 11);
        let batch = random_batch(&cfg, 3, 12);
        let double = Batch {
            size: 6,
            context: [batch.context.clone(), batch.context.clone()].concat(),
            mask: [batch.mask.clone(), batch.mask.clone()].concat(),
            target: [batch.target.clone(), batch.target.clone()].concat(),
            target_len: batch.target_len,
        };
        let (l1, g1) = loss_and_grad(&p, &batch).unwrap();
        let (l2, g2) = loss_and_grad(&p, &double).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
        }
    }

    proptest! {
        #[test]
        fn rows_sorted_and_loss_nonnegative(seed in 0u64..1000) {
            let cfg = small(seed);
            let p = params(&cfg, seed);
            let batch = random_batch(&cfg, 2, seed);
            let out = forward_batch(&p, &batch).unwrap();
            for row in out.chunks_exact(cfg.quantile_grid.len()) {
                prop_assert!(row.windows(2).all(|w| w[0] <= w[1]));
            }
            prop_assert!(batch_loss(&p, &batch).unwrap() >= 0.0);
        }
    }
}
