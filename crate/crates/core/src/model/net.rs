//! Convolutional residual policy-value network with hand-written backprop.
//!
//! ```text
//! input planes ─ conv3x3 ─ relu ─ [ conv3x3 ─ relu ─ conv3x3 ─ +skip ─ relu ] x blocks ─┐
//!   policy: conv1x1 ─ relu ─ dropout ─ conv1x1 (4 direction scores per cell)
//!           line logit = sum of its direction's score over the 5 line cells + bias
//!           softmax over the whole action space
//!   value:  conv1x1 ─ relu ─ fc ─ relu ─ dropout ─ fc ─ tanh
//! ```
//!
//! All parameters live in one flat vector; [`Layout`] names the tensors in
//! checkpoint order.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::scalar::{matmul, Mat, Scalar};
use super::{ModelConfig, ModelError};
use crate::action::{action_count, index_to_line};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arch {
    pub size: usize,
    pub in_planes: usize,
    pub channels: usize,
    pub blocks: usize,
    pub policy_channels: usize,
    pub value_hidden: usize,
}

impl Arch {
    pub fn new(size: usize, in_planes: usize, cfg: &ModelConfig) -> Self {
        Self {
            size,
            in_planes,
            channels: cfg.channels,
            blocks: cfg.blocks,
            policy_channels: cfg.policy_channels,
            value_hidden: cfg.value_hidden,
        }
    }

    pub fn cells(&self) -> usize {
        self.size * self.size
    }

    pub fn actions(&self) -> usize {
        action_count(self.size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BlockIds {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub tensors: Vec<Tensor>,
    stem_w: usize,
    stem_b: usize,
    blocks: Vec<BlockIds>,
    pol_w: usize,
    pol_b: usize,
    line_w: usize,
    line_b: usize,
    val_w: usize,
    val_b: usize,
    fc1_w: usize,
    fc1_b: usize,
    fc2_w: usize,
    fc2_b: usize,
}

impl Layout {
    fn new(a: &Arch) -> Self {
        let mut tensors = Vec::new();
        let mut push = |name: String, len: usize| {
            let offset = tensors.last().map_or(0, |t: &Tensor| t.offset + t.len);
            tensors.push(Tensor { name, offset, len });
            tensors.len() - 1
        };
        let c = a.channels;
        let stem_w = push("stem.weight".into(), c * a.in_planes * 9);
        let stem_b = push("stem.bias".into(), c);
        let blocks = (0..a.blocks)
            .map(|i| BlockIds {
                w1: push(format!("block{i}.conv1.weight"), c * c * 9),
                b1: push(format!("block{i}.conv1.bias"), c),
                w2: push(format!("block{i}.conv2.weight"), c * c * 9),
                b2: push(format!("block{i}.conv2.bias"), c),
            })
            .collect();
        let pol_w = push("policy.conv.weight".into(), a.policy_channels * c);
        let pol_b = push("policy.conv.bias".into(), a.policy_channels);
        let line_w = push("policy.line.weight".into(), 4 * a.policy_channels);
        let line_b = push("policy.line.bias".into(), 4);
        let val_w = push("value.conv.weight".into(), c);
        let val_b = push("value.conv.bias".into(), 1);
        let fc1_w = push("value.fc1.weight".into(), a.value_hidden * a.cells());
        let fc1_b = push("value.fc1.bias".into(), a.value_hidden);
        let fc2_w = push("value.fc2.weight".into(), a.value_hidden);
        let fc2_b = push("value.fc2.bias".into(), 1);
        Self {
            tensors,
            stem_w,
            stem_b,
            blocks,
            pol_w,
            pol_b,
            line_w,
            line_b,
            val_w,
            val_b,
            fc1_w,
            fc1_b,
            fc2_w,
            fc2_b,
        }
    }

    pub fn param_count(&self) -> usize {
        self.tensors.last().map_or(0, |t| t.offset + t.len)
    }

    fn range(&self, id: usize) -> std::ops::Range<usize> {
        let t = &self.tensors[id];
        t.offset..t.offset + t.len
    }
}

/// Activations of one forward pass, kept for backprop.
pub(crate) struct Cache<F> {
    input: Vec<F>,
    /// Trunk outputs: stem, then one per residual block.
    trunk: Vec<Vec<F>>,
    /// Inner activation of each residual block.
    inner: Vec<Vec<F>>,
    pol_hidden: Vec<F>,
    pol_mask: Option<Vec<F>>,
    log_probs: Vec<F>,
    val_plane: Vec<F>,
    val_hidden: Vec<F>,
    val_mask: Option<Vec<F>>,
    pub value: F,
}

impl<F: Scalar> Cache<F> {
    pub fn probs(&self) -> impl Iterator<Item = F> + '_ {
        self.log_probs.iter().map(|l| l.exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValueNet<F: Scalar> {
    arch: Arch,
    config: ModelConfig,
    layout: Layout,
    pub(crate) params: Vec<F>,
    /// For each action: the five direction-score indices (`dir * cells + cell`).
    line_cells: Vec<[u32; 5]>,
    line_dir: Vec<u8>,
}

fn relu<F: Scalar>(v: &mut [F]) {
    for x in v {
        if *x < F::zero() {
            *x = F::zero();
        }
    }
}

/// 3x3 patches with zero padding: `(c * 9) x cells`.
fn im2col<F: Scalar>(n: usize, channels: usize, input: &[F]) -> Vec<F> {
    let cells = n * n;
    let mut col = vec![F::zero(); channels * 9 * cells];
    for c in 0..channels {
        let plane = &input[c * cells..(c + 1) * cells];
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &mut col[((c * 9) + ky * 3 + kx) * cells..][..cells];
                for y in 0..n {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= n as isize {
                        continue;
                    }
                    for x in 0..n {
                        let sx = x as isize + kx as isize - 1;
                        if sx < 0 || sx >= n as isize {
                            continue;
                        }
                        row[y * n + x] = plane[sy as usize * n + sx as usize];
                    }
                }
            }
        }
    }
    col
}

/// Adjoint of [`im2col`], accumulating into `grad`.
fn col2im<F: Scalar>(n: usize, channels: usize, col: &[F], grad: &mut [F]) {
    let cells = n * n;
    for c in 0..channels {
        let plane = &mut grad[c * cells..(c + 1) * cells];
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &col[((c * 9) + ky * 3 + kx) * cells..][..cells];
                for y in 0..n {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= n as isize {
                        continue;
                    }
                    for x in 0..n {
                        let sx = x as isize + kx as isize - 1;
                        if sx < 0 || sx >= n as isize {
                            continue;
                        }
                        plane[sy as usize * n + sx as usize] += row[y * n + x];
                    }
                }
            }
        }
    }
}

fn add_bias<F: Scalar>(out: &mut [F], bias: &[F], cells: usize) {
    for (row, &b) in out.chunks_mut(cells).zip(bias) {
        for v in row {
            *v += b;
        }
    }
}

fn row_sums_into<F: Scalar>(m: &[F], cells: usize, out: &mut [F]) {
    for (row, o) in m.chunks(cells).zip(out) {
        *o += row.iter().fold(F::zero(), |a, &b| a + b);
    }
}

fn dropout_mask<F: Scalar, R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Vec<F> {
    let keep = F::from_f64(1.0 / (1.0 - p));
    (0..len)
        .map(|_| if rng.random::<f64>() < p { F::zero() } else { keep })
        .collect()
}

impl<F: Scalar> PolicyValueNet<F> {
    /// Freshly initialised network.
    pub fn new<R: Rng + ?Sized>(arch: Arch, config: ModelConfig, rng: &mut R) -> Self {
        let mut net = Self::zeroed(arch, config);
        let layout = net.layout.clone();
        let c = arch.channels;
        let mut fill = |id: usize, std: f64, params: &mut [F]| {
            let normal = Normal::new(0.0, std).expect("finite std");
            for v in &mut params[layout.range(id)] {
                *v = F::from_f64(normal.sample(rng));
            }
        };
        let he = |fan_in: usize| (2.0 / fan_in as f64).sqrt();
        fill(layout.stem_w, he(arch.in_planes * 9), &mut net.params);
        for b in &layout.blocks {
            fill(b.w1, he(c * 9), &mut net.params);
            // Second conv of each block starts small.
            fill(b.w2, 0.1 * he(c * 9), &mut net.params);
        }
        fill(layout.pol_w, he(c), &mut net.params);
        fill(layout.line_w, 0.01, &mut net.params);
        fill(layout.val_w, he(c), &mut net.params);
        fill(layout.fc1_w, he(arch.cells()), &mut net.params);
        fill(layout.fc2_w, 0.01, &mut net.params);
        net
    }

    /// All parameters zero. Used when loading checkpoints.
    pub fn zeroed(arch: Arch, config: ModelConfig) -> Self {
        let n = arch.size;
        let cells = arch.cells();
        let mut line_cells = Vec::with_capacity(arch.actions());
        let mut line_dir = Vec::with_capacity(arch.actions());
        for i in 0..arch.actions() {
            let line = index_to_line(i, n).expect("index within action space");
            let d = line.dir.index();
            line_cells.push(line.points().map(|p| (d * cells + p.y as usize * n + p.x as usize) as u32));
            line_dir.push(d as u8);
        }
        let layout = Layout::new(&arch);
        Self {
            arch,
            config,
            params: vec![F::zero(); layout.param_count()],
            layout,
            line_cells,
            line_dir,
        }
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn conv3x3(&self, layout: &Layout, w: usize, b: usize, c_in: usize, c_out: usize, input: &[F]) -> Vec<F> {
        let n = self.arch.size;
        let cells = n * n;
        let col = im2col(n, c_in, input);
        let mut out = vec![F::zero(); c_out * cells];
        let weight = &self.params[layout.range(w)];
        matmul(Mat::new(weight, c_out, c_in * 9), Mat::new(&col, c_in * 9, cells), &mut out, false);
        add_bias(&mut out, &self.params[layout.range(b)], cells);
        out
    }

    fn conv1x1(&self, layout: &Layout, w: usize, b: usize, c_in: usize, c_out: usize, input: &[F]) -> Vec<F> {
        let cells = self.arch.cells();
        let mut out = vec![F::zero(); c_out * cells];
        let weight = &self.params[layout.range(w)];
        matmul(Mat::new(weight, c_out, c_in), Mat::new(input, c_in, cells), &mut out, false);
        add_bias(&mut out, &self.params[layout.range(b)], cells);
        out
    }

    /// Forward pass over a `in_planes * cells` input. Dropout is applied only
    /// when `dropout_rng` is given and the configured rate is positive.
    pub(crate) fn forward<R: Rng + ?Sized>(&self, input: &[F], mut dropout_rng: Option<&mut R>) -> Cache<F> {
        let a = &self.arch;
        let layout = &self.layout;
        let cells = a.cells();
        let c = a.channels;
        debug_assert_eq!(input.len(), a.in_planes * cells);

        let mut h = self.conv3x3(layout, layout.stem_w, layout.stem_b, a.in_planes, c, input);
        relu(&mut h);
        let mut trunk = vec![h];
        let mut inner = Vec::with_capacity(a.blocks);
        for b in &layout.blocks {
            let x = trunk.last().expect("stem output");
            let mut t = self.conv3x3(layout, b.w1, b.b1, c, c, x);
            relu(&mut t);
            let mut u = self.conv3x3(layout, b.w2, b.b2, c, c, &t);
            for (u, &x) in u.iter_mut().zip(x) {
                *u += x;
            }
            relu(&mut u);
            inner.push(t);
            trunk.push(u);
        }
        let top = trunk.last().expect("trunk output");

        let p = self.config.dropout;
        let use_dropout = p > 0.0 && dropout_rng.is_some();

        // policy head
        let mut pol_hidden = self.conv1x1(layout, layout.pol_w, layout.pol_b, c, a.policy_channels, top);
        relu(&mut pol_hidden);
        let pol_mask = use_dropout.then(|| dropout_mask(pol_hidden.len(), p, *dropout_rng.as_mut().unwrap()));
        let dropped: Vec<F> = match &pol_mask {
            Some(m) => pol_hidden.iter().zip(m).map(|(&h, &m)| h * m).collect(),
            None => pol_hidden.clone(),
        };
        let mut scores = vec![F::zero(); 4 * cells];
        matmul(
            Mat::new(&self.params[layout.range(layout.line_w)], 4, a.policy_channels),
            Mat::new(&dropped, a.policy_channels, cells),
            &mut scores,
            false,
        );
        let line_bias = &self.params[layout.range(layout.line_b)];
        let mut logits: Vec<F> = self
            .line_cells
            .iter()
            .zip(&self.line_dir)
            .map(|(idx, &d)| idx.iter().fold(line_bias[d as usize], |acc, &i| acc + scores[i as usize]))
            .collect();
        let max = logits.iter().fold(F::neg_infinity(), |m, &v| m.max(v));
        let sum = logits.iter().fold(F::zero(), |s, &v| s + (v - max).exp());
        let log_norm = max + sum.ln();
        for l in &mut logits {
            *l = *l - log_norm;
        }

        // value head
        let mut val_plane = self.conv1x1(layout, layout.val_w, layout.val_b, c, 1, top);
        relu(&mut val_plane);
        let mut val_hidden = self.params[layout.range(layout.fc1_b)].to_vec();
        matmul(
            Mat::new(&self.params[layout.range(layout.fc1_w)], a.value_hidden, cells),
            Mat::new(&val_plane, cells, 1),
            &mut val_hidden,
            true,
        );
        relu(&mut val_hidden);
        let val_mask = use_dropout.then(|| dropout_mask(val_hidden.len(), p, *dropout_rng.as_mut().unwrap()));
        let fc2 = &self.params[layout.range(layout.fc2_w)];
        let mut pre = self.params[layout.range(layout.fc2_b)][0];
        for (j, (&h, &w)) in val_hidden.iter().zip(fc2).enumerate() {
            let m = val_mask.as_ref().map_or(F::one(), |m| m[j]);
            pre += h * m * w;
        }

        Cache {
            input: input.to_vec(),
            trunk,
            inner,
            pol_hidden,
            pol_mask,
            log_probs: logits,
            val_plane,
            val_hidden,
            val_mask,
            value: pre.tanh(),
        }
    }

    /// Per-example loss `(z - v)^2 - pi . log p` without the weight penalty.
    pub(crate) fn example_loss(cache: &Cache<F>, pi: &[F], z: F) -> (F, F) {
        let dv = z - cache.value;
        let ce = pi
            .iter()
            .zip(&cache.log_probs)
            .filter(|(&t, _)| t != F::zero())
            .fold(F::zero(), |s, (&t, &lp)| s - t * lp);
        (dv * dv, ce)
    }

    /// Adds `scale * d(loss)/d(theta)` for one example to `grad`. `pi` must sum
    /// to one.
    pub(crate) fn backward(&self, cache: &Cache<F>, pi: &[F], z: F, scale: F, grad: &mut [F]) {
        let a = &self.arch;
        let layout = &self.layout;
        let cells = a.cells();
        let c = a.channels;
        let two = F::from_f64(2.0);
        let top = cache.trunk.last().expect("trunk output");
        let mut d_top = vec![F::zero(); c * cells];

        // value head
        let v = cache.value;
        let d_pre = scale * (-two) * (z - v) * (F::one() - v * v);
        grad[layout.range(layout.fc2_b)][0] += d_pre;
        let fc2 = layout.range(layout.fc2_w);
        let mut d_hidden = vec![F::zero(); a.value_hidden];
        for j in 0..a.value_hidden {
            let m = cache.val_mask.as_ref().map_or(F::one(), |m| m[j]);
            let h = cache.val_hidden[j];
            grad[fc2.start + j] += d_pre * h * m;
            if h > F::zero() {
                d_hidden[j] = d_pre * self.params[fc2.start + j] * m;
            }
        }
        add_slice(&mut grad[layout.range(layout.fc1_b)], &d_hidden);
        matmul(
            Mat::new(&d_hidden, a.value_hidden, 1),
            Mat::new(&cache.val_plane, 1, cells),
            &mut grad[layout.range(layout.fc1_w)],
            true,
        );
        let mut d_plane = vec![F::zero(); cells];
        matmul(
            Mat::new(&self.params[layout.range(layout.fc1_w)], a.value_hidden, cells).t(),
            Mat::new(&d_hidden, a.value_hidden, 1),
            &mut d_plane,
            false,
        );
        for (d, &r) in d_plane.iter_mut().zip(&cache.val_plane) {
            if r <= F::zero() {
                *d = F::zero();
            }
        }
        row_sums_into(&d_plane, cells, &mut grad[layout.range(layout.val_b)]);
        matmul(Mat::new(&d_plane, 1, cells), Mat::new(top, c, cells).t(), &mut grad[layout.range(layout.val_w)], true);
        matmul(
            Mat::new(&self.params[layout.range(layout.val_w)], 1, c).t(),
            Mat::new(&d_plane, 1, cells),
            &mut d_top,
            true,
        );

        // policy head
        let mut d_scores = vec![F::zero(); 4 * cells];
        let line_b = layout.range(layout.line_b);
        for (((idx, &d), &lp), &t) in self.line_cells.iter().zip(&self.line_dir).zip(&cache.log_probs).zip(pi) {
            let g = scale * (lp.exp() - t);
            grad[line_b.start + d as usize] += g;
            for &i in idx {
                d_scores[i as usize] += g;
            }
        }
        let pc = a.policy_channels;
        let dropped: Vec<F> = match &cache.pol_mask {
            Some(m) => cache.pol_hidden.iter().zip(m).map(|(&h, &m)| h * m).collect(),
            None => cache.pol_hidden.clone(),
        };
        matmul(Mat::new(&d_scores, 4, cells), Mat::new(&dropped, pc, cells).t(), &mut grad[layout.range(layout.line_w)], true);
        let mut d_pol = vec![F::zero(); pc * cells];
        matmul(
            Mat::new(&self.params[layout.range(layout.line_w)], 4, pc).t(),
            Mat::new(&d_scores, 4, cells),
            &mut d_pol,
            false,
        );
        for (i, d) in d_pol.iter_mut().enumerate() {
            let m = cache.pol_mask.as_ref().map_or(F::one(), |m| m[i]);
            *d = if cache.pol_hidden[i] > F::zero() { *d * m } else { F::zero() };
        }
        row_sums_into(&d_pol, cells, &mut grad[layout.range(layout.pol_b)]);
        matmul(Mat::new(&d_pol, pc, cells), Mat::new(top, c, cells).t(), &mut grad[layout.range(layout.pol_w)], true);
        matmul(Mat::new(&self.params[layout.range(layout.pol_w)], pc, c).t(), Mat::new(&d_pol, pc, cells), &mut d_top, true);

        // residual tower, last block first
        let mut d_out = d_top;
        for (bi, b) in layout.blocks.iter().enumerate().rev() {
            let out = &cache.trunk[bi + 1];
            let x = &cache.trunk[bi];
            let t = &cache.inner[bi];
            for (d, &o) in d_out.iter_mut().zip(out) {
                if o <= F::zero() {
                    *d = F::zero();
                }
            }
            // d_out is now the gradient at the pre-activation sum, shared by
            // the skip path and conv2.
            let mut d_t = self.conv_backward(layout, b.w2, b.b2, c, c, t, &d_out, grad);
            for (d, &tv) in d_t.iter_mut().zip(t) {
                if tv <= F::zero() {
                    *d = F::zero();
                }
            }
            let d_x = self.conv_backward(layout, b.w1, b.b1, c, c, x, &d_t, grad);
            for (d, dx) in d_out.iter_mut().zip(d_x) {
                *d += dx;
            }
        }
        for (d, &h) in d_out.iter_mut().zip(&cache.trunk[0]) {
            if h <= F::zero() {
                *d = F::zero();
            }
        }
        let col = im2col(a.size, a.in_planes, &cache.input);
        row_sums_into(&d_out, cells, &mut grad[layout.range(layout.stem_b)]);
        matmul(
            Mat::new(&d_out, c, cells),
            Mat::new(&col, a.in_planes * 9, cells).t(),
            &mut grad[layout.range(layout.stem_w)],
            true,
        );
    }

    /// Accumulates weight and bias gradients of a 3x3 conv and returns the
    /// gradient with respect to its input.
    #[allow(clippy::too_many_arguments)]
    fn conv_backward(
        &self,
        layout: &Layout,
        w: usize,
        b: usize,
        c_in: usize,
        c_out: usize,
        input: &[F],
        d_out: &[F],
        grad: &mut [F],
    ) -> Vec<F> {
        let n = self.arch.size;
        let cells = n * n;
        let col = im2col(n, c_in, input);
        row_sums_into(d_out, cells, &mut grad[layout.range(b)]);
        matmul(Mat::new(d_out, c_out, cells), Mat::new(&col, c_in * 9, cells).t(), &mut grad[layout.range(w)], true);
        let mut d_col = vec![F::zero(); c_in * 9 * cells];
        matmul(
            Mat::new(&self.params[layout.range(w)], c_out, c_in * 9).t(),
            Mat::new(d_out, c_out, cells),
            &mut d_col,
            false,
        );
        let mut d_in = vec![F::zero(); c_in * cells];
        col2im(n, c_in, &d_col, &mut d_in);
        d_in
    }

    /// Inference: policy over the full action space and value, no dropout.
    pub fn evaluate_input(&self, input: &[F]) -> Result<(Vec<f32>, f32), ModelError> {
        let expected = self.arch.in_planes * self.arch.cells();
        if input.len() != expected {
            return Err(ModelError::ShapeMismatch { expected, found: input.len() });
        }
        let cache = self.forward::<rand_chacha::ChaCha8Rng>(input, None);
        let policy = cache.probs().map(|p| p.to_f64() as f32).collect();
        Ok((policy, cache.value.to_f64() as f32))
    }
}

fn add_slice<F: Scalar>(dst: &mut [F], src: &[F]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
