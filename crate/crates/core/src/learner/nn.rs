//! Fully connected networks over a flat parameter vector, with hand-written
//! backpropagation, and the Adam optimizer.
//!
//! Keeping every parameter in one `Vec<f64>` makes optimizer state, global
//! gradient clipping, checkpointing and finite-difference checks trivial.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: &mut Array2<f64>) {
        match self {
            Activation::Relu => x.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => x.mapv_inplace(f64::tanh),
        }
    }

    /// Multiplies `grad` by the derivative, given the activation output.
    fn backprop(self, out: &Array2<f64>, grad: &mut Array2<f64>) {
        match self {
            Activation::Relu => grad.zip_mut_with(out, |g, &o| {
                if o <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Tanh => grad.zip_mut_with(out, |g, &o| *g *= 1.0 - o * o),
        }
    }
}

/// Layer sizes and activation of a multilayer perceptron; the last layer is
/// linear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub sizes: Vec<usize>,
    pub activation: Activation,
}

impl MlpShape {
    pub fn new(input: usize, hidden: &[usize], output: usize, activation: Activation) -> Self {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        MlpShape { sizes, activation }
    }

    pub fn input(&self) -> usize {
        self.sizes[0]
    }

    pub fn output(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Offsets of (weights, bias) per layer; weights are `in x out`, row-major.
    fn layout(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let mut off = 0;
        self.sizes.windows(2).map(move |w| {
            let (i, o) = (w[0], w[1]);
            let start = off;
            off += i * o + o;
            (start, i, o, start + i * o)
        })
    }

    /// Fan-in scaled normal weights, zero biases; the last layer is scaled
    /// by `out_scale`.
    pub fn init<R: Rng + ?Sized>(&self, out_scale: f64, rng: &mut R) -> Vec<f64> {
        let mut p = vec![0.0; self.param_count()];
        let layers = self.sizes.len() - 1;
        for (k, (w, i, o, _)) in self.layout().enumerate() {
            let gain = if self.activation == Activation::Relu {
                2f64.sqrt()
            } else {
                1.0
            };
            let std = gain / (i as f64).sqrt() * if k + 1 == layers { out_scale } else { 1.0 };
            let normal = Normal::new(0.0, std).expect("finite std");
            for v in &mut p[w..w + i * o] {
                *v = normal.sample(rng);
            }
        }
        p
    }

    /// Forward pass; returns the layer outputs (input first, output last).
    pub fn forward(&self, params: &[f64], x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        assert_eq!(params.len(), self.param_count());
        let layers = self.sizes.len() - 1;
        let mut acts = vec![x.to_owned()];
        for (k, (w, i, o, b)) in self.layout().enumerate() {
            let wm = ArrayView2::from_shape((i, o), &params[w..w + i * o]).expect("layout");
            let bias = ArrayView1::from(&params[b..b + o]);
            let mut h = acts[k].dot(&wm);
            h += &bias;
            if k + 1 < layers {
                self.activation.apply(&mut h);
            }
            acts.push(h);
        }
        acts
    }

    pub fn predict(&self, params: &[f64], x: ArrayView2<f64>) -> Array2<f64> {
        self.forward(params, x).pop().expect("output layer")
    }

    /// Accumulates `d loss / d params` into `grad` and returns `d loss / d input`.
    pub fn backward(&self, params: &[f64], acts: &[Array2<f64>], dout: Array2<f64>, grad: &mut [f64]) -> Array2<f64> {
        let spans: Vec<_> = self.layout().collect();
        let mut delta = dout;
        for k in (0..spans.len()).rev() {
            let (w, i, o, b) = spans[k];
            let input = &acts[k];
            {
                let mut gw = ArrayViewMut2::from_shape((i, o), &mut grad[w..w + i * o]).expect("layout");
                gw += &input.t().dot(&delta);
            }
            {
                let mut gb = ArrayViewMut1::from(&mut grad[b..b + o]);
                gb += &delta.sum_axis(Axis(0));
            }
            let wm = ArrayView2::from_shape((i, o), &params[w..w + i * o]).expect("layout");
            let mut dx = delta.dot(&wm.t());
            if k > 0 {
                self.activation.backprop(input, &mut dx);
            }
            delta = dx;
        }
        delta
    }
}

/// An MLP optionally preceded by a trainable goal-embedding table whose row
/// is appended to the input features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalNet {
    pub mlp: MlpShape,
    /// `(rows, dim)` of the embedding table, stored before the MLP weights.
    pub embedding: Option<(usize, usize)>,
}

impl GoalNet {
    pub fn new(
        features: usize,
        embedding: Option<(usize, usize)>,
        hidden: &[usize],
        output: usize,
        act: Activation,
    ) -> Self {
        let input = features + embedding.map_or(0, |(_, d)| d);
        GoalNet {
            mlp: MlpShape::new(input, hidden, output, act),
            embedding,
        }
    }

    fn embed_len(&self) -> usize {
        self.embedding.map_or(0, |(r, d)| r * d)
    }

    pub fn param_count(&self) -> usize {
        self.embed_len() + self.mlp.param_count()
    }

    pub fn init<R: Rng + ?Sized>(&self, out_scale: f64, rng: &mut R) -> Vec<f64> {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut p: Vec<f64> = (0..self.embed_len()).map(|_| normal.sample(rng)).collect();
        p.extend(self.mlp.init(out_scale, rng));
        p
    }

    fn input(&self, params: &[f64], x: ArrayView2<f64>, goals: &[usize]) -> Array2<f64> {
        match self.embedding {
            None => x.to_owned(),
            Some((_, d)) => {
                let n = x.nrows();
                let f = x.ncols();
                let mut input = Array2::zeros((n, f + d));
                input.slice_mut(s![.., ..f]).assign(&x);
                for (r, &g) in goals.iter().enumerate() {
                    let row = ArrayView1::from(&params[g * d..(g + 1) * d]);
                    input.slice_mut(s![r, f..]).assign(&row);
                }
                input
            }
        }
    }

    pub fn forward(&self, params: &[f64], x: ArrayView2<f64>, goals: &[usize]) -> Vec<Array2<f64>> {
        let input = self.input(params, x, goals);
        self.mlp.forward(&params[self.embed_len()..], input.view())
    }

    pub fn predict(&self, params: &[f64], x: ArrayView2<f64>, goals: &[usize]) -> Array2<f64> {
        self.forward(params, x, goals).pop().expect("output layer")
    }

    pub fn backward(&self, params: &[f64], acts: &[Array2<f64>], goals: &[usize], dout: Array2<f64>, grad: &mut [f64]) {
        let e = self.embed_len();
        let (gembed, gmlp) = grad.split_at_mut(e);
        let dx = self.mlp.backward(&params[e..], acts, dout, gmlp);
        if let Some((_, d)) = self.embedding {
            let f = dx.ncols() - d;
            for (r, &g) in goals.iter().enumerate() {
                for j in 0..d {
                    gembed[g * d + j] += dx[[r, f + j]];
                }
            }
        }
    }
}

/// Adam with the usual defaults (`beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

/// Scales the gradients so their joint L2 norm is at most `max_norm`;
/// returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [&mut [f64]], max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .map(|g| g.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let k = max_norm / norm;
        for g in grads.iter_mut() {
            g.iter_mut().for_each(|v| *v *= k);
        }
    }
    norm
}

/// Row `i` of a 2-D array as an owned vector.
pub fn row(a: &Array2<f64>, i: usize) -> Array1<f64> {
    a.row(i).to_owned()
}
