//! Minimal dense layers for the two policy networks. The networks are tiny
//! (2-3 inputs, one hidden layer, at most 9 logits), so everything is plain
//! `Vec` arithmetic with hand-written backprop.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Fully connected layer, weights row-major `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense<F> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<F>,
    pub b: Vec<F>,
}

impl<F: Real> Dense<F> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            w: vec![F::zero(); in_dim * out_dim],
            b: vec![F::zero(); out_dim],
        }
    }

    /// Zero-mean normal weights with scale `1/sqrt(in_dim)`, zero biases.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = 1.0 / (in_dim as f64).sqrt();
        let mut layer = Self::zeros(in_dim, out_dim);
        for w in layer.w.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *w = F::of(z * scale);
        }
        layer
    }

    pub fn forward(&self, input: &[F]) -> Vec<F> {
        debug_assert_eq!(input.len(), self.in_dim);
        let mut out = self.b.clone();
        for (row, o) in out.iter_mut().enumerate() {
            let w = &self.w[row * self.in_dim..(row + 1) * self.in_dim];
            for (wi, xi) in w.iter().zip(input) {
                *o = *o + *wi * *xi;
            }
        }
        out
    }

    /// Backprop through the layer: accumulates weight/bias gradients into
    /// `grad` and returns the gradient with respect to the input.
    pub fn backward(&self, input: &[F], d_out: &[F], grad: &mut Dense<F>) -> Vec<F> {
        debug_assert_eq!(d_out.len(), self.out_dim);
        let mut d_in = vec![F::zero(); self.in_dim];
        for (row, &d) in d_out.iter().enumerate() {
            grad.b[row] += d;
            let w = &self.w[row * self.in_dim..(row + 1) * self.in_dim];
            let gw = &mut grad.w[row * self.in_dim..(row + 1) * self.in_dim];
            for col in 0..self.in_dim {
                gw[col] += d * input[col];
                d_in[col] += d * w[col];
            }
        }
        d_in
    }
}

pub fn tanh_inplace<F: Real>(v: &mut [F]) {
    v.iter_mut().for_each(|x| *x = x.tanh());
}

/// Stable log-softmax.
pub fn log_softmax<F: Real>(logits: &[F]) -> Vec<F> {
    let max = logits
        .iter()
        .copied()
        .fold(F::neg_infinity(), |a, b| if b > a { b } else { a });
    let log_sum = logits
        .iter()
        .map(|&l| (l - max).exp())
        .sum::<F>()
        .ln()
        + max;
    logits.iter().map(|&l| l - log_sum).collect()
}
