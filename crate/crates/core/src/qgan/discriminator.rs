use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;

const LEAK: f64 = 0.2;

/// Fully connected classifier from a probability vector to `(0, 1)`.
///
/// Hidden layers use a leaky rectifier, the output a logistic unit. All
/// weights and biases live in one flat vector so a single optimizer can
/// drive them. Inputs are multiplied by `N` first, so the uniform
/// distribution arrives as a vector of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    widths: Vec<usize>,
    params: Vec<f64>,
}

struct Pass {
    /// Layer inputs: `inputs[0]` is the scaled distribution.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations per layer.
    pre: Vec<Vec<f64>>,
    out: f64,
}

impl Discriminator {
    /// He-uniform weights, zero biases. `widths` runs from the input size
    /// to the single output, e.g. `[N, 50, 50, 1]`.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Self {
        assert!(widths.len() >= 2 && *widths.last().unwrap() == 1);
        let mut params = Vec::new();
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = math::sqrt(6.0 / fan_in as f64);
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(core::iter::repeat_n(0.0, fan_out));
        }
        Discriminator {
            widths: widths.to_vec(),
            params,
        }
    }

    /// Every weight and bias zero. Outputs 0.5 for any input.
    pub fn zeroed(widths: &[usize]) -> Self {
        assert!(widths.len() >= 2 && *widths.last().unwrap() == 1);
        let n = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Discriminator {
            widths: widths.to_vec(),
            params: vec![0.0; n],
        }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_len(&self) -> usize {
        self.widths[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.widths.len());
        let mut acc = 0;
        for w in self.widths.windows(2) {
            off.push(acc);
            acc += w[0] * w[1] + w[1];
        }
        off
    }

    fn run(&self, p: &[f64]) -> Pass {
        assert_eq!(p.len(), self.input_len(), "discriminator input length");
        let offsets = self.layer_offsets();
        let layers = self.widths.len() - 1;
        let scale = self.input_len() as f64;
        let mut inputs = vec![p.iter().map(|v| v * scale).collect::<Vec<_>>()];
        let mut pre = Vec::with_capacity(layers);
        for l in 0..layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[offsets[l]..offsets[l] + n_in * n_out];
            let b = &self.params[offsets[l] + n_in * n_out..offsets[l] + n_in * n_out + n_out];
            let h = &inputs[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| b[o] + w[o * n_in..(o + 1) * n_in].iter().zip(h).map(|(a, x)| a * x).sum::<f64>())
                .collect();
            if l + 1 < layers {
                inputs.push(z.iter().map(|&v| if v > 0.0 { v } else { LEAK * v }).collect());
            }
            pre.push(z);
        }
        let out = sigmoid(pre[layers - 1][0]);
        Pass { inputs, pre, out }
    }

    pub fn forward(&self, p: &[f64]) -> f64 {
        self.run(p).out
    }

    /// Binary cross-entropy of the output against `target` (1 = real).
    pub fn loss(&self, p: &[f64], target: f64) -> f64 {
        bce(self.run(p).pre.last().unwrap()[0], target)
    }

    /// Gradients of the cross-entropy loss with respect to every parameter
    /// (same layout as [`params`](Self::params)) and to the input vector.
    pub fn backward(&self, p: &[f64], target: f64) -> (Vec<f64>, Vec<f64>) {
        let pass = self.run(p);
        let offsets = self.layer_offsets();
        let layers = self.widths.len() - 1;
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = vec![pass.out - target];
        let mut input_grad = Vec::new();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let off = offsets[l];
            let h = &pass.inputs[l];
            for o in 0..n_out {
                for i in 0..n_in {
                    grads[off + o * n_in + i] = delta[o] * h[i];
                }
                grads[off + n_in * n_out + o] = delta[o];
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut back = vec![0.0; n_in];
            for o in 0..n_out {
                for i in 0..n_in {
                    back[i] += w[o * n_in + i] * delta[o];
                }
            }
            if l == 0 {
                let scale = n_in as f64;
                input_grad = back.into_iter().map(|g| g * scale).collect();
            } else {
                let z = &pass.pre[l - 1];
                delta = back
                    .iter()
                    .zip(z)
                    .map(|(g, &v)| if v > 0.0 { *g } else { LEAK * g })
                    .collect();
            }
        }
        (grads, input_grad)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + math::exp(-z))
    } else {
        let e = math::exp(z);
        e / (1.0 + e)
    }
}

/// Cross-entropy of `sigmoid(z)` against `t`, written on the logit.
fn bce(z: f64, t: f64) -> f64 {
    // log(1 + e^z) - t z
    let softplus = if z > 0.0 {
        z + math::ln(1.0 + math::exp(-z))
    } else {
        math::ln(1.0 + math::exp(z))
    };
    softplus - t * z
}
