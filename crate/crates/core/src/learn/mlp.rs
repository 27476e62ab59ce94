//! Fully connected network: ReLU hidden layers, linear output, optional
//! softmax head. Gradients are exact reverse-mode derivatives.

use alloc::vec::Vec;

use num_traits::Float;
use rand_distr::{Distribution, Normal, Uniform};

use crate::rng::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Linear,
    Softmax,
}

/// One affine layer; `weights` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    head: Head,
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.layers.iter().map(|l| alloc::vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| alloc::vec![0.0; l.bias.len()]).collect(),
        }
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += scale * y);
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += scale * y);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).flatten().all(|v| v.is_finite())
    }

    /// Euclidean norm over every parameter.
    pub fn norm(&self) -> f64 {
        self.weights.iter().chain(&self.bias).flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rescales so the norm is at most `max_norm`. Returns the norm before
    /// clipping.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let n = self.norm();
        if n > max_norm {
            let k = max_norm / n;
            self.weights.iter_mut().chain(self.bias.iter_mut()).flatten().for_each(|v| *v *= k);
        }
        n
    }
}

/// Activations recorded by a forward pass: `inputs[l]` feeds layer `l`.
#[derive(Debug, Clone)]
pub struct Trace {
    inputs: Vec<Vec<f64>>,
    logits: Vec<f64>,
    output: Vec<f64>,
}

impl Trace {
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Weight initialization schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Weights `N(0, 2/fan_in)`, zero biases.
    He,
    /// Weights and biases `U(−1/√fan_in, 1/√fan_in)`, the usual framework
    /// default for linear layers. Keeps initial logits small on unscaled
    /// inputs.
    FanInUniform,
}

impl Mlp {
    /// He-initialized weights, zero biases.
    pub fn new(sizes: &[usize], head: Head, seed: u64) -> Result<Self> {
        Self::with_init(sizes, head, Init::He, seed)
    }

    pub fn with_init(sizes: &[usize], head: Head, init: Init, seed: u64) -> Result<Self> {
        Self::check_sizes(sizes)?;
        let mut r = rng(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let fan_in = w[0] as f64;
                let (weights, bias) = match init {
                    Init::He => {
                        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
                        (
                            (0..w[0] * w[1]).map(|_| normal.sample(&mut r)).collect(),
                            alloc::vec![0.0; w[1]],
                        )
                    }
                    Init::FanInUniform => {
                        let u = Uniform::new_inclusive(-1.0 / fan_in.sqrt(), 1.0 / fan_in.sqrt()).expect("finite bounds");
                        (
                            (0..w[0] * w[1]).map(|_| u.sample(&mut r)).collect(),
                            (0..w[1]).map(|_| u.sample(&mut r)).collect(),
                        )
                    }
                };
                Layer {
                    inputs: w[0],
                    outputs: w[1],
                    weights,
                    bias,
                }
            })
            .collect();
        Ok(Self { layers, head })
    }

    pub fn zeros(sizes: &[usize], head: Head) -> Result<Self> {
        Self::check_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                inputs: w[0],
                outputs: w[1],
                weights: alloc::vec![0.0; w[0] * w[1]],
                bias: alloc::vec![0.0; w[1]],
            })
            .collect();
        Ok(Self { layers, head })
    }

    pub fn from_layers(layers: Vec<Layer>, head: Head) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for l in &layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::InvalidArgument("layer parameter count does not match its shape".into()));
            }
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::DimMismatch {
                    expected: pair[0].outputs,
                    got: pair[1].inputs,
                });
            }
        }
        Ok(Self { layers, head })
    }

    fn check_sizes(sizes: &[usize]) -> Result<()> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument("layer sizes must be positive, at least two".into()));
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = alloc::vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(x)?.output)
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<Trace> {
        if x.len() != self.input_dim() {
            return Err(Error::DimMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(&a);
            if i < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            inputs.push(core::mem::replace(&mut a, z));
        }
        let output = match self.head {
            Head::Linear => a.clone(),
            Head::Softmax => softmax(&a),
        };
        Ok(Trace {
            inputs,
            logits: a,
            output,
        })
    }

    /// Gradients given `dL/d(output)`, passing through the head.
    pub fn backward(&self, trace: &Trace, grad_out: &[f64]) -> Result<Gradients> {
        if grad_out.len() != self.output_dim() {
            return Err(Error::DimMismatch {
                expected: self.output_dim(),
                got: grad_out.len(),
            });
        }
        let g = match self.head {
            Head::Linear => grad_out.to_vec(),
            Head::Softmax => {
                let s = &trace.output;
                let dot: f64 = s.iter().zip(grad_out).map(|(a, b)| a * b).sum();
                s.iter().zip(grad_out).map(|(si, gi)| si * (gi - dot)).collect()
            }
        };
        self.backward_logits(trace, &g)
    }

    /// Gradients given `dL/d(logits)`, bypassing the head.
    pub fn backward_logits(&self, trace: &Trace, grad_logits: &[f64]) -> Result<Gradients> {
        if grad_logits.len() != self.output_dim() {
            return Err(Error::DimMismatch {
                expected: self.output_dim(),
                got: grad_logits.len(),
            });
        }
        let n = self.layers.len();
        let mut weights = alloc::vec![Vec::new(); n];
        let mut bias = alloc::vec![Vec::new(); n];
        let mut delta = grad_logits.to_vec();
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let input = &trace.inputs[l];
            let mut gw = Vec::with_capacity(layer.weights.len());
            for d in &delta {
                gw.extend(input.iter().map(|a| d * a));
            }
            weights[l] = gw;
            bias[l] = delta.clone();
            if l > 0 {
                // Back through the affine map, then the ReLU that produced `input`.
                let mut prev = alloc::vec![0.0; layer.inputs];
                for (row, d) in layer.weights.chunks_exact(layer.inputs).zip(&delta) {
                    prev.iter_mut().zip(row).for_each(|(p, w)| *p += d * w);
                }
                prev.iter_mut().zip(input).for_each(|(p, a)| {
                    if *a <= 0.0 {
                        *p = 0.0
                    }
                });
                delta = prev;
            }
        }
        Ok(Gradients { weights, bias })
    }

    /// Plain gradient descent step: `θ ← θ − lr · g`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads.weights.iter().zip(&grads.bias)) {
            layer.weights.iter_mut().zip(gw).for_each(|(w, g)| *w -= lr * g);
            layer.bias.iter_mut().zip(gb).for_each(|(b, g)| *b -= lr * g);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Every parameter in the order of [`Mlp::params_mut`].
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    /// Mutable access to every parameter in a fixed order (layer by layer,
    /// weights then biases). Used by gradient checks.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }
}

impl Gradients {
    /// Flattened in the same order as [`Mlp::params_mut`].
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

/// Forward pass on `x` followed by [`Mlp::backward`].
pub fn mlp_backward(net: &Mlp, x: &[f64], grad_out: &[f64]) -> Result<Gradients> {
    let trace = net.forward_trace(x)?;
    net.backward(&trace, grad_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;

    #[test]
    fn zero_net_and_softmax_head() {
        let net = Mlp::zeros(&[3, 4, 2], Head::Linear).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        let net = Mlp::zeros(&[3, 2], Head::Softmax).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.5, 0.5]);
        assert!(net.forward(&[1.0]).is_err());
    }

    #[test]
    fn relu_blocks_negative_units() {
        let hidden = Layer {
            inputs: 1,
            outputs: 1,
            weights: vec![-1.0],
            bias: vec![0.0],
        };
        let out = Layer {
            inputs: 1,
            outputs: 1,
            weights: vec![5.0],
            bias: vec![0.25],
        };
        let net = Mlp::from_layers(vec![hidden, out], Head::Linear).unwrap();
        assert_eq!(net.forward(&[1.0]).unwrap(), vec![0.25]);
    }

    #[test]
    fn last_bias_gradient_is_grad_out() {
        let net = Mlp::new(&[3, 5, 2], Head::Linear, 1).unwrap();
        let g = mlp_backward(&net, &[0.1, 0.2, 0.3], &[0.7, -1.5]).unwrap();
        assert_eq!(g.bias[1], vec![0.7, -1.5]);
        let z = mlp_backward(&net, &[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap();
        assert!(z.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_central_differences() {
        let mut r = rng(42);
        for (trial, head) in [Head::Linear, Head::Softmax].into_iter().cycle().take(6).enumerate() {
            let sizes = [3, 4 + trial, 3];
            let mut net = Mlp::new(&sizes, head, trial as u64).unwrap();
            let x: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
            let loss = |n: &Mlp| n.forward(&x).unwrap().iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
            let analytic = mlp_backward(&net, &x, &c).unwrap().flatten();
            let h = 1e-6;
            let count = analytic.len();
            for i in 0..count {
                let orig = *net.params_mut().nth(i).unwrap();
                *net.params_mut().nth(i).unwrap() = orig + h;
                let up = loss(&net);
                *net.params_mut().nth(i).unwrap() = orig - h;
                let down = loss(&net);
                *net.params_mut().nth(i).unwrap() = orig;
                let numeric = (up - down) / (2.0 * h);
                let err = (numeric - analytic[i]).abs() / numeric.abs().max(analytic[i].abs()).max(1e-6);
                assert!(err < 1e-4, "param {i}: {numeric} vs {}", analytic[i]);
            }
        }
    }
}
