//! A small fully connected Q-network with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

/// Affine layer followed by an activation. Weights are row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
            activation,
        }
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect()
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Gradient buffers shaped like an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        let pairs = self
            .weights
            .iter_mut()
            .zip(&other.weights)
            .chain(self.bias.iter_mut().zip(&other.bias));
        for (a, b) in pairs {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.weights
            .iter_mut()
            .chain(self.bias.iter_mut())
            .flatten()
            .for_each(|x| *x *= c);
    }

    /// Flattened in the same order as [`Mlp::param`]: per layer, weights then bias.
    pub fn flat(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

/// Multi-layer perceptron; hidden layers use ReLU, the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Per-layer values kept from the forward pass.
struct Trace {
    /// `inputs[k]` feeds layer `k`; the last entry is the network output.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl Mlp {
    pub const HIDDEN: usize = 24;

    /// All-zero network with the given layer sizes.
    pub fn zeros(sizes: &[usize]) -> Self {
        let n = sizes.len() - 1;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let act = if k + 1 == n { Activation::Linear } else { Activation::Relu };
                Dense::zeros(w[0], w[1], act)
            })
            .collect();
        Mlp { layers }
    }

    /// He-uniform weights, zero biases.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        for layer in &mut net.layers {
            let limit = (6.0 / layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        net
    }

    /// The Q-network layout: 4 inputs, two hidden layers of 24, one output per action.
    pub fn q_network<R: Rng + ?Sized>(n_actions: usize, rng: &mut R) -> Self {
        Self::random(&[4, Self::HIDDEN, Self::HIDDEN, n_actions], rng)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Shape(format!(
                    "layer widths {} and {} do not chain",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        for l in &self.layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Shape("parameter buffer sizes disagree with layer widths".into()));
            }
            if l.weights.iter().chain(&l.bias).any(|x| !x.is_finite()) {
                return Err(Error::Shape("non-finite parameter".into()));
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "expected {} inputs, got {}",
                self.n_inputs(),
                x.len()
            )));
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let z = layer.pre_activation(inputs.last().unwrap());
            inputs.push(z.iter().map(|v| layer.activation.apply(*v)).collect());
            pre.push(z);
        }
        Trace { inputs, pre }
    }

    /// Q-value estimates for every action.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).inputs.pop().unwrap())
    }

    /// Gradient of `0.5 * (target - Q(x, action))^2` with respect to every parameter.
    pub fn backward(&self, x: &[f64], action: usize, target: f64) -> Result<Gradients> {
        self.check_input(x)?;
        if action >= self.n_outputs() {
            return Err(Error::Shape(format!("action {action} out of range")));
        }
        let trace = self.trace(x);
        let output = trace.inputs.last().unwrap();
        let mut grads = Gradients::zeros_like(self);

        let mut delta = vec![0.0; self.n_outputs()];
        delta[action] = output[action] - target;

        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            // fold the activation derivative into the error signal
            for (d, z) in delta.iter_mut().zip(&trace.pre[k]) {
                *d *= layer.activation.derivative(*z);
            }
            let input = &trace.inputs[k];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let row = &mut grads.weights[k][o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(input).for_each(|(g, xi)| *g = d * xi);
                grads.bias[k][o] = *d;
            }
            if k > 0 {
                let mut back = vec![0.0; layer.inputs];
                for (o, d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    back.iter_mut().zip(row).for_each(|(b, w)| *b += d * w);
                }
                delta = back;
            }
        }
        Ok(grads)
    }

    /// Plain gradient-descent step.
    pub fn descend(&mut self, grads: &Gradients, lr: f64) {
        for (k, layer) in self.layers.iter_mut().enumerate() {
            layer.weights.iter_mut().zip(&grads.weights[k]).for_each(|(w, g)| *w -= lr * g);
            layer.bias.iter_mut().zip(&grads.bias[k]).for_each(|(b, g)| *b -= lr * g);
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    fn locate(&self, mut i: usize) -> (usize, bool, usize) {
        for (k, l) in self.layers.iter().enumerate() {
            if i < l.weights.len() {
                return (k, true, i);
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return (k, false, i);
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn param(&self, i: usize) -> f64 {
        match self.locate(i) {
            (k, true, j) => self.layers[k].weights[j],
            (k, false, j) => self.layers[k].bias[j],
        }
    }

    pub fn set_param(&mut self, i: usize, v: f64) {
        match self.locate(i) {
            (k, true, j) => self.layers[k].weights[j] = v,
            (k, false, j) => self.layers[k].bias[j] = v,
        }
    }

    /// Smallest |pre-activation| of any ReLU unit for input `x`.
    pub fn min_hidden_margin(&self, x: &[f64]) -> f64 {
        let trace = self.trace(x);
        self.layers
            .iter()
            .zip(&trace.pre)
            .filter(|(l, _)| l.activation == Activation::Relu)
            .flat_map(|(_, z)| z.iter().map(|v| v.abs()))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent scalar-loop forward pass.
    fn naive_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for layer in &net.layers {
            let mut next = Vec::new();
            for o in 0..layer.outputs {
                let mut s = layer.bias[o];
                for i in 0..layer.inputs {
                    s += layer.weights[o * layer.inputs + i] * a[i];
                }
                if layer.activation == Activation::Relu && s < 0.0 {
                    s = 0.0;
                }
                next.push(s);
            }
            a = next;
        }
        a
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[4, 24, 24, 6]);
        assert_eq!(net.forward(&[0.3, 0.1, 1.0, 0.5]).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn dead_hidden_layers_pass_only_final_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = Mlp::q_network(5, &mut rng);
        for b in &mut net.layers[0].bias {
            *b = -100.0;
        }
        for b in &mut net.layers[1].bias {
            *b = -100.0;
        }
        net.layers[2].bias = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        assert_eq!(net.forward(&[1.0, 1.0, 1.0, 1.0]).unwrap(), net.layers[2].bias);
    }

    #[test]
    fn forward_matches_naive_loop() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let net = Mlp::q_network(7, &mut rng);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let a = net.forward(&x).unwrap();
            let b = naive_forward(&net, &x);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn shape_errors() {
        let net = Mlp::zeros(&[4, 24, 24, 3]);
        assert!(matches!(net.forward(&[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(net.backward(&[0.0; 4], 3, 1.0).is_err());
        let mut bad = net.clone();
        bad.layers[1].inputs = 23;
        assert!(bad.validate().is_err());
        net.validate().unwrap();
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::q_network(4, &mut rng);
        let x = [0.2, 0.9, 0.4, 0.6];
        let q = net.forward(&x).unwrap();
        let g = net.backward(&x, 2, q[2]).unwrap();
        assert!(g.flat().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_is_linear_in_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::q_network(4, &mut rng);
        let x = [0.2, 0.9, 0.4, 0.6];
        let q = net.forward(&x).unwrap()[1];
        let g1 = net.backward(&x, 1, q - 0.5).unwrap().flat();
        let g3 = net.backward(&x, 1, q - 1.5).unwrap().flat();
        for (a, b) in g1.iter().zip(&g3) {
            assert!((3.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-12));
        }
    }

    #[test]
    fn output_layer_gradient_only_on_taken_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::q_network(4, &mut rng);
        let g = net.backward(&[0.5; 4], 2, 10.0).unwrap();
        let last = net.layers.len() - 1;
        for (o, b) in g.bias[last].iter().enumerate() {
            assert_eq!(*b != 0.0, o == 2);
        }
    }

    #[test]
    fn flat_param_access_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut net = Mlp::q_network(3, &mut rng);
        assert_eq!(net.param_count(), 4 * 24 + 24 + 24 * 24 + 24 + 24 * 3 + 3);
        let i = 4 * 24 + 5;
        assert_eq!(net.param(i), net.layers[0].bias[5]);
        net.set_param(i, 7.0);
        assert_eq!(net.layers[0].bias[5], 7.0);
    }
}
