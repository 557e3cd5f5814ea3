use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::AgentError;

const SELU_ALPHA: f64 = 1.6732632423543772;
const SELU_LAMBDA: f64 = 1.0507009873554805;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Selu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Selu => {
                if z > 0.0 {
                    SELU_LAMBDA * z
                } else {
                    SELU_LAMBDA * SELU_ALPHA * (z.exp() - 1.0)
                }
            }
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Selu => {
                if z > 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * z.exp()
                }
            }
        }
    }

    fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Selu => 1,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Selu),
            _ => None,
        }
    }
}

/// Fully-connected value network. Hidden layers share one activation; the
/// output layer is linear with one unit per action.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layer_sizes: Vec<usize>,
    activation: Activation,
    /// Per layer, `out x in` row-major.
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) biases: Vec<Vec<f64>>,
}

/// Cached forward pass of a batch, consumed by the backward pass.
pub(crate) struct ForwardTrace {
    /// Per layer (0 = input): activations for each sample, flattened sample-major.
    pub activations: Vec<Vec<f64>>,
    /// Per layer l >= 1: pre-activations.
    pub pre_activations: Vec<Vec<f64>>,
    pub batch: usize,
}

impl QNetwork {
    /// He-style uniform initialization scaled by fan-in; biases start at zero.
    pub fn new<R: Rng>(layer_sizes: Vec<usize>, activation: Activation, rng: &mut R) -> Self {
        assert!(layer_sizes.len() >= 2, "need at least input and output layers");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 1..layer_sizes.len() {
            let fan_in = layer_sizes[l - 1];
            let bound = (6.0 / fan_in as f64).sqrt();
            weights.push(
                (0..layer_sizes[l] * fan_in).map(|_| rng.gen_range(-bound..bound)).collect(),
            );
            biases.push(vec![0.0; layer_sizes[l]]);
        }
        Self { layer_sizes, activation, weights, biases }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        if state.len() != self.input_dim() {
            return Err(AgentError::InputDimMismatch { got: state.len(), expected: self.input_dim() });
        }
        let mut a = state.to_vec();
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let n_out = self.layer_sizes[l + 1];
            let n_in = self.layer_sizes[l];
            let mut next = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut z = self.biases[l][o];
                for (w, x) in row.iter().zip(&a) {
                    z += w * x;
                }
                next[o] = if l == last { z } else { self.activation.apply(z) };
            }
            a = next;
        }
        Ok(a)
    }

    /// Batched forward pass keeping the caches needed for backprop.
    pub(crate) fn forward_trace(&self, states: &[&[f64]]) -> Result<ForwardTrace, AgentError> {
        let batch = states.len();
        let n_in = self.input_dim();
        for s in states {
            if s.len() != n_in {
                return Err(AgentError::InputDimMismatch { got: s.len(), expected: n_in });
            }
        }
        let mut activations = Vec::with_capacity(self.layer_sizes.len());
        let mut input = Vec::with_capacity(batch * n_in);
        for s in states {
            input.extend_from_slice(s);
        }
        activations.push(input);
        let mut pre_activations = Vec::with_capacity(self.weights.len());
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let (n_inl, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let prev = &activations[l];
            let mut pre = vec![0.0; batch * n_out];
            for b in 0..batch {
                let x = &prev[b * n_inl..(b + 1) * n_inl];
                let out = &mut pre[b * n_out..(b + 1) * n_out];
                for o in 0..n_out {
                    let row = &self.weights[l][o * n_inl..(o + 1) * n_inl];
                    let mut z = self.biases[l][o];
                    for (w, v) in row.iter().zip(x) {
                        z += w * v;
                    }
                    out[o] = z;
                }
            }
            let act: Vec<f64> = if l == last {
                pre.clone()
            } else {
                pre.iter().map(|&z| self.activation.apply(z)).collect()
            };
            pre_activations.push(pre);
            activations.push(act);
        }
        Ok(ForwardTrace { activations, pre_activations, batch })
    }

    pub(crate) fn activation_derivative(&self, z: f64) -> f64 {
        self.activation.derivative(z)
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flat parameter order: layer 0 weights, layer 0 biases, layer 1 weights, ...
    pub fn get_param(&self, index: usize) -> f64 {
        let mut i = index;
        for l in 0..self.weights.len() {
            if i < self.weights[l].len() {
                return self.weights[l][i];
            }
            i -= self.weights[l].len();
            if i < self.biases[l].len() {
                return self.biases[l][i];
            }
            i -= self.biases[l].len();
        }
        panic!("parameter index {index} out of range");
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let mut i = index;
        for l in 0..self.weights.len() {
            if i < self.weights[l].len() {
                self.weights[l][i] = value;
                return;
            }
            i -= self.weights[l].len();
            if i < self.biases[l].len() {
                self.biases[l][i] = value;
                return;
            }
            i -= self.biases[l].len();
        }
        panic!("parameter index {index} out of range");
    }

    /// Hard copy of all parameters from `src` (target-network sync).
    pub fn sync_from(&mut self, src: &QNetwork) {
        assert_eq!(self.layer_sizes, src.layer_sizes, "network shapes must match");
        self.weights.clone_from(&src.weights);
        self.biases.clone_from(&src.biases);
    }

    /// Checkpoint: magic `QNET`, u32 version, u32 layer count, u32 sizes,
    /// u8 activation, then f64 LE weights+biases in layer order.
    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(b"QNET")?;
        file.write_all(&1u32.to_le_bytes())?;
        file.write_all(&(self.layer_sizes.len() as u32).to_le_bytes())?;
        for &s in &self.layer_sizes {
            file.write_all(&(s as u32).to_le_bytes())?;
        }
        file.write_all(&[self.activation.tag()])?;
        for l in 0..self.weights.len() {
            for &w in &self.weights[l] {
                file.write_all(&w.to_le_bytes())?;
            }
            for &b in &self.biases[l] {
                file.write_all(&b.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let mut file = std::fs::File::open(path)?;
        let mut magic = [0u8; 4];
        file.read_exact(&mut magic)?;
        if &magic != b"QNET" {
            return Err(AgentError::BadCheckpoint("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        file.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != 1 {
            return Err(AgentError::BadCheckpoint(format!("unsupported version {version}")));
        }
        file.read_exact(&mut u32buf)?;
        let n_layers = u32::from_le_bytes(u32buf) as usize;
        if !(2..=16).contains(&n_layers) {
            return Err(AgentError::BadCheckpoint(format!("implausible layer count {n_layers}")));
        }
        let mut layer_sizes = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            file.read_exact(&mut u32buf)?;
            layer_sizes.push(u32::from_le_bytes(u32buf) as usize);
        }
        let mut tag = [0u8; 1];
        file.read_exact(&mut tag)?;
        let activation = Activation::from_tag(tag[0])
            .ok_or_else(|| AgentError::BadCheckpoint(format!("bad activation tag {}", tag[0])))?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut f64buf = [0u8; 8];
        for l in 1..n_layers {
            let (n_in, n_out) = (layer_sizes[l - 1], layer_sizes[l]);
            let mut w = Vec::with_capacity(n_in * n_out);
            for _ in 0..n_in * n_out {
                file.read_exact(&mut f64buf)?;
                w.push(f64::from_le_bytes(f64buf));
            }
            let mut b = Vec::with_capacity(n_out);
            for _ in 0..n_out {
                file.read_exact(&mut f64buf)?;
                b.push(f64::from_le_bytes(f64buf));
            }
            weights.push(w);
            biases.push(b);
        }
        Ok(Self { layer_sizes, activation, weights, biases })
    }
}
