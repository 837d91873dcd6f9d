use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::Rng;

/// Weights feeding one gate: input projection, recurrent projection, bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// hidden × input
    pub w_x: Matrix,
    /// hidden × hidden
    pub w_h: Matrix,
    pub bias: Vector,
}

impl Gate {
    fn zeros(input: usize, hidden: usize) -> Self {
        Gate {
            w_x: Matrix::zeros(hidden, input),
            w_h: Matrix::zeros(hidden, hidden),
            bias: Vector::zeros(hidden),
        }
    }

    fn uniform(input: usize, hidden: usize, bound: f64, rng: &mut Rng) -> Self {
        let mut draw = |_, _| rng.random_range(-bound..=bound);
        Gate {
            w_x: Matrix::from_fn(hidden, input, &mut draw),
            w_h: Matrix::from_fn(hidden, hidden, &mut draw),
            bias: Vector::zeros(hidden),
        }
    }

    fn check(&self, input: usize, hidden: usize, name: &str) -> Result<()> {
        if self.w_x.shape() != (hidden, input)
            || self.w_h.shape() != (hidden, hidden)
            || self.bias.len() != hidden
        {
            return Err(Error::shape(
                "LstmLayerParams",
                format!("{name} gate w_x {} w_h {} bias {}", self.w_x, self.w_h, self.bias.len()),
                format!("input {input}, hidden {hidden}"),
            ));
        }
        Ok(())
    }
}

/// One LSTM layer: forget, input, output and candidate gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub input_size: usize,
    pub hidden_size: usize,
    pub forget: Gate,
    pub input: Gate,
    pub output: Gate,
    pub candidate: Gate,
}

impl LstmLayerParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        LstmLayerParams {
            input_size,
            hidden_size,
            forget: Gate::zeros(input_size, hidden_size),
            input: Gate::zeros(input_size, hidden_size),
            output: Gate::zeros(input_size, hidden_size),
            candidate: Gate::zeros(input_size, hidden_size),
        }
    }

    /// Weights uniform in ±1/√hidden, biases zero.
    pub fn init(input_size: usize, hidden_size: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (hidden_size as f64).sqrt();
        LstmLayerParams {
            input_size,
            hidden_size,
            forget: Gate::uniform(input_size, hidden_size, bound, rng),
            input: Gate::uniform(input_size, hidden_size, bound, rng),
            output: Gate::uniform(input_size, hidden_size, bound, rng),
            candidate: Gate::uniform(input_size, hidden_size, bound, rng),
        }
    }

    pub fn gates(&self) -> [&Gate; 4] {
        [&self.forget, &self.input, &self.output, &self.candidate]
    }

    pub fn gates_mut(&mut self) -> [&mut Gate; 4] {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.output,
            &mut self.candidate,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (g, name) in self.gates().into_iter().zip(["forget", "input", "output", "candidate"]) {
            g.check(self.input_size, self.hidden_size, name)?;
        }
        Ok(())
    }
}

/// Every trainable value of the network. Gradients and Adam moments use the
/// same type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub layers: Vec<LstmLayerParams>,
    pub head_weights: Vector,
    pub head_bias: f64,
}

impl Parameters {
    pub fn zeros_like(&self) -> Self {
        Parameters {
            layers: self
                .layers
                .iter()
                .map(|l| LstmLayerParams::zeros(l.input_size, l.hidden_size))
                .collect(),
            head_weights: Vector::zeros(self.head_weights.len()),
            head_bias: 0.0,
        }
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 12 + 2);
        for layer in &self.layers {
            for g in layer.gates() {
                out.push(g.w_x.as_slice());
                out.push(g.w_h.as_slice());
                out.push(&g.bias[..]);
            }
        }
        out.push(&self.head_weights[..]);
        out.push(std::slice::from_ref(&self.head_bias));
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 12 + 2);
        for layer in &mut self.layers {
            for g in layer.gates_mut() {
                out.push(g.w_x.as_mut_slice());
                out.push(g.w_h.as_mut_slice());
                out.push(&mut g.bias[..]);
            }
        }
        out.push(&mut self.head_weights[..]);
        out.push(std::slice::from_mut(&mut self.head_bias));
        out
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add_assign(&mut self, other: &Parameters) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    pub fn same_shape(&self, other: &Parameters) -> bool {
        let a = self.slices();
        let b = other.slices();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.len() == y.len())
    }
}
