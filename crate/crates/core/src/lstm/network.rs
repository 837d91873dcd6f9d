use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, matvec_t_acc, outer_acc, Matrix};
use crate::rng::{self, Rng};

use super::cell::{step_in_place, step_unchecked, GateCache};
use super::params::{LstmLayerParams, Parameters};

/// Largest dropout probability the model accepts.
pub const MAX_DROPOUT: f64 = 0.15;

/// Borrowed `steps × features` input window in row-major order.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    data: &'a [f64],
    features: usize,
}

impl<'a> Window<'a> {
    pub fn new(data: &'a [f64], features: usize) -> Result<Self> {
        if features == 0 || data.len() % features != 0 {
            return Err(Error::shape("Window", format!("{} values", data.len()), format!("{features} features")));
        }
        Ok(Window { data, features })
    }

    pub(crate) fn new_unchecked(data: &'a [f64], features: usize) -> Self {
        Window { data, features }
    }

    pub fn steps(&self) -> usize {
        self.data.len() / self.features
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn row(&self, t: usize) -> &'a [f64] {
        &self.data[t * self.features..(t + 1) * self.features]
    }
}

impl<'a> From<&'a Matrix> for Window<'a> {
    fn from(m: &'a Matrix) -> Self {
        Window {
            data: m.as_slice(),
            features: m.cols().max(1),
        }
    }
}

/// Stacked LSTM with inverted dropout on each layer's upward output and a
/// single linear output neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub params: Parameters,
    pub dropout_p: f64,
    pub seed: u64,
    /// Identifier of the normalization statistics the model was trained with.
    #[serde(default)]
    pub norm_stats_id: Option<String>,
}

/// Activations of one forward pass, kept for [`LstmModel::backward_window`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub steps: usize,
    pub layers: Vec<LayerCache>,
    /// Masked final hidden state of the last layer.
    pub head_input: Vec<f64>,
    pub prediction: f64,
}

#[derive(Debug, Clone)]
pub struct LayerCache {
    pub gates: Vec<GateCache>,
    /// Scaled dropout mask applied to the output at each step, if any.
    pub masks: Vec<Option<Vec<f64>>>,
}

impl LstmModel {
    pub fn new(input_size: usize, hidden_sizes: &[usize], dropout_p: f64, seed: u64) -> Result<Self> {
        validate_arch(input_size, hidden_sizes, dropout_p)?;
        let mut rng = rng::stream(seed, &[rng::TAG_INIT]);
        let mut layers = Vec::with_capacity(hidden_sizes.len());
        let mut prev = input_size;
        for &h in hidden_sizes {
            layers.push(LstmLayerParams::init(prev, h, &mut rng));
            prev = h;
        }
        let bound = 1.0 / (prev as f64).sqrt();
        let head_weights = (0..prev).map(|_| rng.random_range(-bound..=bound)).collect();
        Ok(LstmModel {
            params: Parameters {
                layers,
                head_weights,
                head_bias: 0.0,
            },
            dropout_p,
            seed,
            norm_stats_id: None,
        })
    }

    /// All weights and biases zero.
    pub fn zeros(input_size: usize, hidden_sizes: &[usize], dropout_p: f64, seed: u64) -> Result<Self> {
        validate_arch(input_size, hidden_sizes, dropout_p)?;
        let mut m = LstmModel::new(input_size, hidden_sizes, dropout_p, seed)?;
        m.params = m.params.zeros_like();
        Ok(m)
    }

    pub fn from_params(params: Parameters, dropout_p: f64, seed: u64) -> Result<Self> {
        let m = LstmModel {
            params,
            dropout_p,
            seed,
            norm_stats_id: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = self.hidden_sizes();
        validate_arch(self.input_size(), &sizes, self.dropout_p)?;
        let mut prev = self.input_size();
        for (idx, l) in self.params.layers.iter().enumerate() {
            if l.input_size != prev {
                return Err(Error::shape("LstmModel", format!("layer {idx} input {}", l.input_size), format!("previous hidden {prev}")));
            }
            l.validate()?;
            prev = l.hidden_size;
        }
        if self.params.head_weights.len() != prev {
            return Err(Error::shape("LstmModel", format!("head {}", self.params.head_weights.len()), format!("last hidden {prev}")));
        }
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        self.params.layers.first().map_or(0, |l| l.input_size)
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.params.layers.iter().map(|l| l.hidden_size).collect()
    }

    fn dropout_active(&self, rng: &Option<&mut Rng>) -> bool {
        rng.is_some() && self.dropout_p > 0.0
    }

    fn check_window(&self, window: &Window<'_>) -> Result<()> {
        if window.features() != self.input_size() {
            return Err(Error::shape("forward_window", format!("model input {}", self.input_size()), format!("window features {}", window.features())));
        }
        if window.steps() == 0 {
            return Err(Error::InvalidArgument("window has no time steps".into()));
        }
        Ok(())
    }

    /// Runs every layer over the window from zero state and applies the head.
    /// Passing an rng turns dropout on (when `dropout_p > 0`); a fresh mask is
    /// drawn for every call.
    pub fn forward_window(&self, window: Window<'_>, mut rng: Option<&mut Rng>) -> Result<ForwardCache> {
        self.check_window(&window)?;
        let active = self.dropout_active(&rng);
        let steps = window.steps();
        let n_layers = self.params.layers.len();
        let mut layers = Vec::with_capacity(n_layers);
        let mut inputs: Vec<Vec<f64>> = (0..steps).map(|t| window.row(t).to_vec()).collect();
        for (li, p) in self.params.layers.iter().enumerate() {
            let last = li + 1 == n_layers;
            let hdim = p.hidden_size;
            let mut gates = Vec::with_capacity(steps);
            let mut masks = Vec::with_capacity(steps);
            let mut outputs = Vec::with_capacity(if last { 0 } else { steps });
            let mut h = vec![0.0; hdim];
            let mut c = vec![0.0; hdim];
            for (t, x) in inputs.iter().enumerate() {
                let cache = step_unchecked(p, x, &h, &c);
                h.clone_from(&cache.h);
                c.clone_from(&cache.c);
                let needs_mask = active && (!last || t + 1 == steps);
                let mask = if needs_mask {
                    Some(draw_mask(hdim, self.dropout_p, rng.as_deref_mut().expect("active implies rng")))
                } else {
                    None
                };
                if !last {
                    outputs.push(apply_mask(&cache.h, mask.as_deref()));
                }
                masks.push(mask);
                gates.push(cache);
            }
            layers.push(LayerCache { gates, masks });
            if !last {
                inputs = outputs;
            }
        }
        let top = layers.last().expect("model has at least one layer");
        let head_input = apply_mask(&top.gates[steps - 1].h, top.masks[steps - 1].as_deref());
        let prediction = dot(&self.params.head_weights, &head_input) + self.params.head_bias;
        if !prediction.is_finite() {
            return Err(Error::Divergence {
                epoch: 0,
                step: 0,
                what: "activation",
            });
        }
        Ok(ForwardCache {
            steps,
            layers,
            head_input,
            prediction,
        })
    }

    /// Prediction-only forward pass. Draws dropout masks in the same order
    /// as [`forward_window`](Self::forward_window), so a cloned rng yields the
    /// same value through either path.
    pub fn predict_window(&self, window: Window<'_>, mut rng: Option<&mut Rng>) -> Result<f64> {
        self.check_window(&window)?;
        let active = self.dropout_active(&rng);
        let steps = window.steps();
        let n_layers = self.params.layers.len();
        let mut inputs: Vec<f64> = Vec::new();
        let mut in_width = window.features();
        let mut head_input = Vec::new();
        let mut scratch: [Vec<f64>; 4] = Default::default();
        for (li, p) in self.params.layers.iter().enumerate() {
            let last = li + 1 == n_layers;
            let hdim = p.hidden_size;
            let mut h = vec![0.0; hdim];
            let mut c = vec![0.0; hdim];
            let mut outputs = Vec::with_capacity(if last { 0 } else { steps * hdim });
            for t in 0..steps {
                let x = if li == 0 {
                    window.row(t)
                } else {
                    &inputs[t * in_width..(t + 1) * in_width]
                };
                step_in_place(p, x, &mut h, &mut c, &mut scratch);
                if !last {
                    if active {
                        let m = draw_mask(hdim, self.dropout_p, rng.as_deref_mut().expect("active implies rng"));
                        outputs.extend(h.iter().zip(&m).map(|(a, b)| a * b));
                    } else {
                        outputs.extend_from_slice(&h);
                    }
                }
            }
            if last {
                head_input = if active {
                    let m = draw_mask(hdim, self.dropout_p, rng.as_deref_mut().expect("active implies rng"));
                    apply_mask(&h, Some(&m))
                } else {
                    h
                };
            } else {
                inputs = outputs;
                in_width = hdim;
            }
        }
        let y = dot(&self.params.head_weights, &head_input) + self.params.head_bias;
        if !y.is_finite() {
            return Err(Error::Divergence {
                epoch: 0,
                step: 0,
                what: "activation",
            });
        }
        Ok(y)
    }

    /// Exact gradient of `d_loss_d_pred · prediction` with respect to every
    /// parameter, through the dropout masks recorded in `cache`.
    pub fn backward_window(&self, cache: &ForwardCache, d_loss_d_pred: f64) -> Result<Parameters> {
        let mut grads = self.params.zeros_like();
        self.accumulate_gradients(cache, d_loss_d_pred, &mut grads)?;
        Ok(grads)
    }

    /// Like [`backward_window`](Self::backward_window) but adds into `grads`.
    pub fn accumulate_gradients(&self, cache: &ForwardCache, d_pred: f64, grads: &mut Parameters) -> Result<()> {
        self.check_cache(cache)?;
        if !grads.same_shape(&self.params) {
            return Err(Error::CacheMismatch("gradient buffer has a different shape".into()));
        }
        let steps = cache.steps;
        grads.head_bias += d_pred;
        axpy(d_pred, &cache.head_input, &mut grads.head_weights);

        let top_hidden = self.params.head_weights.len();
        let mut d_out = vec![vec![0.0; top_hidden]; steps];
        axpy(d_pred, &self.params.head_weights, &mut d_out[steps - 1]);

        for li in (0..self.params.layers.len()).rev() {
            let p = &self.params.layers[li];
            let g = &mut grads.layers[li];
            let lc = &cache.layers[li];
            let hdim = p.hidden_size;
            for (d, m) in d_out.iter_mut().zip(&lc.masks) {
                if let Some(m) = m {
                    d.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
                }
            }
            let need_d_in = li > 0;
            let mut d_in = if need_d_in {
                vec![vec![0.0; p.input_size]; steps]
            } else {
                Vec::new()
            };
            let mut dh_next = vec![0.0; hdim];
            let mut dc_next = vec![0.0; hdim];
            let mut dz = [vec![0.0; hdim], vec![0.0; hdim], vec![0.0; hdim], vec![0.0; hdim]];
            for t in (0..steps).rev() {
                let gc = &lc.gates[t];
                for k in 0..hdim {
                    let dh = d_out[t][k] + dh_next[k];
                    let d_o = dh * gc.tanh_c[k];
                    let dc = dc_next[k] + dh * gc.o[k] * (1.0 - gc.tanh_c[k] * gc.tanh_c[k]);
                    let d_f = dc * gc.c_prev[k];
                    let d_i = dc * gc.c_bar[k];
                    let d_cbar = dc * gc.i[k];
                    dc_next[k] = dc * gc.f[k];
                    dz[0][k] = d_f * gc.f[k] * (1.0 - gc.f[k]);
                    dz[1][k] = d_i * gc.i[k] * (1.0 - gc.i[k]);
                    dz[2][k] = d_o * gc.o[k] * (1.0 - gc.o[k]);
                    dz[3][k] = d_cbar * (1.0 - gc.c_bar[k] * gc.c_bar[k]);
                }
                dh_next.iter_mut().for_each(|v| *v = 0.0);
                for ((gate, grad), dzg) in p.gates().into_iter().zip(g.gates_mut()).zip(&dz) {
                    outer_acc(&mut grad.w_x, dzg, &gc.x);
                    if t > 0 {
                        outer_acc(&mut grad.w_h, dzg, &gc.h_prev);
                    }
                    axpy(1.0, dzg, &mut grad.bias);
                    if need_d_in {
                        matvec_t_acc(&gate.w_x, dzg, &mut d_in[t]);
                    }
                    matvec_t_acc(&gate.w_h, dzg, &mut dh_next);
                }
            }
            d_out = d_in;
        }
        Ok(())
    }

    fn check_cache(&self, cache: &ForwardCache) -> Result<()> {
        if cache.layers.len() != self.params.layers.len() {
            return Err(Error::CacheMismatch(format!("{} cached layers, model has {}", cache.layers.len(), self.params.layers.len())));
        }
        for (li, (lc, p)) in cache.layers.iter().zip(&self.params.layers).enumerate() {
            if lc.gates.len() != cache.steps || lc.masks.len() != cache.steps {
                return Err(Error::CacheMismatch(format!("layer {li} has {} steps, expected {}", lc.gates.len(), cache.steps)));
            }
            let ok = lc.gates.iter().all(|g| g.h.len() == p.hidden_size && g.x.len() == p.input_size);
            if !ok {
                return Err(Error::CacheMismatch(format!("layer {li} activations do not match {}x{}", p.input_size, p.hidden_size)));
            }
        }
        if cache.steps == 0 || cache.head_input.len() != self.params.head_weights.len() {
            return Err(Error::CacheMismatch("head input length differs from head weights".into()));
        }
        Ok(())
    }
}

fn validate_arch(input_size: usize, hidden_sizes: &[usize], dropout_p: f64) -> Result<()> {
    if input_size == 0 || hidden_sizes.is_empty() || hidden_sizes.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "need input_size > 0 and at least one non-empty layer, got input {input_size}, layers {hidden_sizes:?}"
        )));
    }
    if !(0.0..=MAX_DROPOUT).contains(&dropout_p) {
        return Err(Error::InvalidArgument(format!("dropout_p {dropout_p} outside [0, {MAX_DROPOUT}]")));
    }
    Ok(())
}

/// Inverted-dropout mask: each entry is 0 with probability `p`, otherwise
/// `1/(1-p)`.
pub fn draw_mask(len: usize, p: f64, rng: &mut Rng) -> Vec<f64> {
    let keep = 1.0 / (1.0 - p);
    (0..len)
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect()
}

fn apply_mask(h: &[f64], mask: Option<&[f64]>) -> Vec<f64> {
    match mask {
        Some(m) => h.iter().zip(m).map(|(a, b)| a * b).collect(),
        None => h.to_vec(),
    }
}
