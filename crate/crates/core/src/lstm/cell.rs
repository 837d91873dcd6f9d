use crate::error::{Error, Result};
use crate::linalg::{matvec_acc, sigmoid_scalar, Vector};

use super::params::{Gate, LstmLayerParams};

/// Recurrent state carried between time steps of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vector,
    pub c: Vector,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: Vector::zeros(hidden),
            c: Vector::zeros(hidden),
        }
    }
}

/// Everything one time step needs for backpropagation.
#[derive(Debug, Clone)]
pub struct GateCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub c_bar: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

fn pre_activation(g: &Gate, x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut z = g.bias.to_vec();
    matvec_acc(&g.w_x, x, &mut z);
    matvec_acc(&g.w_h, h, &mut z);
    z
}

/// One LSTM time step:
///
/// ```text
/// f = σ(W_fx x + W_fh h + b_f)     i = σ(W_ix x + W_ih h + b_i)
/// o = σ(W_ox x + W_oh h + b_o)     C̄ = tanh(W_cx x + W_ch h + b_c)
/// C = f ⊙ C_prev + i ⊙ C̄          h = o ⊙ tanh(C)
/// ```
pub fn cell_step(p: &LstmLayerParams, x: &[f64], prev: &LstmState) -> Result<(LstmState, GateCache)> {
    if x.len() != p.input_size {
        return Err(Error::shape("cell_step", format!("input_size {}", p.input_size), format!("x len {}", x.len())));
    }
    if prev.h.len() != p.hidden_size || prev.c.len() != p.hidden_size {
        return Err(Error::shape(
            "cell_step",
            format!("hidden_size {}", p.hidden_size),
            format!("state h {} c {}", prev.h.len(), prev.c.len()),
        ));
    }
    let cache = step_unchecked(p, x, &prev.h, &prev.c);
    let state = LstmState {
        h: Vector::from(cache.h.clone()),
        c: Vector::from(cache.c.clone()),
    };
    Ok((state, cache))
}

pub(crate) fn step_unchecked(p: &LstmLayerParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> GateCache {
    let mut f = pre_activation(&p.forget, x, h_prev);
    let mut i = pre_activation(&p.input, x, h_prev);
    let mut o = pre_activation(&p.output, x, h_prev);
    let mut c_bar = pre_activation(&p.candidate, x, h_prev);
    let n = p.hidden_size;
    let mut c = vec![0.0; n];
    let mut tanh_c = vec![0.0; n];
    let mut h = vec![0.0; n];
    for k in 0..n {
        f[k] = sigmoid_scalar(f[k]);
        i[k] = sigmoid_scalar(i[k]);
        o[k] = sigmoid_scalar(o[k]);
        c_bar[k] = c_bar[k].tanh();
        c[k] = f[k] * c_prev[k] + i[k] * c_bar[k];
        tanh_c[k] = c[k].tanh();
        h[k] = o[k] * tanh_c[k];
    }
    GateCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        f,
        i,
        o,
        c_bar,
        c,
        tanh_c,
        h,
    }
}

/// State-only step used by inference; writes the new `h`/`c` in place.
pub(crate) fn step_in_place(p: &LstmLayerParams, x: &[f64], h: &mut [f64], c: &mut [f64], scratch: &mut [Vec<f64>; 4]) {
    let n = p.hidden_size;
    for (buf, g) in scratch.iter_mut().zip(p.gates()) {
        buf.clear();
        buf.extend_from_slice(&g.bias);
        matvec_acc(&g.w_x, x, buf);
        matvec_acc(&g.w_h, h, buf);
    }
    let [zf, zi, zo, zc] = scratch;
    for k in 0..n {
        let f = sigmoid_scalar(zf[k]);
        let i = sigmoid_scalar(zi[k]);
        let o = sigmoid_scalar(zo[k]);
        c[k] = f * c[k] + i * zc[k].tanh();
        h[k] = o * c[k].tanh();
    }
}
