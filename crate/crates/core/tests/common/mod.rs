//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use loadband::linalg::Matrix;
use loadband::lstm::{LstmModel, Window};
use loadband::Rng;
use rand::{Rng as _, SeedableRng};

/// Squared-error loss of one window with a fixed dropout stream.
pub fn loss(model: &LstmModel, x: &Matrix, target: f64, rng: Option<&Rng>) -> f64 {
    let mut r = rng.cloned();
    let p = model.forward_window(Window::from(x), r.as_mut()).unwrap().prediction;
    0.5 * (p - target).powi(2)
}

/// Central finite-difference gradient of [`loss`], flattened in
/// `Parameters::slices` order.
pub fn finite_difference(model: &LstmModel, x: &Matrix, target: f64, rng: Option<&Rng>, h: f64) -> Vec<f64> {
    let n = model.params.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut plus = model.clone();
        let mut minus = model.clone();
        *flat_mut(&mut plus, k) += h;
        *flat_mut(&mut minus, k) -= h;
        out.push((loss(&plus, x, target, rng) - loss(&minus, x, target, rng)) / (2.0 * h));
    }
    out
}

pub fn flat_mut(model: &mut LstmModel, mut k: usize) -> &mut f64 {
    for s in model.params.slices_mut() {
        if k < s.len() {
            return &mut s[k];
        }
        k -= s.len();
    }
    panic!("parameter index out of range")
}

/// Analytic gradient of [`loss`] through backpropagation.
pub fn analytic(model: &LstmModel, x: &Matrix, target: f64, rng: Option<&Rng>) -> Vec<f64> {
    let mut r = rng.cloned();
    let cache = model.forward_window(Window::from(x), r.as_mut()).unwrap();
    let g = model.backward_window(&cache, cache.prediction - target).unwrap();
    g.slices().concat()
}

/// Relative error with a floor for gradients that are numerically zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Random tiny model with non-zero biases so every gate path is exercised.
pub fn tiny_model(seed: u64) -> (LstmModel, Matrix, f64, Option<Rng>) {
    let mut rng = Rng::seed_from_u64(seed);
    let f = rng.random_range(1..=3);
    let w = rng.random_range(1..=5);
    let layers = rng.random_range(1..=2);
    let hidden: Vec<usize> = (0..layers).map(|_| rng.random_range(1..=4)).collect();
    let dropout = if seed % 2 == 0 { 0.0 } else { rng.random_range(0.05..0.15) };
    let mut m = LstmModel::new(f, &hidden, dropout, seed).unwrap();
    for s in m.params.slices_mut() {
        for v in s.iter_mut() {
            *v = rng.random_range(-0.9..0.9);
        }
    }
    let x = Matrix::from_fn(w, f, |_, _| rng.random_range(-1.5..1.5));
    let target = rng.random_range(-1.0..1.0);
    let stream = (dropout > 0.0).then(|| Rng::seed_from_u64(seed ^ 0xabc));
    (m, x, target, stream)
}

/// Null distribution counts of U for sizes (n1, n2), by listing every way
/// of assigning n1 of the n1 + n2 ranks to the first sample.
pub fn enumerate_u(n1: usize, n2: usize) -> Vec<u64> {
    let n = n1 + n2;
    let mut counts = vec![0u64; n1 * n2 + 1];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let rank_sum: usize = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
        counts[rank_sum - n1 * (n1 + 1) / 2] += 1;
    }
    counts
}

/// Two-sided exact p-value from enumerated counts.
pub fn enumerated_p(counts: &[u64], u: usize) -> f64 {
    let total: u64 = counts.iter().sum();
    let lo: u64 = counts[..=u].iter().sum();
    let hi: u64 = counts[u..].iter().sum();
    (2.0 * lo.min(hi) as f64 / total as f64).min(1.0)
}

/// Every tie-free arrangement of sizes (n1, n2) as concrete samples: the
/// first sample holds the ranks selected by the mask.
pub fn arrangements(n1: usize, n2: usize) -> Vec<(Vec<f64>, Vec<f64>, usize)> {
    let n = n1 + n2;
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == n1)
        .map(|mask| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for i in 0..n {
                // scramble the values so ranks differ from positions
                let v = (i + 1) as f64 * 1.5 - 0.25;
                if mask & (1 << i) != 0 {
                    a.push(v)
                } else {
                    b.push(v)
                }
            }
            let rank_sum: usize = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
            a.reverse();
            (a, b, rank_sum - n1 * (n1 + 1) / 2)
        })
        .collect()
}

/// Compensated sum of sorted values.
fn kahan(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0, 0.0);
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Mean, population deviation and `mean ± k·sd` from sorted values with
/// compensated two-pass sums.
pub fn interval_reference(samples: &[f64], k: f64) -> (f64, f64, f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mean = kahan(s.iter().copied()) / n;
    let var = kahan(s.iter().map(|v| (v - mean) * (v - mean))) / n;
    let sd = var.sqrt();
    (mean, sd, mean - k * sd, mean + k * sd)
}
