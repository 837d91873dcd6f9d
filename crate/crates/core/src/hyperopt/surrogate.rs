use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::linalg::{cholesky, cholesky_solve, forward_solve, Matrix};

/// Gaussian-process regressor with a squared-exponential kernel on one-hot
/// encodings. Targets are standardized before fitting.
#[derive(Debug, Clone)]
pub struct Surrogate {
    xs: Vec<Vec<f64>>,
    chol: Matrix,
    alpha: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    length_sq: f64,
}

const NUGGET: f64 = 1e-6;

fn kernel(a: &[f64], b: &[f64], length_sq: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * length_sq)).exp()
}

impl Surrogate {
    /// `length_sq` of 3 gives correlation e^(-1/3) between points that differ
    /// in one dimension.
    pub fn fit(xs: &[Vec<f64>], ys: &[f64], length_sq: f64) -> Option<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return None;
        }
        let n = ys.len() as f64;
        let y_mean = ys.iter().sum::<f64>() / n;
        let y_std = (ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-12);
        let z: Vec<f64> = ys.iter().map(|y| (y - y_mean) / y_std).collect();
        let k = Matrix::from_fn(xs.len(), xs.len(), |i, j| kernel(&xs[i], &xs[j], length_sq) + if i == j { NUGGET } else { 0.0 });
        let chol = cholesky(&k)?;
        let alpha = cholesky_solve(&chol, &z);
        Some(Surrogate {
            xs: xs.to_vec(),
            chol,
            alpha,
            y_mean,
            y_std,
            length_sq,
        })
    }

    /// Posterior mean and standard deviation in target units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let ks: Vec<f64> = self.xs.iter().map(|xi| kernel(xi, x, self.length_sq)).collect();
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward_solve(&self.chol, &ks);
        let var = (1.0 + NUGGET - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        (self.y_mean + self.y_std * mean, self.y_std * var.sqrt())
    }

    /// Expected improvement below `best` (minimization).
    pub fn expected_improvement(&self, x: &[f64], best: f64, xi: f64) -> f64 {
        let (mu, sigma) = self.predict(x);
        let gain = best - mu - xi;
        if sigma < 1e-12 {
            return gain.max(0.0);
        }
        let z = gain / sigma;
        let n = Normal::new(0.0, 1.0).expect("standard normal");
        gain * n.cdf(z) + sigma * n.pdf(z)
    }
}
