use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstm::MAX_DROPOUT;

/// One hyperparameter combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub batch_size: usize,
    pub window_size: usize,
    pub hidden_layers: usize,
    pub hidden_neurons: usize,
    pub learning_rate: f64,
    pub dropout_p: f64,
}

impl HyperPoint {
    /// Field-by-field order used to break ties.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.batch_size
            .cmp(&other.batch_size)
            .then(self.window_size.cmp(&other.window_size))
            .then(self.hidden_layers.cmp(&other.hidden_layers))
            .then(self.hidden_neurons.cmp(&other.hidden_neurons))
            .then(self.learning_rate.total_cmp(&other.learning_rate))
            .then(self.dropout_p.total_cmp(&other.dropout_p))
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        vec![self.hidden_neurons; self.hidden_layers]
    }
}

/// Candidate values per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub batch_size: Vec<usize>,
    pub window_size: Vec<usize>,
    pub hidden_layers: Vec<usize>,
    pub hidden_neurons: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub dropout_p: Vec<f64>,
}

impl SearchSpace {
    /// The standard space: 864 points, dropout 0 included as a point-forecast
    /// baseline.
    pub fn standard() -> Self {
        SearchSpace {
            batch_size: vec![32, 64, 128],
            window_size: vec![12, 24, 48, 72],
            hidden_layers: vec![1, 2, 3],
            hidden_neurons: vec![64, 128],
            learning_rate: vec![1e-4, 1e-3, 1e-2],
            dropout_p: vec![0.0, 0.05, 0.1, 0.15],
        }
    }

    /// Sorts and deduplicates each dimension and checks value ranges.
    pub fn normalized(mut self) -> Result<Self> {
        fn tidy_usize(v: &mut Vec<usize>, name: &str) -> Result<()> {
            v.sort_unstable();
            v.dedup();
            if v.is_empty() || v[0] == 0 {
                return Err(Error::InvalidArgument(format!("search dimension {name} needs positive values")));
            }
            Ok(())
        }
        tidy_usize(&mut self.batch_size, "batch_size")?;
        tidy_usize(&mut self.window_size, "window_size")?;
        tidy_usize(&mut self.hidden_layers, "hidden_layers")?;
        tidy_usize(&mut self.hidden_neurons, "hidden_neurons")?;
        for v in [&mut self.learning_rate, &mut self.dropout_p] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        if self.learning_rate.is_empty() || self.learning_rate.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if self.dropout_p.is_empty() || self.dropout_p.iter().any(|p| !(0.0..=MAX_DROPOUT).contains(p)) {
            return Err(Error::InvalidArgument(format!("dropout values must lie in [0, {MAX_DROPOUT}]")));
        }
        Ok(self)
    }

    fn dims(&self) -> [usize; 6] {
        [
            self.batch_size.len(),
            self.window_size.len(),
            self.hidden_layers.len(),
            self.hidden_neurons.len(),
            self.learning_rate.len(),
            self.dropout_p.len(),
        ]
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-dimension value indices of point `i` in lexicographic order.
    fn indices(&self, mut i: usize) -> [usize; 6] {
        let dims = self.dims();
        let mut idx = [0; 6];
        for d in (0..6).rev() {
            idx[d] = i % dims[d];
            i /= dims[d];
        }
        idx
    }

    pub fn point(&self, i: usize) -> HyperPoint {
        let [b, w, l, n, lr, p] = self.indices(i);
        HyperPoint {
            batch_size: self.batch_size[b],
            window_size: self.window_size[w],
            hidden_layers: self.hidden_layers[l],
            hidden_neurons: self.hidden_neurons[n],
            learning_rate: self.learning_rate[lr],
            dropout_p: self.dropout_p[p],
        }
    }

    /// All points in lexicographic order (for a normalized space).
    pub fn points(&self) -> Vec<HyperPoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// One-hot encoding of point `i`.
    pub fn encode(&self, i: usize) -> Vec<f64> {
        let dims = self.dims();
        let idx = self.indices(i);
        let mut out = vec![0.0; dims.iter().sum()];
        let mut offset = 0;
        for d in 0..6 {
            out[offset + idx[d]] = 1.0;
            offset += dims[d];
        }
        out
    }
}
