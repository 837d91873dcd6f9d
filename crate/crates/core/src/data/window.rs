use std::sync::Arc;

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lstm::Window;

use super::normalize::NormalizedSplit;

/// Window sizes in the hyperparameter search space.
pub const STANDARD_WINDOWS: [usize; 4] = [12, 24, 48, 72];

/// Sliding-window samples over a feature matrix. Sample `i` reads rows
/// `[i·s, i·s + w)` and targets row `i·s + w`.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    features: Arc<Matrix>,
    targets: Arc<Vec<f64>>,
    window: usize,
    slide: usize,
    n_samples: usize,
    target_time: Option<Arc<Vec<(NaiveDateTime, u8)>>>,
    target_kwh: Option<Arc<Vec<f64>>>,
}

/// `floor((rows − w − 1)/s) + 1`, or 0 when `rows <= w`.
pub fn sample_count(rows: usize, w: usize, s: usize) -> usize {
    if rows <= w {
        0
    } else {
        (rows - w - 1) / s + 1
    }
}

impl WindowedDataset {
    /// `row_targets[r]` is the target value read when row `r` follows a window.
    pub fn new(features: Matrix, row_targets: Vec<f64>, window: usize, slide: usize) -> Result<Self> {
        if window == 0 || slide == 0 {
            return Err(Error::InvalidArgument(format!("window {window} and slide {slide} must be positive")));
        }
        if row_targets.len() != features.rows() {
            return Err(Error::shape("WindowedDataset", format!("{} feature rows", features.rows()), format!("{} targets", row_targets.len())));
        }
        let n_samples = sample_count(features.rows(), window, slide);
        if n_samples == 0 {
            return Err(Error::EmptyDataset {
                rows: features.rows(),
                window,
            });
        }
        Ok(WindowedDataset {
            features: Arc::new(features),
            targets: Arc::new(row_targets),
            window,
            slide,
            n_samples,
            target_time: None,
            target_kwh: None,
        })
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn window_size(&self) -> usize {
        self.window
    }

    pub fn slide(&self) -> usize {
        self.slide
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn target_row(&self, i: usize) -> usize {
        i * self.slide + self.window
    }

    pub fn input(&self, i: usize) -> Window<'_> {
        let f = self.features.cols();
        let start = i * self.slide * f;
        Window::new_unchecked(&self.features.as_slice()[start..start + self.window * f], f)
    }

    /// Input window copied into a matrix.
    pub fn input_matrix(&self, i: usize) -> Matrix {
        let w = self.input(i);
        let f = w.features();
        Matrix::from_fn(w.steps(), f, |r, c| w.row(r)[c])
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[self.target_row(i)]
    }

    pub fn targets(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.target(i)).collect()
    }

    /// Target timestamps, when built from a [`NormalizedSplit`].
    pub fn target_time(&self, i: usize) -> Option<(NaiveDateTime, u8)> {
        self.target_time.as_ref().map(|t| t[self.target_row(i)])
    }

    pub fn input_last_time(&self, i: usize) -> Option<(NaiveDateTime, u8)> {
        self.target_time.as_ref().map(|t| t[self.target_row(i) - 1])
    }

    /// Target in kWh, when built from a [`NormalizedSplit`].
    pub fn target_kwh(&self, i: usize) -> Option<f64> {
        self.target_kwh.as_ref().map(|t| t[self.target_row(i)])
    }

    pub fn targets_kwh(&self) -> Option<Vec<f64>> {
        (0..self.len()).map(|i| self.target_kwh(i)).collect()
    }
}

/// Windows a normalized split; the target is next-hour consumption.
pub fn window(split: &NormalizedSplit, w: usize, s: usize) -> Result<WindowedDataset> {
    let mut ds = WindowedDataset::new(split.features.clone(), split.target_column(), w, s)?;
    ds.target_time = Some(Arc::new(split.timestamps.clone()));
    ds.target_kwh = Some(Arc::new(split.consumption_kwh.clone()));
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: usize) -> (Matrix, Vec<f64>) {
        let m = Matrix::from_fn(rows, 2, |r, c| (r * 10 + c) as f64);
        let t = (0..rows).map(|r| r as f64).collect();
        (m, t)
    }

    #[test]
    fn counts_and_targets() {
        let (m, t) = ramp(5);
        let ds = WindowedDataset::new(m, t, 2, 1).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.targets(), vec![2.0, 3.0, 4.0]);
        assert_eq!(ds.input(1).row(0), &[10.0, 11.0]);
        assert_eq!(ds.input(1).row(1), &[20.0, 21.0]);

        let (m, t) = ramp(73);
        assert_eq!(WindowedDataset::new(m, t, 72, 1).unwrap().len(), 1);

        let (m, t) = ramp(10);
        let ds = WindowedDataset::new(m, t, 2, 4).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.targets(), vec![2.0, 6.0]);
    }

    #[test]
    fn too_short_is_empty_dataset_error() {
        let (m, t) = ramp(4);
        assert!(matches!(WindowedDataset::new(m, t, 4, 1), Err(Error::EmptyDataset { .. })));
    }

    #[test]
    fn count_formula_matches_enumeration() {
        for rows in 0..40 {
            for w in 1..10 {
                for s in 1..6 {
                    let brute = (0..).take_while(|i| i * s + w < rows).count();
                    assert_eq!(sample_count(rows, w, s), brute, "rows {rows} w {w} s {s}");
                }
            }
        }
    }
}
