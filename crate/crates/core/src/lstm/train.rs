use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::WindowedDataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::{self, TAG_DROPOUT, TAG_SHUFFLE};

use super::adam::{clip_global_norm, AdamState};
use super::network::LstmModel;
use super::params::Parameters;

/// Samples per gradient chunk. Chunks are the unit of parallel work and are
/// summed in index order, so the value fixes the floating-point reduction
/// order independently of the thread count.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Global-norm gradient clipping threshold; `None` disables clipping.
    pub clip_norm: Option<f64>,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
    #[serde(default)]
    pub exec: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            epochs: 150,
            clip_norm: Some(5.0),
            patience: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_train_loss: Vec<f64>,
    pub epoch_val_loss: Vec<f64>,
    pub epochs_run: usize,
}

/// Minimizes mean squared error over `train_set` with mini-batch Adam.
///
/// Training windows are reshuffled every epoch from the model seed; dropout
/// is active for the training loss and off for the validation loss.
pub fn train(
    model: &mut LstmModel,
    train_set: &WindowedDataset,
    val_set: &WindowedDataset,
    cfg: &TrainConfig,
    adam: &mut AdamState,
) -> Result<TrainReport> {
    let mut report = TrainReport::default();
    if cfg.epochs == 0 {
        return Ok(report);
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be positive".into()));
    }
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "training needs non-empty splits (train {}, val {})",
            train_set.len(),
            val_set.len()
        )));
    }
    for ds in [train_set, val_set] {
        if ds.n_features() != model.input_size() {
            return Err(Error::shape("train", format!("model input {}", model.input_size()), format!("dataset features {}", ds.n_features())));
        }
    }

    let mut shuffle_rng = rng::stream(model.seed, &[TAG_SHUFFLE]);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best_val = f64::INFINITY;
    let mut since_best = 0usize;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sq_err_total = 0.0;
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let (mut grads, sq_err) = batch_gradient(model, train_set, batch, epoch, step, cfg.exec)
                .map_err(|e| at(e, epoch, step))?;
            if !sq_err.is_finite() || !grads.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    step,
                    what: "loss",
                });
            }
            sq_err_total += sq_err;
            if let Some(max) = cfg.clip_norm {
                clip_global_norm(&mut grads, max);
            }
            adam.update(&mut model.params, &grads)?;
            if !model.params.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    step,
                    what: "parameter",
                });
            }
        }
        let train_loss = sq_err_total / train_set.len() as f64;
        let val_loss = mse_loss(model, val_set, cfg.exec).map_err(|e| at(e, epoch, 0))?;
        report.epoch_train_loss.push(train_loss);
        report.epoch_val_loss.push(val_loss);
        report.epochs_run += 1;
        log::debug!("epoch {epoch}: train {train_loss:.6} val {val_loss:.6}");

        if let Some(patience) = cfg.patience {
            if val_loss < best_val {
                best_val = val_loss;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    break;
                }
            }
        }
    }
    Ok(report)
}

fn at(e: Error, epoch: usize, step: usize) -> Error {
    match e {
        Error::Divergence { what, .. } => Error::Divergence { epoch, step, what },
        other => other,
    }
}

/// Mean-reduced MSE gradient of one batch plus the batch's summed squared error.
fn batch_gradient(
    model: &LstmModel,
    ds: &WindowedDataset,
    batch: &[usize],
    epoch: usize,
    step: usize,
    exec: Execution,
) -> Result<(Parameters, f64)> {
    let scale = 2.0 / batch.len() as f64;
    let n_chunks = batch.len().div_ceil(GRAD_CHUNK);
    let partials = exec.try_map(n_chunks, |ci| -> Result<(Parameters, f64)> {
        let mut grads = model.params.zeros_like();
        let mut sq = 0.0;
        for (offset, &idx) in batch.iter().enumerate().skip(ci * GRAD_CHUNK).take(GRAD_CHUNK) {
            let mut rng = rng::stream(model.seed, &[TAG_DROPOUT, epoch as u64, step as u64, offset as u64]);
            let cache = model.forward_window(ds.input(idx), Some(&mut rng))?;
            let err = cache.prediction - ds.target(idx);
            sq += err * err;
            model.accumulate_gradients(&cache, scale * err, &mut grads)?;
        }
        Ok((grads, sq))
    })?;
    let mut iter = partials.into_iter();
    let (mut total, mut sq) = iter.next().expect("batch is non-empty");
    for (g, s) in iter {
        total.add_assign(&g);
        sq += s;
    }
    Ok((total, sq))
}

/// Mean squared error with dropout off.
pub fn mse_loss(model: &LstmModel, ds: &WindowedDataset, exec: Execution) -> Result<f64> {
    let preds = exec.try_map(ds.len(), |i| model.predict_window(ds.input(i), None))?;
    let sum: f64 = preds
        .iter()
        .enumerate()
        .map(|(i, p)| (p - ds.target(i)).powi(2))
        .sum();
    Ok(sum / ds.len() as f64)
}
