//! End-to-end steps shared by the command-line tool and the test suites:
//! fitting one configuration, scoring it on the validation split, and
//! evaluating a model on every split.

use serde::{Deserialize, Serialize};

use crate::data::{window, NormStats, NormalizedSplits, WindowedDataset};
use crate::error::Result;
use crate::exec::Execution;
use crate::forecast::{picp, predict_interval, predict_point, IntervalConfig, PicpReport};
use crate::hyperopt::{HyperPoint, Objective, TrialOutcome};
use crate::lstm::{train, AdamState, LstmModel, TrainConfig, TrainReport};
use crate::stats::{metrics, MetricsReport};

/// Interval multipliers reported by [`evaluate`].
pub const PICP_MULTIPLIERS: [f64; 4] = [1.0, 2.0, 3.0, 5.0];

/// Windowed train, validation and test sets.
#[derive(Debug, Clone)]
pub struct Windows {
    pub train: WindowedDataset,
    pub val: WindowedDataset,
    pub test: WindowedDataset,
}

impl Windows {
    pub fn new(splits: &NormalizedSplits, w: usize, s: usize) -> Result<Self> {
        Ok(Windows {
            train: window(&splits.train, w, s)?,
            val: window(&splits.val, w, s)?,
            test: window(&splits.test, w, s)?,
        })
    }

    pub fn named(&self) -> [(&'static str, &WindowedDataset); 3] {
        [("train", &self.train), ("val", &self.val), ("test", &self.test)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub epochs: usize,
    pub clip_norm: Option<f64>,
    pub patience: Option<usize>,
    pub slide: usize,
    #[serde(default)]
    pub exec: Execution,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            epochs: 150,
            clip_norm: Some(5.0),
            patience: None,
            slide: 1,
            exec: Execution::default(),
        }
    }
}

/// Builds and trains the model described by `point`.
pub fn fit(windows: &Windows, stats: &NormStats, point: &HyperPoint, seed: u64, cfg: &FitConfig) -> Result<(LstmModel, TrainReport)> {
    let mut model = LstmModel::new(windows.train.n_features(), &point.hidden_sizes(), point.dropout_p, seed)?;
    model.norm_stats_id = Some(stats.id());
    let mut adam = AdamState::new(point.learning_rate, &model.params);
    let tc = TrainConfig {
        batch_size: point.batch_size,
        epochs: cfg.epochs,
        clip_norm: cfg.clip_norm,
        patience: cfg.patience,
        exec: cfg.exec,
    };
    let report = train(&mut model, &windows.train, &windows.val, &tc, &mut adam)?;
    Ok((model, report))
}

fn actuals(ds: &WindowedDataset) -> Vec<f64> {
    ds.targets_kwh().unwrap_or_else(|| ds.targets())
}

/// Validation MSE (kWh²) and MAPE with dropout off.
pub fn validation_score(model: &LstmModel, val: &WindowedDataset, stats: &NormStats, exec: Execution) -> Result<MetricsReport> {
    let pred = predict_point(model, val, stats, exec)?;
    metrics(&actuals(val), &pred)
}

/// Hyperparameter objective over prepared splits. Windows are rebuilt per
/// trial because the window size is a searched dimension.
pub struct TrialObjective<'a> {
    pub splits: &'a NormalizedSplits,
    pub stats: &'a NormStats,
    pub fit: FitConfig,
}

impl Objective for TrialObjective<'_> {
    fn evaluate(&self, point: &HyperPoint, seed: u64) -> Result<TrialOutcome> {
        let windows = Windows::new(self.splits, point.window_size, self.fit.slide)?;
        let (model, report) = fit(&windows, self.stats, point, seed, &self.fit)?;
        let score = validation_score(&model, &windows.val, self.stats, self.fit.exec)?;
        Ok(TrialOutcome {
            train_report: report,
            val_mse: score.mse,
            val_mape: score.mape,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub split: String,
    pub n: usize,
    /// Dropout off.
    pub point: MetricsReport,
    /// Metrics of the Monte Carlo mean.
    pub interval: MetricsReport,
    pub picp: Vec<PicpReport>,
}

/// Point and interval-mean metrics plus coverage at each of
/// [`PICP_MULTIPLIERS`], for every split.
pub fn evaluate(model: &LstmModel, windows: &Windows, stats: &NormStats, icfg: &IntervalConfig) -> Result<Vec<SplitEvaluation>> {
    windows
        .named()
        .into_iter()
        .map(|(name, ds)| {
            let y = actuals(ds);
            let point = predict_point(model, ds, stats, icfg.exec)?;
            let iv = predict_interval(model, ds, stats, icfg)?;
            let means: Vec<f64> = iv.iter().map(|f| f.mean).collect();
            Ok(SplitEvaluation {
                split: name.to_string(),
                n: ds.len(),
                point: metrics(&y, &point)?,
                interval: metrics(&y, &means)?,
                picp: PICP_MULTIPLIERS.iter().map(|&k| picp(&iv, &y, k)).collect::<Result<_>>()?,
            })
        })
        .collect()
}
