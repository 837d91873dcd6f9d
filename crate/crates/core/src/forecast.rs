//! Point forecasts, Monte Carlo dropout intervals and interval coverage.

use std::io::Write;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::data::csvio::format_timestamp;
use crate::data::{NormStats, WindowedDataset};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lstm::LstmModel;
use crate::rng::{stream, TAG_MC};

/// Passes used when none are configured.
pub const DEFAULT_PASSES: usize = 100;

/// Interval for one time step, in kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalForecast {
    pub mean: f64,
    /// Population standard deviation of the passes.
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    pub k: f64,
    pub n_passes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_samples: Option<Vec<f64>>,
}

impl IntervalForecast {
    /// Mean, population deviation and `mean ± k·sigma` bounds of `samples`.
    pub fn from_samples(samples: &[f64], k: f64, keep_samples: bool) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidArgument(format!("interval multiplier {k} must be finite and non-negative")));
        }
        let n = samples.len() as f64;
        // shifted by the first sample so identical samples give exactly σ = 0
        let x0 = samples[0];
        let mean = x0 + samples.iter().map(|s| s - x0).sum::<f64>() / n;
        let sigma = (samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n).sqrt();
        Ok(IntervalForecast {
            mean,
            sigma,
            lower: mean - k * sigma,
            upper: mean + k * sigma,
            k,
            n_passes: samples.len(),
            raw_samples: keep_samples.then(|| samples.to_vec()),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.k * self.sigma
    }

    pub fn contains(&self, actual: f64, k: f64) -> bool {
        (actual - self.mean).abs() <= k * self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalConfig {
    pub n_passes: usize,
    pub k: f64,
    pub seed: u64,
    pub keep_samples: bool,
    pub exec: Execution,
}

impl Default for IntervalConfig {
    fn default() -> Self {
        IntervalConfig {
            n_passes: DEFAULT_PASSES,
            k: 1.0,
            seed: 42,
            keep_samples: false,
            exec: Execution::default(),
        }
    }
}

fn check_features(model: &LstmModel, ds: &WindowedDataset, stats: &NormStats) -> Result<()> {
    if model.input_size() != ds.n_features() {
        return Err(Error::shape("forecast", format!("model input {}", model.input_size()), format!("dataset features {}", ds.n_features())));
    }
    if stats.n_features() != ds.n_features() {
        return Err(Error::shape("forecast", format!("normalization columns {}", stats.n_features()), format!("dataset features {}", ds.n_features())));
    }
    if let Some(id) = &model.norm_stats_id {
        if *id != stats.id() {
            return Err(Error::InvalidArgument(format!("model was trained with normalization {id}, dataset uses {}", stats.id())));
        }
    }
    Ok(())
}

/// One deterministic pass per sample with dropout off, in kWh.
pub fn predict_point(model: &LstmModel, ds: &WindowedDataset, stats: &NormStats, exec: Execution) -> Result<Vec<f64>> {
    check_features(model, ds, stats)?;
    exec.try_map(ds.len(), |i| model.predict_window(ds.input(i), None).map(|z| stats.inverse_consumption(z)))
}

/// `n_passes` stochastic passes per sample with dropout active. Pass `j` of
/// sample `i` uses its own stream, so results do not depend on scheduling.
/// Each pass is mapped to kWh before the statistics are taken.
pub fn predict_interval(model: &LstmModel, ds: &WindowedDataset, stats: &NormStats, cfg: &IntervalConfig) -> Result<Vec<IntervalForecast>> {
    check_features(model, ds, stats)?;
    if cfg.n_passes < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 passes, got {}", cfg.n_passes)));
    }
    if model.dropout_p == 0.0 {
        log::warn!("model has no dropout; intervals will have zero width");
        return exec_deterministic(model, ds, stats, cfg);
    }
    cfg.exec.try_map(ds.len(), |i| {
        let input = ds.input(i);
        let samples = (0..cfg.n_passes)
            .map(|j| {
                let mut rng = stream(cfg.seed, &[TAG_MC, i as u64, j as u64]);
                model.predict_window(input, Some(&mut rng)).map(|z| stats.inverse_consumption(z))
            })
            .collect::<Result<Vec<_>>>()?;
        IntervalForecast::from_samples(&samples, cfg.k, cfg.keep_samples)
    })
}

fn exec_deterministic(model: &LstmModel, ds: &WindowedDataset, stats: &NormStats, cfg: &IntervalConfig) -> Result<Vec<IntervalForecast>> {
    let points = predict_point(model, ds, stats, cfg.exec)?;
    points
        .into_iter()
        .map(|p| IntervalForecast::from_samples(&vec![p; cfg.n_passes], cfg.k, cfg.keep_samples))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicpReport {
    pub k: f64,
    pub coverage: f64,
    pub n: usize,
}

/// Fraction of actuals within `mean ± k·sigma`.
pub fn picp(forecasts: &[IntervalForecast], actuals: &[f64], k: f64) -> Result<PicpReport> {
    if forecasts.len() != actuals.len() {
        return Err(Error::shape("picp", format!("{} forecasts", forecasts.len()), format!("{} actuals", actuals.len())));
    }
    if forecasts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let inside = forecasts.iter().zip(actuals).filter(|(f, a)| f.contains(**a, k)).count();
    Ok(PicpReport {
        k,
        coverage: inside as f64 / forecasts.len() as f64,
        n: forecasts.len(),
    })
}

/// One row of the forecast output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub timestamp: String,
    pub dst_flag: u8,
    pub actual: Option<f64>,
    pub point: f64,
    pub mean: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Joins point and interval forecasts with the dataset's target timestamps
/// and actuals.
pub fn forecast_records(ds: &WindowedDataset, point: &[f64], intervals: &[IntervalForecast]) -> Result<Vec<ForecastRecord>> {
    if point.len() != ds.len() || intervals.len() != ds.len() {
        return Err(Error::shape("forecast_records", format!("{} samples", ds.len()), format!("{} point / {} interval", point.len(), intervals.len())));
    }
    (0..ds.len())
        .map(|i| {
            let (ts, flag): (NaiveDateTime, u8) = ds
                .target_time(i)
                .ok_or_else(|| Error::InvalidArgument("dataset has no timestamps".into()))?;
            let f = &intervals[i];
            Ok(ForecastRecord {
                timestamp: format_timestamp(ts),
                dst_flag: flag,
                actual: ds.target_kwh(i),
                point: point[i],
                mean: f.mean,
                sigma: f.sigma,
                lower: f.lower,
                upper: f.upper,
            })
        })
        .collect()
}

pub fn write_forecast_csv<W: Write>(records: &[ForecastRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<forecast csv>", e))?;
    Ok(())
}
