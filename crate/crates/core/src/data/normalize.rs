//! z-score scaling with statistics taken from the training split only.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::table::{TimeTable, CONSUMPTION, DST_COLUMN, FEATURE_NAMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub name: String,
    /// Column index in [`FEATURE_NAMES`].
    pub column: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// How each model input column is produced: z-scored with `stat`, or passed
/// through unchanged (the binary DST flag).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnScaling {
    ZScore(FeatureStat),
    Passthrough { name: String, column: usize },
}

impl ColumnScaling {
    pub fn name(&self) -> &str {
        match self {
            ColumnScaling::ZScore(s) => &s.name,
            ColumnScaling::Passthrough { name, .. } => name,
        }
    }

    fn column(&self) -> usize {
        match self {
            ColumnScaling::ZScore(s) => s.column,
            ColumnScaling::Passthrough { column, .. } => *column,
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            ColumnScaling::ZScore(s) => (x - s.mean) / s.std,
            ColumnScaling::Passthrough { .. } => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    /// Model input columns in order; the first is always consumption.
    pub columns: Vec<ColumnScaling>,
    /// Features dropped because they were constant on the training split.
    pub dropped: Vec<String>,
    /// Training rows the statistics were computed from.
    pub train_rows: usize,
}

impl NormStats {
    /// Computes per-feature population mean and standard deviation over the
    /// training rows. Constant features are dropped with a warning.
    pub fn fit(train: &TimeTable) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = train.len() as f64;
        let mut columns = Vec::new();
        let mut dropped = Vec::new();
        for (col, name) in FEATURE_NAMES.iter().enumerate() {
            if col == DST_COLUMN {
                columns.push(ColumnScaling::Passthrough {
                    name: name.to_string(),
                    column: col,
                });
                continue;
            }
            let values = train.rows.iter().map(|r| r.features()[col]);
            let mean = values.clone().sum::<f64>() / n;
            let std = (values.map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            if std <= 1e-12 * mean.abs().max(1.0) {
                if col == CONSUMPTION {
                    return Err(Error::InvalidData("consumption is constant on the training split".into()));
                }
                log::warn!("feature {name} is constant on the training split; dropping it");
                dropped.push(name.to_string());
                continue;
            }
            columns.push(ColumnScaling::ZScore(FeatureStat {
                name: name.to_string(),
                column: col,
                mean,
                std,
            }));
        }
        Ok(NormStats {
            columns,
            dropped,
            train_rows: train.len(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name().to_string()).collect()
    }

    pub fn consumption(&self) -> &FeatureStat {
        match &self.columns[0] {
            ColumnScaling::ZScore(s) if s.column == CONSUMPTION => s,
            _ => unreachable!("consumption is always the first z-scored column"),
        }
    }

    /// Normalized consumption back to kWh.
    pub fn inverse_consumption(&self, z: f64) -> f64 {
        let s = self.consumption();
        z * s.std + s.mean
    }

    pub fn scale_consumption(&self, kwh: f64) -> f64 {
        let s = self.consumption();
        (kwh - s.mean) / s.std
    }

    /// Short content hash used to tie models and reports to these statistics.
    pub fn id(&self) -> String {
        let json = serde_json::to_vec(self).expect("NormStats serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}

/// A split transformed into model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSplit {
    pub timestamps: Vec<(NaiveDateTime, u8)>,
    /// rows × n_features, columns as in [`NormStats::columns`].
    pub features: Matrix,
    pub consumption_kwh: Vec<f64>,
}

impl NormalizedSplit {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Normalized consumption column.
    pub fn target_column(&self) -> Vec<f64> {
        (0..self.len()).map(|r| self.features.get(r, 0)).collect()
    }
}

/// Scales `t` with `stats`, or with statistics fitted on `t` itself when none
/// are given (i.e. `t` is the training split).
pub fn normalize(t: &TimeTable, stats: Option<&NormStats>) -> Result<(NormalizedSplit, NormStats)> {
    let stats = match stats {
        Some(s) => s.clone(),
        None => NormStats::fit(t)?,
    };
    let f = stats.n_features();
    let mut data = Vec::with_capacity(t.len() * f);
    for r in &t.rows {
        let raw = r.features();
        data.extend(stats.columns.iter().map(|c| c.apply(raw[c.column()])));
    }
    let split = NormalizedSplit {
        timestamps: t.rows.iter().map(|r| (r.timestamp, r.dst_flag)).collect(),
        features: Matrix::from_vec(t.len(), f, data)?,
        consumption_kwh: t.consumption(),
    };
    Ok((split, stats))
}
