use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percent, over rows with non-zero actuals.
    pub mape: f64,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
    /// Rows left out of MAPE because the actual value is zero.
    pub mape_excluded: usize,
}

pub fn metrics(actual: &[f64], predicted: &[f64]) -> Result<MetricsReport> {
    if actual.len() != predicted.len() {
        return Err(Error::shape("metrics", format!("{} actuals", actual.len()), format!("{} predictions", predicted.len())));
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite value in metrics input".into()));
    }
    let n = actual.len() as f64;
    let (mut sq, mut abs, mut pct, mut pct_n) = (0.0, 0.0, 0.0, 0usize);
    for (&y, &p) in actual.iter().zip(predicted) {
        let e = y - p;
        sq += e * e;
        abs += e.abs();
        if y != 0.0 {
            pct += (e / y).abs();
            pct_n += 1;
        }
    }
    if pct_n == 0 {
        return Err(Error::MapeUndefined);
    }
    let mse = sq / n;
    Ok(MetricsReport {
        mape: 100.0 * pct / pct_n as f64,
        mse,
        rmse: mse.sqrt(),
        mae: abs / n,
        n: actual.len(),
        mape_excluded: actual.len() - pct_n,
    })
}
