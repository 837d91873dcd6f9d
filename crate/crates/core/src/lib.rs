//! Interval load forecasting with stacked LSTMs and Monte Carlo dropout.
//!
//! The crate covers the whole path from raw household and weather CSVs to
//! evaluated interval forecasts: [`data`] prepares and windows the series,
//! [`lstm`] trains the network, [`forecast`] produces point and interval
//! predictions, [`stats`] scores them, and [`hyperopt`] searches the
//! hyperparameter grid. [`synth`] generates seeded test households.

pub mod data;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod forecast;
pub mod hyperopt;
pub mod linalg;
pub mod lstm;
mod rng;
pub mod stats;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
pub use rng::{derive_seed, stream, Rng};
