//! Error metrics and the Mann-Whitney U test.

mod mann_whitney;
mod metrics;

pub use mann_whitney::{mann_whitney, mann_whitney_approx, mann_whitney_exact, midranks, u_statistic, MannWhitneyResult, Method, EXACT_MAX_TOTAL};
pub use metrics::{metrics, MetricsReport};
