//! Model-based search over a discrete hyperparameter grid.

mod space;
mod surrogate;
mod tune;

pub use space::{HyperPoint, SearchSpace};
pub use surrogate::Surrogate;
pub use tune::{leaderboard, read_trial_log, random_start_count, tune, Objective, TrialOutcome, TrialRecord, TuneConfig, TuneResult};
