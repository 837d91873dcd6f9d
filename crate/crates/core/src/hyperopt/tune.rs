use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorKind, Result};
use crate::exec::Execution;
use crate::lstm::TrainReport;
use crate::rng::{derive_seed, stream, TAG_TUNE};

use super::space::{HyperPoint, SearchSpace};
use super::surrogate::Surrogate;

const LENGTH_SQ: f64 = 3.0;
const EI_XI: f64 = 0.01;

/// What an objective reports for one trained configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub train_report: TrainReport,
    /// Validation MSE in kWh², dropout off.
    pub val_mse: f64,
    pub val_mape: f64,
}

/// Trains and validates one configuration. Must be a pure function of its
/// arguments for searches to be reproducible.
pub trait Objective: Sync {
    fn evaluate(&self, point: &HyperPoint, seed: u64) -> Result<TrialOutcome>;
}

impl<F> Objective for F
where
    F: Fn(&HyperPoint, u64) -> Result<TrialOutcome> + Sync,
{
    fn evaluate(&self, point: &HyperPoint, seed: u64) -> Result<TrialOutcome> {
        self(point, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub hyperparams: HyperPoint,
    pub seed: u64,
    pub train_report: TrainReport,
    /// `f64::MAX` when training diverged.
    pub val_mse: f64,
    pub val_mape: f64,
    pub diverged: bool,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct TuneConfig {
    pub budget: usize,
    pub seed: u64,
    /// Trials evaluated together between surrogate updates.
    pub workers: usize,
    pub exec: Execution,
    /// Append-only JSONL trial log; existing records matching this search
    /// are reused instead of re-evaluated.
    pub log_path: Option<PathBuf>,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            budget: 80,
            seed: 42,
            workers: 1,
            exec: Execution::default(),
            log_path: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: TrialRecord,
    /// In trial order.
    pub trials: Vec<TrialRecord>,
}

/// Random trials before the surrogate takes over.
pub fn random_start_count(budget: usize) -> usize {
    (budget / 10).max(8).min(budget)
}

fn rank(a: &TrialRecord, b: &TrialRecord) -> Ordering {
    a.val_mse.total_cmp(&b.val_mse).then_with(|| a.hyperparams.lex_cmp(&b.hyperparams))
}

/// Trials sorted by validation MSE, ties broken by hyperparameter order.
pub fn leaderboard(trials: &[TrialRecord]) -> Vec<TrialRecord> {
    let mut out = trials.to_vec();
    out.sort_by(rank);
    out
}

pub fn read_trial_log(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            // a torn final line from an interrupted write is dropped
            Err(e) if e.is_eof() => log::warn!("{}: ignoring truncated line {}", path.display(), n + 1),
            Err(e) => {
                return Err(Error::Corrupt {
                    kind: "trial log",
                    detail: format!("line {}: {e}", n + 1),
                })
            }
        }
    }
    Ok(out)
}

struct Log {
    path: PathBuf,
    previous: BTreeMap<usize, TrialRecord>,
}

impl Log {
    fn open(path: &Path) -> Result<Self> {
        // drop a torn final line so new records start on a fresh line
        if let Ok(bytes) = std::fs::read(path) {
            if bytes.last().is_some_and(|b| *b != b'\n') {
                let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
                let f = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
                f.set_len(keep as u64).map_err(|e| Error::io(path, e))?;
                log::warn!("{}: dropped an incomplete trailing record", path.display());
            }
        }
        let previous = read_trial_log(path)?.into_iter().map(|r| (r.trial, r)).collect();
        Ok(Log {
            path: path.to_path_buf(),
            previous,
        })
    }

    fn reuse(&self, trial: usize, point: &HyperPoint, seed: u64) -> Result<Option<TrialRecord>> {
        match self.previous.get(&trial) {
            None => Ok(None),
            Some(r) if r.hyperparams == *point && r.seed == seed => Ok(Some(r.clone())),
            Some(_) => Err(Error::InvalidArgument(format!(
                "trial log {} was written by a different search (trial {trial} differs)",
                self.path.display()
            ))),
        }
    }

    fn append(&self, r: &TrialRecord) -> Result<()> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        let mut line = serde_json::to_string(r)?;
        line.push('\n');
        f.write_all(line.as_bytes()).map_err(|e| Error::io(&self.path, e))
    }
}

/// Picks the next `count` unevaluated point indices by expected improvement
/// on log validation MSE. Ties go to the lexicographically smaller point.
fn propose(space: &SearchSpace, trials: &[TrialRecord], index_of: &BTreeMap<usize, usize>, used: &[bool], count: usize) -> Vec<usize> {
    let finite: Vec<f64> = trials.iter().filter(|t| !t.diverged).map(|t| t.val_mse.max(1e-300).ln()).collect();
    let worst = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fill = if worst.is_finite() { worst + 1.0 } else { 0.0 };
    let xs: Vec<Vec<f64>> = trials.iter().map(|t| space.encode(index_of[&t.trial])).collect();
    let ys: Vec<f64> = trials
        .iter()
        .map(|t| if t.diverged { fill } else { t.val_mse.max(1e-300).ln() })
        .collect();
    let best = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let free: Vec<usize> = (0..space.len()).filter(|&i| !used[i]).collect();
    let scores: Vec<f64> = match Surrogate::fit(&xs, &ys, LENGTH_SQ) {
        Some(s) => free.iter().map(|&i| s.expected_improvement(&space.encode(i), best, EI_XI)).collect(),
        None => vec![0.0; free.len()],
    };
    let mut order: Vec<usize> = (0..free.len()).collect();
    // stable sort keeps lexicographic order among equal scores
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.into_iter().take(count).map(|k| free[k]).collect()
}

/// Runs `budget` distinct trials: a seeded random start, then expected
/// improvement under a Gaussian-process surrogate. Trials are evaluated in
/// groups of `workers`; the surrogate only changes between groups, and
/// results are merged in trial order, so the search does not depend on
/// thread scheduling.
pub fn tune(space: &SearchSpace, cfg: &TuneConfig, objective: &dyn Objective) -> Result<TuneResult> {
    let space = space.clone().normalized()?;
    if cfg.budget == 0 {
        return Err(Error::InvalidArgument("tuning budget must be at least 1".into()));
    }
    if cfg.workers == 0 {
        return Err(Error::InvalidArgument("need at least one tuning worker".into()));
    }
    let budget = if cfg.budget > space.len() {
        log::warn!("budget {} exceeds the {} points in the search space; clamping", cfg.budget, space.len());
        space.len()
    } else {
        cfg.budget
    };
    let log = cfg.log_path.as_deref().map(Log::open).transpose()?;

    let mut order: Vec<usize> = (0..space.len()).collect();
    order.shuffle(&mut stream(cfg.seed, &[TAG_TUNE, u64::MAX]));
    let n_random = random_start_count(budget);

    let mut used = vec![false; space.len()];
    let mut index_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut trials: Vec<TrialRecord> = Vec::with_capacity(budget);

    while trials.len() < budget {
        let start = trials.len();
        let group = if start < n_random {
            let end = n_random.min(start + cfg.workers);
            order[start..end].to_vec()
        } else {
            propose(&space, &trials, &index_of, &used, cfg.workers.min(budget - start))
        };
        let results = cfg.exec.try_map(group.len(), |g| -> Result<TrialRecord> {
            let trial = start + g;
            let point = space.point(group[g]);
            let seed = derive_seed(cfg.seed, &[TAG_TUNE, trial as u64]);
            if let Some(log) = &log {
                if let Some(r) = log.reuse(trial, &point, seed)? {
                    return Ok(r);
                }
            }
            let clock = Instant::now();
            let (outcome, diverged) = match objective.evaluate(&point, seed) {
                Ok(o) => (o, false),
                Err(e) if e.kind() == ErrorKind::Numeric => {
                    log::warn!("trial {trial} diverged: {e}");
                    (
                        TrialOutcome {
                            train_report: TrainReport::default(),
                            val_mse: f64::MAX,
                            val_mape: f64::MAX,
                        },
                        true,
                    )
                }
                Err(e) => return Err(e),
            };
            Ok(TrialRecord {
                trial,
                hyperparams: point,
                seed,
                train_report: outcome.train_report,
                val_mse: if outcome.val_mse.is_finite() { outcome.val_mse } else { f64::MAX },
                val_mape: outcome.val_mape,
                diverged: diverged || !outcome.val_mse.is_finite(),
                wall_time: clock.elapsed().as_secs_f64(),
            })
        })?;
        for (g, r) in results.into_iter().enumerate() {
            if let Some(log) = &log {
                if !log.previous.contains_key(&r.trial) {
                    log.append(&r)?;
                }
            }
            used[group[g]] = true;
            index_of.insert(r.trial, group[g]);
            log::info!("trial {} val_mse {:.6} {:?}", r.trial, r.val_mse, r.hyperparams);
            trials.push(r);
        }
    }
    let best = leaderboard(&trials).into_iter().next().expect("budget is at least 1");
    Ok(TuneResult { best, trials })
}
