//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use loadband::data::{DstRule, PrepareConfig};
use loadband::experiment::FitConfig;
use loadband::hyperopt::{HyperPoint, SearchSpace};
use loadband::synth::SynthConfig;
use loadband::Execution;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Household CSV; defaults to `<out_dir>/household.csv`.
    pub household: Option<PathBuf>,
    /// Weather CSVs; default `<out_dir>/weather.csv`.
    pub weather: Vec<PathBuf>,
    /// `"none"` disables the cutoff.
    pub lockdown_cutoff: String,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub slide: usize,
    pub model: HyperPoint,
    pub epochs: usize,
    pub clip_norm: Option<f64>,
    pub budget: usize,
    pub workers: usize,
    pub search_space: SearchSpace,
    pub n_passes: usize,
    pub k: f64,
    pub exec: Execution,
    pub dst_rule: DstRule,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            out_dir: PathBuf::from("out"),
            household: None,
            weather: Vec::new(),
            lockdown_cutoff: "2020-03-01".into(),
            train_frac: 0.8,
            val_frac: 0.1,
            test_frac: 0.1,
            slide: 1,
            model: HyperPoint {
                batch_size: 32,
                window_size: 24,
                hidden_layers: 1,
                hidden_neurons: 64,
                learning_rate: 1e-3,
                dropout_p: 0.1,
            },
            epochs: 150,
            clip_norm: Some(5.0),
            budget: 80,
            workers: 1,
            search_space: SearchSpace::standard(),
            n_passes: 100,
            k: 1.0,
            exec: Execution::default(),
            dst_rule: DstRule::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let sum = self.train_frac + self.val_frac + self.test_frac;
        if (sum - 1.0).abs() > 1e-9 || [self.train_frac, self.val_frac, self.test_frac].iter().any(|f| *f <= 0.0) {
            return Err(CliError::config(format!(
                "split fractions {}/{}/{} must be positive and sum to 1",
                self.train_frac, self.val_frac, self.test_frac
            )));
        }
        if self.slide == 0 {
            return Err(CliError::config("slide must be at least 1"));
        }
        if self.n_passes < 2 {
            return Err(CliError::config("n_passes must be at least 2"));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(CliError::config("interval multiplier k must be positive"));
        }
        self.cutoff()?;
        Ok(())
    }

    pub fn cutoff(&self) -> Result<Option<NaiveDate>, CliError> {
        match self.lockdown_cutoff.trim() {
            "" | "none" => Ok(None),
            s => NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map(Some)
                .map_err(|e| CliError::config(format!("lockdown_cutoff {s:?}: {e}"))),
        }
    }

    pub fn household_path(&self) -> PathBuf {
        self.household.clone().unwrap_or_else(|| self.out_dir.join("household.csv"))
    }

    pub fn weather_paths(&self) -> Vec<PathBuf> {
        if self.weather.is_empty() {
            vec![self.out_dir.join("weather.csv")]
        } else {
            self.weather.clone()
        }
    }

    pub fn prepare_config(&self) -> Result<PrepareConfig, CliError> {
        Ok(PrepareConfig {
            dst_rule: self.dst_rule,
            lockdown_cutoff: self.cutoff()?,
            val_frac: self.val_frac,
            test_frac: self.test_frac,
        })
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            epochs: self.epochs,
            clip_norm: self.clip_norm,
            patience: None,
            slide: self.slide,
            exec: self.exec,
        }
    }

    /// Short content hash of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}
