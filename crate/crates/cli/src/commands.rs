//! One function per subcommand. Each reads its inputs from the output
//! directory, writes its artifacts there and finishes with a JSON report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::json;

use loadband::data::{csvio, NormalizedSplits, PreparedDataset};
use loadband::experiment::{self, TrialObjective, Windows, PICP_MULTIPLIERS};
use loadband::forecast::{self, IntervalConfig};
use loadband::hyperopt::{self, HyperPoint, TrialRecord, TuneConfig};
use loadband::lstm::{self, LstmModel, TrainReport};
use loadband::stats::mann_whitney;
use loadband::synth;

use crate::config::RunConfig;
use crate::report;
use crate::CliError;

const ALPHA: f64 = 0.05;

fn path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn load_prepared(cfg: &RunConfig) -> Result<PreparedDataset, CliError> {
    let p = path(cfg, "prepared.json");
    if !p.exists() {
        return Err(CliError::missing(&p, "prepare"));
    }
    Ok(PreparedDataset::load(&p)?)
}

fn load_trained(cfg: &RunConfig) -> Result<(LstmModel, TrainSummary, String), CliError> {
    let p = path(cfg, "model.json");
    if !p.exists() {
        return Err(CliError::missing(&p, "train"));
    }
    let model = lstm::load_model(&p)?;
    let hash = report::file_hash(&p)?;
    let summary: TrainSummary = serde_json::from_value(report::read(&path(cfg, "train.json"), "train", "train")?)
        .map_err(|e| CliError::config(format!("train.json: {e}")))?;
    Ok((model, summary, hash))
}

pub fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    let data = synth::generate(&cfg.synth).map_err(|e| e.in_stage("generate"))?;
    let household = path(cfg, "household.csv");
    let weather = path(cfg, "weather.csv");
    csvio::write_household(&data.household, report::create(&household)?)?;
    csvio::write_weather(&data.stations, report::create(&weather)?)?;
    if data.ev_sessions == 0 {
        log::warn!("no EV sessions were generated");
    }
    let ev_hours = data.ev_active.iter().filter(|&&a| a).count();
    report::write(
        &path(cfg, "generate.json"),
        "generate",
        &cfg.hash(),
        json!({
            "synth": cfg.synth,
            "household_id": data.household.household_id,
            "rows": data.household.readings.len(),
            "stations": data.stations.iter().map(|s| s.station_id.clone()).collect::<Vec<_>>(),
            "ev_sessions": data.ev_sessions,
            "ev_hours": ev_hours,
            "no_ev_sessions": data.ev_sessions == 0,
            "files": ["household.csv", "weather.csv"],
        }),
    )?;
    println!("wrote {} rows, {} EV sessions to {}", data.household.readings.len(), data.ev_sessions, cfg.out_dir.display());
    Ok(())
}

pub fn prepare(cfg: &RunConfig) -> Result<(), CliError> {
    let household_path = cfg.household_path();
    if !household_path.exists() {
        return Err(CliError::missing(&household_path, "generate"));
    }
    let household = csvio::read_household_file(&household_path).map_err(|e| e.in_stage("read household"))?;
    let mut stations = Vec::new();
    for w in cfg.weather_paths() {
        if !w.exists() {
            return Err(CliError::missing(&w, "generate"));
        }
        stations.extend(csvio::read_weather_file(&w).map_err(|e| e.in_stage("read weather"))?);
    }
    let prepared = loadband::data::prepare(&household, &stations, &cfg.prepare_config()?)?;
    prepared.save(path(cfg, "prepared.json"))?;
    let b = &prepared.bounds;
    report::write(
        &path(cfg, "prepare.json"),
        "prepare",
        &cfg.hash(),
        json!({
            "household_id": prepared.household_id,
            "merge": prepared.merge,
            "rows_after_cutoff": prepared.rows_after_cutoff,
            "split_rows": {"train": b.train_end, "val": b.val_end - b.train_end, "test": b.total - b.val_end},
            "norm_stats_id": prepared.norm_stats.id(),
            "features": prepared.norm_stats.columns.iter().map(|c| c.name().to_string()).collect::<Vec<_>>(),
            "dropped_features": prepared.norm_stats.dropped,
        }),
    )?;
    println!(
        "prepared {} rows (train {}, val {}, test {})",
        b.total,
        b.train_end,
        b.val_end - b.train_end,
        b.total - b.val_end
    );
    Ok(())
}

pub fn stats(cfg: &RunConfig) -> Result<(), CliError> {
    let prepared = load_prepared(cfg)?;
    let b = &prepared.bounds;
    let kwh = &prepared.columns.consumption_kwh;
    let (train, test) = (&kwh[..b.train_end], &kwh[b.val_end..]);
    let r = mann_whitney(train, test, ALPHA)?;
    report::write(
        &path(cfg, "stats.json"),
        "stats",
        &cfg.hash(),
        json!({
            "comparison": "train vs test consumption",
            "rows": [{
                "household_id": prepared.household_id,
                "n_train": r.n1,
                "n_test": r.n2,
                "u_statistic": r.u_statistic,
                "p_value": r.p_value,
                "method": r.method,
                "alpha": r.alpha,
                "reject": r.reject,
            }],
        }),
    )?;
    println!("{:<16} {:>12} {:>8}", "household", "p-value", "reject");
    println!("{:<16} {:>12.4e} {:>8}", prepared.household_id, r.p_value, r.reject);
    Ok(())
}

fn normalized(prepared: &PreparedDataset) -> Result<NormalizedSplits, CliError> {
    Ok(prepared.normalized()?)
}

#[derive(Serialize)]
struct LeaderboardEntry<'a> {
    trial: usize,
    hyperparams: &'a HyperPoint,
    seed: u64,
    val_mse: f64,
    val_mape: f64,
    diverged: bool,
    epochs_run: usize,
}

impl<'a> From<&'a TrialRecord> for LeaderboardEntry<'a> {
    fn from(r: &'a TrialRecord) -> Self {
        LeaderboardEntry {
            trial: r.trial,
            hyperparams: &r.hyperparams,
            seed: r.seed,
            val_mse: r.val_mse,
            val_mape: r.val_mape,
            diverged: r.diverged,
            epochs_run: r.train_report.epochs_run,
        }
    }
}

pub fn tune(cfg: &RunConfig) -> Result<(), CliError> {
    let prepared = load_prepared(cfg)?;
    let splits = normalized(&prepared)?;
    let objective = TrialObjective {
        splits: &splits,
        stats: &prepared.norm_stats,
        fit: cfg.fit_config(),
    };
    let tcfg = TuneConfig {
        budget: cfg.budget,
        seed: cfg.seed,
        workers: cfg.workers,
        exec: cfg.exec,
        log_path: Some(path(cfg, "trials.jsonl")),
    };
    let result = hyperopt::tune(&cfg.search_space, &tcfg, &objective)?;
    let board = hyperopt::leaderboard(&result.trials);
    report::write(
        &path(cfg, "tune.json"),
        "tune",
        &cfg.hash(),
        json!({
            "budget": cfg.budget,
            "seed": cfg.seed,
            "search_space_size": cfg.search_space.len(),
            "best": LeaderboardEntry::from(&result.best),
            "leaderboard": board.iter().map(LeaderboardEntry::from).collect::<Vec<_>>(),
        }),
    )?;
    let b = &result.best;
    println!("best trial {} val_mse {:.6} val_mape {:.3}%: {:?}", b.trial, b.val_mse, b.val_mape, b.hyperparams);
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainSummary {
    hyperparams: HyperPoint,
    seed: u64,
    slide: usize,
    epochs: usize,
    source: String,
    norm_stats_id: String,
    train_report: TrainReport,
}

pub fn train(cfg: &RunConfig, tuned: bool) -> Result<(), CliError> {
    let prepared = load_prepared(cfg)?;
    let (point, seed, source) = if tuned {
        let t = report::read(&path(cfg, "tune.json"), "tune", "tune")?;
        let best = &t["best"];
        let point: HyperPoint = serde_json::from_value(best["hyperparams"].clone())
            .map_err(|e| CliError::config(format!("tune.json: {e}")))?;
        let seed = best["seed"].as_u64().ok_or_else(|| CliError::config("tune.json: best trial has no seed"))?;
        (point, seed, format!("tune trial {}", best["trial"]))
    } else {
        (cfg.model, cfg.seed, "config".to_string())
    };
    let splits = normalized(&prepared)?;
    let windows = Windows::new(&splits, point.window_size, cfg.slide)?;
    let (model, train_report) = experiment::fit(&windows, &prepared.norm_stats, &point, seed, &cfg.fit_config())?;
    lstm::save_model(&model, path(cfg, "model.json"))?;

    let mut curve = csv::Writer::from_writer(report::create(&path(cfg, "loss_curve.csv"))?);
    let csv_err = |e: csv::Error| CliError::config(format!("loss_curve.csv: {e}"));
    curve.write_record(["epoch", "train_loss", "val_loss"]).map_err(csv_err)?;
    for (i, (t, v)) in train_report.epoch_train_loss.iter().zip(&train_report.epoch_val_loss).enumerate() {
        curve.write_record([(i + 1).to_string(), t.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    curve.flush().map_err(|e| CliError::config(format!("loss_curve.csv: {e}")))?;

    let summary = TrainSummary {
        hyperparams: point,
        seed,
        slide: cfg.slide,
        epochs: cfg.epochs,
        source,
        norm_stats_id: prepared.norm_stats.id(),
        train_report,
    };
    report::write(&path(cfg, "train.json"), "train", &cfg.hash(), &summary)?;
    let last = summary.train_report.epoch_val_loss.last().copied().unwrap_or(f64::NAN);
    println!("trained {} epochs, final val loss {last:.6}", summary.train_report.epochs_run);
    Ok(())
}

fn interval_config(cfg: &RunConfig, k: f64) -> IntervalConfig {
    IntervalConfig {
        n_passes: cfg.n_passes,
        k,
        seed: cfg.seed,
        keep_samples: false,
        exec: cfg.exec,
    }
}

pub fn forecast(cfg: &RunConfig, split: &str) -> Result<(), CliError> {
    let prepared = load_prepared(cfg)?;
    let (model, summary, model_hash) = load_trained(cfg)?;
    let splits = normalized(&prepared)?;
    let windows = Windows::new(&splits, summary.hyperparams.window_size, summary.slide)?;
    let ds = windows
        .named()
        .into_iter()
        .find(|(name, _)| *name == split)
        .map(|(_, ds)| ds)
        .ok_or_else(|| CliError::config(format!("unknown split {split:?}; expected train, val or test")))?;
    let icfg = interval_config(cfg, cfg.k);
    let point = forecast::predict_point(&model, ds, &prepared.norm_stats, cfg.exec)?;
    let intervals = forecast::predict_interval(&model, ds, &prepared.norm_stats, &icfg)?;
    let records = forecast::forecast_records(ds, &point, &intervals)?;
    let csv_name = format!("forecast_{split}.csv");
    forecast::write_forecast_csv(&records, report::create(&path(cfg, &csv_name))?)?;
    report::write(
        &path(cfg, "forecast.json"),
        "forecast",
        &cfg.hash(),
        json!({
            "split": split,
            "file": csv_name,
            "rows": records.len(),
            "model_hash": model_hash,
            "n_passes": icfg.n_passes,
            "k": icfg.k,
            "seed": icfg.seed,
            "dropout_p": model.dropout_p,
        }),
    )?;
    println!("wrote {} forecasts to {}", records.len(), csv_name);
    Ok(())
}

pub fn evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let prepared = load_prepared(cfg)?;
    let (model, summary, model_hash) = load_trained(cfg)?;
    let splits = normalized(&prepared)?;
    let windows = Windows::new(&splits, summary.hyperparams.window_size, summary.slide)?;
    let icfg = interval_config(cfg, cfg.k);
    let results = experiment::evaluate(&model, &windows, &prepared.norm_stats, &icfg)?;
    report::write(
        &path(cfg, "evaluation.json"),
        "evaluation",
        &cfg.hash(),
        json!({
            "model_hash": model_hash,
            "n_passes": icfg.n_passes,
            "seed": icfg.seed,
            "picp_multipliers": PICP_MULTIPLIERS,
            "splits": results,
        }),
    )?;
    println!("{:<6} {:>6} {:>9} {:>9} {:>9} {}", "split", "n", "MAPE %", "RMSE", "MAE", "PICP k=1,2,3,5");
    for r in &results {
        let picp: Vec<String> = r.picp.iter().map(|p| format!("{:.3}", p.coverage)).collect();
        println!(
            "{:<6} {:>6} {:>9.3} {:>9.4} {:>9.4} {}",
            r.split,
            r.n,
            r.point.mape,
            r.point.rmse,
            r.point.mae,
            picp.join(" ")
        );
    }
    Ok(())
}

