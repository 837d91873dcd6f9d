//! Seeded synthetic household with EV charging and two weather stations.
//!
//! Household readings use the DST-adjusted wall clock (so the fall-back hour
//! appears twice and the spring-forward hour is skipped); weather readings use
//! local standard time, like the CSV inputs the pipeline expects.

use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};
use rand::Rng as _;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{dst_annotate, DstRule, HouseholdSeries, WeatherSeries};
use crate::error::{Error, Result};
use crate::rng::{stream, TAG_SYNTH};

const COMFORT_C: f64 = 18.0;
const STATION_IDS: [&str; 2] = ["station_a", "station_b"];

/// Level change added to consumption from `from` (wall clock) onwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelShift {
    pub from: NaiveDateTime,
    pub kw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    /// Inclusive wall-clock range.
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub base_load_kw: f64,
    pub daily_amplitude_kw: f64,
    pub weekly_amplitude_kw: f64,
    pub hvac_gain_kw_per_degc: f64,
    pub ev_charger_kw: f64,
    pub ev_sessions_per_week: f64,
    /// Relative plug-in weight for each hour of the day.
    pub ev_plug_in_hour_distribution: [f64; 24],
    /// Standard deviation of the additive load noise; draws are truncated at
    /// four standard deviations.
    pub noise_std_kw: f64,
    pub missing_temp_rate: f64,
    pub level_shift: Option<LevelShift>,
    pub dst_rule: DstRule,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let mut plug = [0.2; 24];
        for (h, w) in plug.iter_mut().enumerate() {
            *w = match h {
                17..=19 => 3.0,
                20..=22 => 2.0,
                0..=5 => 0.5,
                _ => 0.2,
            };
        }
        SynthConfig {
            seed: 42,
            start: NaiveDateTime::parse_from_str("2018-07-22 00:00:00", "%Y-%m-%d %H:%M:%S").expect("literal"),
            end: NaiveDateTime::parse_from_str("2020-07-21 00:00:00", "%Y-%m-%d %H:%M:%S").expect("literal"),
            base_load_kw: 0.6,
            daily_amplitude_kw: 0.35,
            weekly_amplitude_kw: 0.1,
            hvac_gain_kw_per_degc: 0.05,
            ev_charger_kw: 7.2,
            ev_sessions_per_week: 4.0,
            ev_plug_in_hour_distribution: plug,
            noise_std_kw: 0.15,
            missing_temp_rate: 0.01,
            level_shift: None,
            dst_rule: DstRule::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.end <= self.start {
            return bad("synthetic end must be after start");
        }
        let non_negative = [
            self.base_load_kw,
            self.daily_amplitude_kw,
            self.weekly_amplitude_kw,
            self.hvac_gain_kw_per_degc,
            self.ev_charger_kw,
            self.ev_sessions_per_week,
            self.noise_std_kw,
        ];
        if non_negative.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("synthetic rates and loads must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.missing_temp_rate) {
            return bad("missing_temp_rate must be a probability");
        }
        let plug = &self.ev_plug_in_hour_distribution;
        if plug.iter().any(|w| !w.is_finite() || *w < 0.0) || (self.ev_sessions_per_week > 0.0 && plug.iter().sum::<f64>() <= 0.0) {
            return bad("plug-in hour weights must be non-negative with a positive sum");
        }
        Ok(())
    }

    /// Consumption without EV charging or noise, in kW.
    pub fn deterministic_load(&self, local: NaiveDateTime, temperature: f64) -> f64 {
        let hour = local.hour() as f64;
        let dow = local.weekday().num_days_from_monday() as f64;
        let shift = match &self.level_shift {
            Some(s) if local >= s.from => s.kw,
            _ => 0.0,
        };
        self.base_load_kw
            + self.daily_amplitude_kw * (1.0 + (2.0 * PI * (hour - 13.0) / 24.0).sin())
            + self.weekly_amplitude_kw * (1.0 + (2.0 * PI * (dow + hour / 24.0) / 7.0).cos())
            + self.hvac_gain_kw_per_degc * (temperature - COMFORT_C).abs()
            + shift
    }
}

/// Generated series plus ground truth for tests.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub household: HouseholdSeries,
    pub stations: Vec<WeatherSeries>,
    /// Per household reading: whether a charging session was active.
    pub ev_active: Vec<bool>,
    /// Per household reading: noise-free temperature driving the load.
    pub true_temperature: Vec<f64>,
    pub ev_sessions: usize,
}

fn round_to(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}

fn true_temperature(lst: NaiveDateTime) -> f64 {
    let doy = lst.ordinal() as f64 + lst.hour() as f64 / 24.0;
    let seasonal = 8.0 + 14.0 * (2.0 * PI * (doy - 110.0) / 365.25).sin();
    let diurnal = 4.0 * (2.0 * PI * (lst.hour() as f64 - 9.0) / 24.0).sin();
    seasonal + diurnal
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let rule = &cfg.dst_rule;
    let to_std = |wall: NaiveDateTime| -> Result<NaiveDateTime> {
        let flag = dst_annotate(&[wall], rule)?[0];
        Ok(rule.local_to_standard(wall, flag))
    };
    let start = to_std(cfg.start)?;
    let end = to_std(cfg.end)?;
    let hours = (end - start).num_hours() as usize + 1;
    let instants: Vec<NaiveDateTime> = (0..hours).map(|i| start + Duration::hours(i as i64)).collect();

    let mut weather_rng = stream(cfg.seed, &[TAG_SYNTH, 1]);
    let mut load_rng = stream(cfg.seed, &[TAG_SYNTH, 2]);
    let mut ev_rng = stream(cfg.seed, &[TAG_SYNTH, 3]);
    let mut gap_rng = stream(cfg.seed, &[TAG_SYNTH, 4]);

    // weather: shared AR(1) anomaly plus per-station offset and noise
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut anomaly = 0.0;
    let mut truth = Vec::with_capacity(hours);
    let mut station_readings: Vec<Vec<(NaiveDateTime, Option<f64>)>> = vec![Vec::with_capacity(hours); 2];
    for &lst in &instants {
        anomaly = 0.95 * anomaly + 0.6 * unit.sample(&mut weather_rng);
        let t = true_temperature(lst) + anomaly;
        truth.push(t);
        for (s, readings) in station_readings.iter_mut().enumerate() {
            let offset = if s == 0 { 0.3 } else { -0.3 };
            let value = round_to(t + offset + 0.4 * unit.sample(&mut weather_rng), 1);
            let missing = gap_rng.random::<f64>() < cfg.missing_temp_rate;
            readings.push((lst, (!missing).then_some(value)));
        }
    }

    // EV sessions: Poisson arrivals per hour, rate thinned by plug-in weight
    let weight_sum: f64 = cfg.ev_plug_in_hour_distribution.iter().sum();
    let mut ev_active = vec![false; hours];
    let mut sessions = 0;
    let mut busy_until = 0;
    for (i, &lst) in instants.iter().enumerate() {
        if cfg.ev_sessions_per_week == 0.0 {
            break;
        }
        let (wall, _) = rule.standard_to_local(lst);
        let rate = cfg.ev_sessions_per_week / 7.0 * cfg.ev_plug_in_hour_distribution[wall.hour() as usize] / weight_sum;
        let arrivals = if rate > 0.0 {
            Poisson::new(rate).expect("positive rate").sample(&mut ev_rng) as u64
        } else {
            0
        };
        let duration: usize = ev_rng.random_range(2..=5);
        if arrivals > 0 && i >= busy_until {
            sessions += 1;
            busy_until = (i + duration).min(hours);
            ev_active[i..busy_until].iter_mut().for_each(|a| *a = true);
        }
    }

    let mut readings = Vec::with_capacity(hours);
    for (i, &lst) in instants.iter().enumerate() {
        let (wall, _) = rule.standard_to_local(lst);
        let noise = (cfg.noise_std_kw * unit.sample(&mut load_rng)).clamp(-4.0 * cfg.noise_std_kw, 4.0 * cfg.noise_std_kw);
        let ev = if ev_active[i] { cfg.ev_charger_kw } else { 0.0 };
        let kwh = (cfg.deterministic_load(wall, truth[i]) + ev + noise).max(0.0);
        readings.push((wall, round_to(kwh, 4)));
    }

    Ok(SynthData {
        household: HouseholdSeries {
            household_id: format!("synthetic-{}", cfg.seed),
            readings,
        },
        stations: STATION_IDS
            .iter()
            .zip(station_readings)
            .map(|(id, readings)| WeatherSeries {
                station_id: id.to_string(),
                readings,
            })
            .collect(),
        ev_active,
        true_temperature: truth,
        ev_sessions: sessions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{write_household, write_weather};

    fn short(seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            start: NaiveDateTime::parse_from_str("2019-10-01 00:00:00", "%Y-%m-%d %H:%M:%S").unwrap(),
            end: NaiveDateTime::parse_from_str("2019-11-30 23:00:00", "%Y-%m-%d %H:%M:%S").unwrap(),
            ..SynthConfig::default()
        }
    }

    fn csv_bytes(d: &SynthData) -> (Vec<u8>, Vec<u8>) {
        let mut h = Vec::new();
        let mut w = Vec::new();
        write_household(&d.household, &mut h).unwrap();
        write_weather(&d.stations, &mut w).unwrap();
        (h, w)
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&short(42)).unwrap();
        let b = generate(&short(42)).unwrap();
        assert_eq!(csv_bytes(&a), csv_bytes(&b));
        let c = generate(&short(43)).unwrap();
        assert_ne!(csv_bytes(&a).0, csv_bytes(&c).0);
    }

    #[test]
    fn full_range_row_count_and_fall_back_duplicate() {
        let d = generate(&SynthConfig::default()).unwrap();
        assert_eq!(d.household.readings.len(), 17_521);
        let dup = NaiveDateTime::parse_from_str("2019-11-03 01:00:00", "%Y-%m-%d %H:%M:%S").unwrap();
        assert_eq!(d.household.readings.iter().filter(|(t, _)| *t == dup).count(), 2);
        let skipped = NaiveDateTime::parse_from_str("2019-03-10 02:00:00", "%Y-%m-%d %H:%M:%S").unwrap();
        assert!(d.household.readings.iter().all(|(t, _)| *t != skipped));
        assert!(d.stations.iter().all(|s| s.readings.len() == 17_521));
    }

    #[test]
    fn without_ev_no_hour_exceeds_construction_bound() {
        let cfg = SynthConfig {
            ev_sessions_per_week: 0.0,
            ..short(7)
        };
        let d = generate(&cfg).unwrap();
        assert_eq!(d.ev_sessions, 0);
        for (i, (wall, kwh)) in d.household.readings.iter().enumerate() {
            let bound = cfg.deterministic_load(*wall, d.true_temperature[i]) + 4.0 * cfg.noise_std_kw;
            assert!(*kwh <= bound + 1e-4, "{wall}: {kwh} > {bound}");
        }
    }

    #[test]
    fn ev_hours_are_detectable() {
        let cfg = short(11);
        let d = generate(&cfg).unwrap();
        assert!(d.ev_sessions > 10);
        let mean = |on: bool| {
            let v: Vec<f64> = d.household.readings.iter().zip(&d.ev_active).filter(|(_, a)| **a == on).map(|((_, k), _)| *k).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(true) - mean(false) >= cfg.ev_charger_kw / 2.0);
        assert!(d.household.readings.iter().all(|(_, k)| *k >= 0.0));
    }

    #[test]
    fn missing_rate_zero_leaves_no_gaps() {
        let cfg = SynthConfig {
            missing_temp_rate: 0.0,
            ..short(3)
        };
        let d = generate(&cfg).unwrap();
        assert!(d.stations.iter().all(|s| s.missing_count() == 0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = short(1);
        cfg.end = cfg.start;
        assert!(generate(&cfg).is_err());
        let cfg = SynthConfig {
            missing_temp_rate: 1.5,
            ..short(1)
        };
        assert!(generate(&cfg).is_err());
    }
}
