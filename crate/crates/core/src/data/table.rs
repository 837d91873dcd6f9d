//! Merged weather/consumption table with calendar features.

use std::collections::HashMap;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dst::{dst_annotate, DstRule};
use super::series::{HouseholdSeries, LocalWeather};

/// Model input columns, in matrix order. Consumption comes first and is also
/// the target.
pub const FEATURE_NAMES: [&str; 11] = [
    "consumption",
    "temperature",
    "day_of_week",
    "quarter",
    "month",
    "day_of_year",
    "day_of_month",
    "week_of_year",
    "hour_of_day",
    "year",
    "dst",
];

pub const CONSUMPTION: usize = 0;
pub const DST_COLUMN: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub timestamp: NaiveDateTime,
    /// 1 outside DST, 0 during DST.
    pub dst_flag: u8,
    pub temperature: f64,
    pub consumption: f64,
    /// 0 = Monday … 6 = Sunday.
    pub day_of_week: u32,
    pub quarter: u32,
    pub month: u32,
    pub day_of_year: u32,
    pub day_of_month: u32,
    /// Weeks start on Monday; days before the first Monday are week 0.
    pub week_of_year: u32,
    pub hour_of_day: u32,
    pub year: i32,
}

impl TimeRow {
    pub fn new(timestamp: NaiveDateTime, dst_flag: u8, temperature: f64, consumption: f64) -> Self {
        let d = timestamp.date();
        let dow = d.weekday().num_days_from_monday();
        let yday0 = d.ordinal0();
        TimeRow {
            timestamp,
            dst_flag,
            temperature,
            consumption,
            day_of_week: dow,
            quarter: (d.month() - 1) / 3 + 1,
            month: d.month(),
            day_of_year: d.ordinal(),
            day_of_month: d.day(),
            week_of_year: (yday0 + 7 - dow) / 7,
            hour_of_day: timestamp.hour(),
            year: d.year(),
        }
    }

    pub fn features(&self) -> [f64; 11] {
        [
            self.consumption,
            self.temperature,
            f64::from(self.day_of_week),
            f64::from(self.quarter),
            f64::from(self.month),
            f64::from(self.day_of_year),
            f64::from(self.day_of_month),
            f64::from(self.week_of_year),
            f64::from(self.hour_of_day),
            f64::from(self.year),
            f64::from(self.dst_flag),
        ]
    }

    /// Checks every calendar feature against its documented range.
    pub fn validate(&self) -> Result<()> {
        let ok = self.day_of_week <= 6
            && (1..=4).contains(&self.quarter)
            && (1..=12).contains(&self.month)
            && (1..=366).contains(&self.day_of_year)
            && (1..=31).contains(&self.day_of_month)
            && self.week_of_year <= 53
            && self.hour_of_day <= 23
            && self.dst_flag <= 1
            && self.temperature.is_finite()
            && self.consumption.is_finite()
            && self.consumption >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("row at {} has out-of-range features: {self:?}", self.timestamp)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeTable {
    pub rows: Vec<TimeRow>,
}

impl TimeTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn consumption(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.consumption).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.rows.iter().try_for_each(TimeRow::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStats {
    pub household_rows: usize,
    pub weather_rows: usize,
    pub merged_rows: usize,
    pub unmatched_household_rows: usize,
    /// merged_rows / household_rows
    pub coverage: f64,
}

/// Rows below this fraction of household rows trigger a coverage warning.
pub const MIN_COVERAGE: f64 = 0.9;

/// Inner join of household and weather rows on (wall-clock time, DST flag),
/// followed by calendar feature extraction.
pub fn merge(h: &HouseholdSeries, w: &LocalWeather, rule: &DstRule) -> Result<(TimeTable, MergeStats)> {
    h.validate()?;
    let times: Vec<NaiveDateTime> = h.readings.iter().map(|(t, _)| *t).collect();
    let flags = dst_annotate(&times, rule)?;

    let mut weather: HashMap<(NaiveDateTime, u8), f64> = HashMap::with_capacity(w.rows.len());
    for &(ts, flag, temp) in &w.rows {
        if weather.insert((ts, flag), temp).is_some() {
            return Err(Error::DuplicateJoinKey(ts, flag));
        }
    }
    let mut seen = std::collections::HashSet::with_capacity(h.readings.len());
    let mut rows = Vec::with_capacity(h.readings.len());
    for ((ts, kwh), flag) in h.readings.iter().zip(flags) {
        if !seen.insert((*ts, flag)) {
            return Err(Error::DuplicateJoinKey(*ts, flag));
        }
        if let Some(&temp) = weather.get(&(*ts, flag)) {
            rows.push(TimeRow::new(*ts, flag, temp, *kwh));
        }
    }
    let stats = MergeStats {
        household_rows: h.readings.len(),
        weather_rows: w.rows.len(),
        merged_rows: rows.len(),
        unmatched_household_rows: h.readings.len() - rows.len(),
        coverage: if h.readings.is_empty() {
            0.0
        } else {
            rows.len() as f64 / h.readings.len() as f64
        },
    };
    if stats.coverage < MIN_COVERAGE {
        log::warn!(
            "merge kept {} of {} household rows ({:.1}%)",
            stats.merged_rows,
            stats.household_rows,
            100.0 * stats.coverage
        );
    }
    let table = TimeTable { rows };
    table.validate()?;
    Ok((table, stats))
}

/// Keeps rows strictly before midnight of `cutoff`.
pub fn lockdown_filter(t: &TimeTable, cutoff: NaiveDate) -> TimeTable {
    let limit = cutoff.and_hms_opt(0, 0, 0).expect("midnight exists");
    TimeTable {
        rows: t.rows.iter().filter(|r| r.timestamp < limit).cloned().collect(),
    }
}
