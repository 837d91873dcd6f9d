//! Raw weather and household series, temperature gap filling and station
//! averaging.

use std::collections::BTreeMap;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dst::DstRule;

/// Hourly temperatures from one station, timestamped in local standard time
/// (no daylight shift), as weather services publish them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub station_id: String,
    pub readings: Vec<(NaiveDateTime, Option<f64>)>,
}

/// Hourly smart-meter consumption, keyed by interval start in local wall
/// time. The fall-back hour appears twice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdSeries {
    pub household_id: String,
    pub readings: Vec<(NaiveDateTime, f64)>,
}

impl HouseholdSeries {
    pub fn validate(&self) -> Result<()> {
        if let Some((ts, v)) = self.readings.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidData(format!("household {}: consumption {v} at {ts} is not a non-negative number", self.household_id)));
        }
        Ok(())
    }
}

impl WeatherSeries {
    pub fn validate(&self) -> Result<()> {
        for pair in self.readings.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidData(format!(
                    "station {}: timestamps not strictly increasing at {}",
                    self.station_id, pair[1].0
                )));
            }
        }
        Ok(())
    }

    pub fn missing_count(&self) -> usize {
        self.readings.iter().filter(|(_, t)| t.is_none()).count()
    }
}

fn hours_between(a: NaiveDateTime, b: NaiveDateTime) -> f64 {
    (b - a).num_seconds().abs() as f64 / 3600.0
}

/// Replaces each missing temperature with the inverse-time-distance weighted
/// mean of the nearest present readings before and after it. Gaps at either
/// end take the single nearest reading.
pub fn fill_missing_temperature(ws: &WeatherSeries) -> Result<WeatherSeries> {
    ws.validate()?;
    let present: Vec<usize> = ws
        .readings
        .iter()
        .enumerate()
        .filter_map(|(i, (_, t))| t.map(|_| i))
        .collect();
    if present.is_empty() && !ws.readings.is_empty() {
        return Err(Error::UnrecoverableGap {
            station: ws.station_id.clone(),
        });
    }
    let mut readings = ws.readings.clone();
    let mut next_present = 0usize;
    for i in 0..readings.len() {
        if readings[i].1.is_some() {
            continue;
        }
        while next_present < present.len() && present[next_present] < i {
            next_present += 1;
        }
        let before = next_present.checked_sub(1).map(|k| present[k]);
        let after = present.get(next_present).copied();
        let t = ws.readings[i].0;
        let value = |j: usize| ws.readings[j].1.expect("index of a present reading");
        let filled = match (before, after) {
            (Some(b), Some(a)) => {
                let wb = 1.0 / hours_between(ws.readings[b].0, t);
                let wa = 1.0 / hours_between(t, ws.readings[a].0);
                (value(b) * wb + value(a) * wa) / (wb + wa)
            }
            (Some(b), None) => value(b),
            (None, Some(a)) => value(a),
            (None, None) => unreachable!("series has at least one present reading"),
        };
        readings[i].1 = Some(filled);
    }
    Ok(WeatherSeries {
        station_id: ws.station_id.clone(),
        readings,
    })
}

/// Per-timestamp arithmetic mean across stations sharing one timestamp grid.
pub fn average_stations(all: &[WeatherSeries]) -> Result<WeatherSeries> {
    let first = all.first().ok_or(Error::EmptyInput)?;
    let mut union: BTreeMap<NaiveDateTime, usize> = BTreeMap::new();
    for s in all {
        for (ts, _) in &s.readings {
            *union.entry(*ts).or_insert(0) += 1;
        }
    }
    let missing: Vec<NaiveDateTime> = union
        .iter()
        .filter(|(_, &n)| n != all.len())
        .map(|(ts, _)| *ts)
        .collect();
    if !missing.is_empty() {
        return Err(Error::GridMismatch { missing });
    }
    let n = all.len() as f64;
    let readings = first
        .readings
        .iter()
        .enumerate()
        .map(|(i, (ts, _))| {
            let mut sum = 0.0;
            for s in all {
                let (sts, v) = s.readings[i];
                debug_assert_eq!(sts, *ts);
                sum += v.ok_or_else(|| {
                    Error::InvalidData(format!("station {} still has a gap at {ts}; fill before averaging", s.station_id))
                })?;
            }
            Ok((*ts, Some(sum / n)))
        })
        .collect::<Result<Vec<_>>>()?;
    let station_id = if all.len() == 1 {
        first.station_id.clone()
    } else {
        "average".to_string()
    };
    Ok(WeatherSeries {
        station_id,
        readings,
    })
}

/// Temperatures re-keyed by local wall time and DST flag.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalWeather {
    pub rows: Vec<(NaiveDateTime, u8, f64)>,
}

/// Shifts a gap-free standard-time series onto the DST-adjusted wall clock.
pub fn adjust_to_local(ws: &WeatherSeries, rule: &DstRule) -> Result<LocalWeather> {
    let rows = ws
        .readings
        .iter()
        .map(|(ts, t)| {
            let temp = t.ok_or_else(|| Error::InvalidData(format!("station {}: gap at {ts}", ws.station_id)))?;
            let (local, flag) = rule.standard_to_local(*ts);
            Ok((local, flag, temp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalWeather { rows })
}
