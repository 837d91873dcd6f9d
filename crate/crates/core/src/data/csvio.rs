//! Household and weather CSV files.
//!
//! Household: `interval_start,consumption_kwh`, wall-clock ISO-8601 times.
//! Weather: `station_id,timestamp,temperature_c`, local standard time, an
//! empty temperature means missing.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::series::{HouseholdSeries, WeatherSeries};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    let s = s.trim();
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .ok_or_else(|| Error::InvalidData(format!("unparseable timestamp {s:?}")))
}

#[derive(Serialize, Deserialize)]
struct HouseholdRecord {
    interval_start: String,
    consumption_kwh: f64,
}

#[derive(Serialize, Deserialize)]
struct WeatherRecord {
    station_id: String,
    timestamp: String,
    temperature_c: Option<f64>,
}

pub fn read_household<R: Read>(household_id: &str, reader: R) -> Result<HouseholdSeries> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &["interval_start", "consumption_kwh"])?;
    let readings = rdr
        .deserialize::<HouseholdRecord>()
        .map(|rec| {
            let rec = rec?;
            Ok((parse_timestamp(&rec.interval_start)?, rec.consumption_kwh))
        })
        .collect::<Result<Vec<_>>>()?;
    let series = HouseholdSeries {
        household_id: household_id.to_string(),
        readings,
    };
    series.validate()?;
    Ok(series)
}

pub fn write_household<W: Write>(h: &HouseholdSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (ts, kwh) in &h.readings {
        w.serialize(HouseholdRecord {
            interval_start: format_timestamp(*ts),
            consumption_kwh: *kwh,
        })?;
    }
    w.flush().map_err(|e| Error::io("<household csv>", e))?;
    Ok(())
}

/// Reads every station in the file, in order of first appearance.
pub fn read_weather<R: Read>(reader: R) -> Result<Vec<WeatherSeries>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &["station_id", "timestamp", "temperature_c"])?;
    let mut order: Vec<String> = Vec::new();
    let mut by_station: BTreeMap<String, Vec<(NaiveDateTime, Option<f64>)>> = BTreeMap::new();
    for rec in rdr.deserialize::<WeatherRecord>() {
        let rec = rec?;
        let ts = parse_timestamp(&rec.timestamp)?;
        if !by_station.contains_key(&rec.station_id) {
            order.push(rec.station_id.clone());
        }
        by_station.entry(rec.station_id).or_default().push((ts, rec.temperature_c));
    }
    let stations: Vec<WeatherSeries> = order
        .into_iter()
        .map(|id| {
            let readings = by_station.remove(&id).unwrap_or_default();
            WeatherSeries {
                station_id: id,
                readings,
            }
        })
        .collect();
    stations.iter().try_for_each(WeatherSeries::validate)?;
    Ok(stations)
}

pub fn write_weather<W: Write>(stations: &[WeatherSeries], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in stations {
        for (ts, t) in &s.readings {
            w.serialize(WeatherRecord {
                station_id: s.station_id.clone(),
                timestamp: format_timestamp(*ts),
                temperature_c: *t,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io("<weather csv>", e))?;
    Ok(())
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::InvalidData(format!("expected CSV header {expected:?}, found {got:?}")));
    }
    Ok(())
}

pub fn read_household_file(path: impl AsRef<Path>) -> Result<HouseholdSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("household");
    read_household(id, std::io::BufReader::new(file))
}

pub fn read_weather_file(path: impl AsRef<Path>) -> Result<Vec<WeatherSeries>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_weather(std::io::BufReader::new(file))
}
