//! Preparation pipeline and the prepared-dataset file.

use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::csvio::{format_timestamp, parse_timestamp};
use super::dst::DstRule;
use super::normalize::{normalize, NormStats, NormalizedSplit};
use super::series::{adjust_to_local, average_stations, fill_missing_temperature, HouseholdSeries, WeatherSeries};
use super::split::{split_at, SplitBounds, Splits};
use super::table::{lockdown_filter, merge, MergeStats, TimeRow, TimeTable};

pub const PREPARED_FORMAT: &str = "loadband-prepared";
pub const PREPARED_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareConfig {
    pub dst_rule: DstRule,
    pub lockdown_cutoff: Option<NaiveDate>,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            dst_rule: DstRule::default(),
            lockdown_cutoff: None,
            val_frac: 0.1,
            test_frac: 0.1,
        }
    }
}

/// Merged rows stored column by column. Calendar features are recomputed
/// from the timestamps on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Columns {
    pub timestamp: Vec<String>,
    pub dst_flag: Vec<u8>,
    pub temperature_c: Vec<f64>,
    pub consumption_kwh: Vec<f64>,
}

impl Columns {
    fn from_table(t: &TimeTable) -> Self {
        Columns {
            timestamp: t.rows.iter().map(|r| format_timestamp(r.timestamp)).collect(),
            dst_flag: t.rows.iter().map(|r| r.dst_flag).collect(),
            temperature_c: t.rows.iter().map(|r| r.temperature).collect(),
            consumption_kwh: t.rows.iter().map(|r| r.consumption).collect(),
        }
    }

    fn to_table(&self) -> Result<TimeTable> {
        let n = self.timestamp.len();
        if self.dst_flag.len() != n || self.temperature_c.len() != n || self.consumption_kwh.len() != n {
            return Err(Error::Corrupt {
                kind: "prepared dataset",
                detail: "column lengths differ".into(),
            });
        }
        let rows = (0..n)
            .map(|i| {
                let ts: NaiveDateTime = parse_timestamp(&self.timestamp[i])?;
                Ok(TimeRow::new(ts, self.dst_flag[i], self.temperature_c[i], self.consumption_kwh[i]))
            })
            .collect::<Result<Vec<_>>>()?;
        let t = TimeTable { rows };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub format: String,
    pub schema_version: u32,
    pub household_id: String,
    pub config: PrepareConfig,
    pub merge: MergeStats,
    /// Rows removed by the lockdown cutoff.
    pub rows_after_cutoff: usize,
    pub bounds: SplitBounds,
    pub norm_stats: NormStats,
    pub columns: Columns,
}

/// The three normalized splits.
#[derive(Debug, Clone)]
pub struct NormalizedSplits {
    pub train: NormalizedSplit,
    pub val: NormalizedSplit,
    pub test: NormalizedSplit,
}

/// fill → average → DST adjust → merge → cutoff → split → fit statistics.
/// Errors carry the name of the failing stage.
pub fn prepare(household: &HouseholdSeries, stations: &[WeatherSeries], cfg: &PrepareConfig) -> Result<PreparedDataset> {
    if stations.is_empty() {
        return Err(Error::InvalidArgument("no weather stations".into()).in_stage("fill"));
    }
    let filled = stations
        .iter()
        .map(fill_missing_temperature)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("fill"))?;
    let avg = average_stations(&filled).map_err(|e| e.in_stage("average"))?;
    let local = adjust_to_local(&avg, &cfg.dst_rule).map_err(|e| e.in_stage("annotate"))?;
    let (table, merge_stats) = merge(household, &local, &cfg.dst_rule).map_err(|e| e.in_stage("merge"))?;
    let merged_rows = table.len();
    let table = match cfg.lockdown_cutoff {
        Some(d) => lockdown_filter(&table, d),
        None => table,
    };
    let bounds = SplitBounds::new(table.len(), cfg.val_frac, cfg.test_frac).map_err(|e| e.in_stage("split"))?;
    let splits = split_at(&table, bounds);
    let norm_stats = NormStats::fit(&splits.train).map_err(|e| e.in_stage("normalize"))?;
    Ok(PreparedDataset {
        format: PREPARED_FORMAT.into(),
        schema_version: PREPARED_VERSION,
        household_id: household.household_id.clone(),
        config: cfg.clone(),
        merge: merge_stats,
        rows_after_cutoff: merged_rows - table.len(),
        bounds,
        norm_stats,
        columns: Columns::from_table(&table),
    })
}

impl PreparedDataset {
    pub fn table(&self) -> Result<TimeTable> {
        self.columns.to_table()
    }

    pub fn rows(&self) -> usize {
        self.columns.timestamp.len()
    }

    pub fn splits(&self) -> Result<Splits> {
        Ok(split_at(&self.table()?, self.bounds))
    }

    /// Every split scaled with the stored training statistics.
    pub fn normalized(&self) -> Result<NormalizedSplits> {
        let s = self.splits()?;
        let go = |t: &TimeTable| normalize(t, Some(&self.norm_stats)).map(|(n, _)| n);
        Ok(NormalizedSplits {
            train: go(&s.train)?,
            val: go(&s.val)?,
            test: go(&s.test)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let corrupt = |detail: String| Error::Corrupt {
            kind: "prepared dataset",
            detail,
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        if value.get("format").and_then(|v| v.as_str()) != Some(PREPARED_FORMAT) {
            return Err(corrupt("missing format tag".into()));
        }
        let version = value.get("schema_version").and_then(|v| v.as_u64()).ok_or_else(|| corrupt("missing schema_version".into()))?;
        if version != u64::from(PREPARED_VERSION) {
            return Err(Error::Version {
                kind: "prepared dataset",
                found: version as u32,
                expected: PREPARED_VERSION,
            });
        }
        let ds: PreparedDataset = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        if ds.bounds.total != ds.rows() {
            return Err(corrupt(format!("split bounds cover {} rows, file has {}", ds.bounds.total, ds.rows())));
        }
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn inputs(hours: usize) -> (HouseholdSeries, Vec<WeatherSeries>) {
        let t0 = NaiveDateTime::parse_from_str("2020-01-06 00:00", "%Y-%m-%d %H:%M").unwrap();
        let h = HouseholdSeries {
            household_id: "h".into(),
            readings: (0..hours).map(|i| (t0 + Duration::hours(i as i64), 1.0 + (i % 7) as f64)).collect(),
        };
        let w = ["a", "b"]
            .iter()
            .map(|id| WeatherSeries {
                station_id: id.to_string(),
                readings: (0..hours)
                    .map(|i| (t0 + Duration::hours(i as i64), if i % 5 == 2 { None } else { Some((i % 11) as f64) }))
                    .collect(),
            })
            .collect();
        (h, w)
    }

    #[test]
    fn round_trip_preserves_everything() {
        let (h, w) = inputs(200);
        let p = prepare(&h, &w, &PrepareConfig::default()).unwrap();
        assert_eq!(p.bounds.sizes(), (160, 20, 20));
        let back = PreparedDataset::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.table().unwrap(), p.table().unwrap());
    }

    #[test]
    fn stage_names_errors_and_versions() {
        let (h, _) = inputs(50);
        let err = prepare(&h, &[], &PrepareConfig::default()).unwrap_err();
        assert!(err.to_string().starts_with("fill"));

        let (h, w) = inputs(200);
        let p = prepare(&h, &w, &PrepareConfig::default()).unwrap();
        let bumped = p.to_json().unwrap().replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(matches!(PreparedDataset::from_json(&bumped), Err(Error::Version { found: 9, .. })));
        let text = p.to_json().unwrap();
        assert!(matches!(PreparedDataset::from_json(&text[..text.len() / 2]), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn cutoff_shrinks_rows() {
        let (h, w) = inputs(24 * 10);
        let all = prepare(&h, &w, &PrepareConfig::default()).unwrap();
        let cfg = PrepareConfig {
            lockdown_cutoff: NaiveDate::from_ymd_opt(2020, 1, 14),
            ..PrepareConfig::default()
        };
        let cut = prepare(&h, &w, &cfg).unwrap();
        assert!(cut.rows() < all.rows());
        assert_eq!(cut.rows(), 24 * 8);
    }
}
