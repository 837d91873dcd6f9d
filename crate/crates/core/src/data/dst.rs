//! Daylight-saving rules and the DST disambiguation flag.
//!
//! The flag is 1 outside DST and 0 during DST. In the repeated fall-back hour
//! the first occurrence is the DST one.

use std::collections::HashMap;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DST: u8 = 0;
pub const NOT_DST: u8 = 1;

/// "nth Sunday of month" transition rule. Transitions happen at
/// `transition_hour` local wall time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DstRule {
    pub start_month: u32,
    pub start_sunday: u8,
    pub end_month: u32,
    pub end_sunday: u8,
    pub transition_hour: u32,
    /// Offset of local standard time from UTC, in hours.
    pub standard_offset_hours: i64,
}

impl Default for DstRule {
    /// Second Sunday of March to first Sunday of November, 02:00, UTC−5
    /// (Ontario since 2007).
    fn default() -> Self {
        DstRule {
            start_month: 3,
            start_sunday: 2,
            end_month: 11,
            end_sunday: 1,
            transition_hour: 2,
            standard_offset_hours: -5,
        }
    }
}

impl DstRule {
    fn nth_sunday(year: i32, month: u32, n: u8) -> NaiveDate {
        NaiveDate::from_weekday_of_month_opt(year, month, Weekday::Sun, n)
            .expect("configured DST transition must exist")
    }

    fn at_hour(&self, d: NaiveDate) -> NaiveDateTime {
        d.and_time(NaiveTime::from_hms_opt(self.transition_hour, 0, 0).expect("valid transition hour"))
    }

    /// Start of DST in local standard time (clocks jump forward here).
    pub fn start(&self, year: i32) -> NaiveDateTime {
        self.at_hour(Self::nth_sunday(year, self.start_month, self.start_sunday))
    }

    /// End of DST in local standard time (one hour before the wall-clock
    /// transition, which is expressed in daylight time).
    pub fn end_standard(&self, year: i32) -> NaiveDateTime {
        self.at_hour(Self::nth_sunday(year, self.end_month, self.end_sunday)) - Duration::hours(1)
    }

    /// Whether a local-standard-time instant falls inside DST.
    pub fn is_dst_standard(&self, lst: NaiveDateTime) -> bool {
        let y = lst.year();
        lst >= self.start(y) && lst < self.end_standard(y)
    }

    /// Converts local standard time to wall-clock time plus DST flag.
    pub fn standard_to_local(&self, lst: NaiveDateTime) -> (NaiveDateTime, u8) {
        if self.is_dst_standard(lst) {
            (lst + Duration::hours(1), DST)
        } else {
            (lst, NOT_DST)
        }
    }

    pub fn local_to_standard(&self, local: NaiveDateTime, flag: u8) -> NaiveDateTime {
        if flag == DST {
            local - Duration::hours(1)
        } else {
            local
        }
    }

    pub fn to_utc(&self, local: NaiveDateTime, flag: u8) -> NaiveDateTime {
        self.local_to_standard(local, flag) - Duration::hours(self.standard_offset_hours)
    }

    /// Wall-clock hour that occurs twice at fall-back.
    fn is_repeated_hour(&self, local: NaiveDateTime) -> bool {
        let end_wall = self.end_standard(local.year()) + Duration::hours(1);
        local >= end_wall - Duration::hours(1) && local < end_wall
    }

    /// Flag for an unambiguous wall-clock time.
    fn flag_unambiguous(&self, local: NaiveDateTime) -> u8 {
        let y = local.year();
        let start_wall = self.start(y);
        let end_wall = self.end_standard(y) + Duration::hours(1);
        if local >= start_wall && local < end_wall {
            DST
        } else {
            NOT_DST
        }
    }
}

/// Annotates wall-clock timestamps with the DST flag. The repeated fall-back
/// hour gets 0 on its first occurrence and 1 on its second.
pub fn dst_annotate(timestamps: &[NaiveDateTime], rule: &DstRule) -> Result<Vec<u8>> {
    let mut seen: HashMap<NaiveDateTime, u8> = HashMap::with_capacity(timestamps.len());
    timestamps
        .iter()
        .map(|&ts| {
            let count = seen.entry(ts).or_insert(0);
            *count += 1;
            if *count > 2 {
                return Err(Error::TriplicateTimestamp(ts));
            }
            Ok(if rule.is_repeated_hour(ts) {
                if *count == 1 {
                    DST
                } else {
                    NOT_DST
                }
            } else {
                rule.flag_unambiguous(ts)
            })
        })
        .collect()
}
