use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::table::TimeTable;

/// Smallest table that leaves at least one row in every split.
pub const MIN_SPLIT_ROWS: usize = 10;

/// Half-open row ranges of each split within the source table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBounds {
    pub train_end: usize,
    pub val_end: usize,
    pub total: usize,
}

impl SplitBounds {
    /// Validation and test take `floor(frac · rows)` each; the remainder goes
    /// to training.
    pub fn new(rows: usize, val_frac: f64, test_frac: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&val_frac) || !(0.0..1.0).contains(&test_frac) || val_frac + test_frac >= 1.0 {
            return Err(Error::InvalidArgument(format!("split fractions val {val_frac}, test {test_frac} leave no training rows")));
        }
        if rows < MIN_SPLIT_ROWS {
            return Err(Error::TooFewRows {
                rows,
                min: MIN_SPLIT_ROWS,
            });
        }
        // the nudge keeps e.g. 0.1 · 1000 from flooring to 99
        let count = |frac: f64| (rows as f64 * frac + 1e-9).floor() as usize;
        let val = count(val_frac);
        let test = count(test_frac);
        let train = rows - val - test;
        if train == 0 || val == 0 || test == 0 {
            return Err(Error::TooFewRows {
                rows,
                min: MIN_SPLIT_ROWS,
            });
        }
        Ok(SplitBounds {
            train_end: train,
            val_end: train + val,
            total: rows,
        })
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train_end, self.val_end - self.train_end, self.total - self.val_end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: TimeTable,
    pub val: TimeTable,
    pub test: TimeTable,
    pub bounds: SplitBounds,
}

/// Chronological 80/10/10 split.
pub fn split(t: &TimeTable) -> Result<Splits> {
    split_with(t, 0.1, 0.1)
}

pub fn split_with(t: &TimeTable, val_frac: f64, test_frac: f64) -> Result<Splits> {
    let bounds = SplitBounds::new(t.len(), val_frac, test_frac)?;
    Ok(split_at(t, bounds))
}

pub fn split_at(t: &TimeTable, b: SplitBounds) -> Splits {
    let part = |r: std::ops::Range<usize>| TimeTable {
        rows: t.rows[r].to_vec(),
    };
    Splits {
        train: part(0..b.train_end),
        val: part(b.train_end..b.val_end),
        test: part(b.val_end..b.total),
        bounds: b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes() {
        assert_eq!(SplitBounds::new(1000, 0.1, 0.1).unwrap().sizes(), (800, 100, 100));
        assert_eq!(SplitBounds::new(1001, 0.1, 0.1).unwrap().sizes(), (801, 100, 100));
        assert_eq!(SplitBounds::new(10, 0.1, 0.1).unwrap().sizes(), (8, 1, 1));
        assert_eq!(SplitBounds::new(17521, 0.1, 0.1).unwrap().sizes(), (14017, 1752, 1752));
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(SplitBounds::new(9, 0.1, 0.1), Err(Error::TooFewRows { .. })));
        assert!(SplitBounds::new(100, 0.5, 0.5).is_err());
    }
}
