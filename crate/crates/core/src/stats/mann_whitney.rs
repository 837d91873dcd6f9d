//! Two-sided Mann-Whitney U test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Exact p-values are used when `n1 + n2` is at most this and there are no ties.
pub const EXACT_MAX_TOTAL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MannWhitneyResult {
    /// U for the first sample: the number of (a, b) pairs with a > b, ties
    /// counting one half.
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub n1: usize,
    pub n2: usize,
    pub alpha: f64,
    pub reject: bool,
}

/// Ranks starting at 1, ties sharing the mean of their positions. Returns the
/// ranks in input order and the tie-group sizes.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidData("NaN in Mann-Whitney sample".into()));
    }
    Ok(())
}

/// U statistic of `a` and the tie-group sizes of the pooled sample.
pub fn u_statistic(a: &[f64], b: &[f64]) -> (f64, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let n1 = a.len() as f64;
    let r1: f64 = ranks[..a.len()].iter().sum();
    (r1 - n1 * (n1 + 1.0) / 2.0, ties)
}

/// Number of rank arrangements giving each U value, for U = 0..=n1·n2.
fn u_counts(n1: usize, n2: usize) -> Vec<f64> {
    // table[m][n] is the distribution for sizes (m, n); U(m, n) takes U - n
    // when the largest value is in the first sample, U otherwise
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for m in 0..=n1 {
        for n in 0..=n2 {
            table[m][n] = if m == 0 || n == 0 {
                vec![1.0]
            } else {
                let mut d = vec![0.0; m * n + 1];
                for (u, c) in table[m - 1][n].iter().enumerate() {
                    d[u + n] += c;
                }
                for (u, c) in table[m][n - 1].iter().enumerate() {
                    d[u] += c;
                }
                d
            };
        }
    }
    std::mem::take(&mut table[n1][n2])
}

fn finish(u: f64, p: f64, method: Method, a: &[f64], b: &[f64], alpha: f64) -> MannWhitneyResult {
    let p_value = p.clamp(0.0, 1.0);
    MannWhitneyResult {
        u_statistic: u,
        p_value,
        method,
        n1: a.len(),
        n2: b.len(),
        alpha,
        reject: p_value < alpha,
    }
}

/// Exact two-sided p-value: twice the smaller tail of the null distribution.
/// Requires tie-free samples.
pub fn mann_whitney_exact(a: &[f64], b: &[f64], alpha: f64) -> Result<MannWhitneyResult> {
    check(a, b)?;
    let (u, ties) = u_statistic(a, b);
    if !ties.is_empty() {
        return Err(Error::InvalidArgument("exact Mann-Whitney needs tie-free samples".into()));
    }
    let counts = u_counts(a.len(), b.len());
    let total: f64 = counts.iter().sum();
    let u_idx = u as usize;
    let lower: f64 = counts[..=u_idx].iter().sum::<f64>() / total;
    let upper: f64 = counts[u_idx..].iter().sum::<f64>() / total;
    Ok(finish(u, 2.0 * lower.min(upper), Method::Exact, a, b, alpha))
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn mann_whitney_approx(a: &[f64], b: &[f64], alpha: f64) -> Result<MannWhitneyResult> {
    check(a, b)?;
    let (u, ties) = u_statistic(a, b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
        2.0 * std_normal.sf(z)
    };
    Ok(finish(u, p, Method::NormalApproximation, a, b, alpha))
}

/// Two-sided test at significance `alpha`: exact for small tie-free samples,
/// normal approximation otherwise.
pub fn mann_whitney(a: &[f64], b: &[f64], alpha: f64) -> Result<MannWhitneyResult> {
    check(a, b)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1)")));
    }
    let (_, ties) = u_statistic(a, b);
    if a.len() + b.len() <= EXACT_MAX_TOTAL && ties.is_empty() {
        mann_whitney_exact(a, b, alpha)
    } else {
        mann_whitney_approx(a, b, alpha)
    }
}
