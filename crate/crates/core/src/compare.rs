//! Distribution summaries and pairwise ranking comparisons.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ComparisonReport;
use crate::ranking::competition_rank;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("paired vectors need equal lengths of at least 2 (got {left} and {right})")]
    InvalidPairing { left: usize, right: usize },
    #[error("a ranking with no spread cannot be correlated")]
    ZeroVariance,
    #[error("no values")]
    Empty,
    #[error("skewness needs at least 3 values, got {0}")]
    TooFewValues(usize),
    #[error("skewness is undefined for a constant distribution")]
    DegenerateDistribution,
}

fn check_pairing(left: usize, right: usize) -> Result<(), CompareError> {
    if left != right || left < 2 {
        return Err(CompareError::InvalidPairing { left, right });
    }
    Ok(())
}

/// Ascending ranks with ties given the mean of the positions they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let mean = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CompareError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CompareError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho between two rankings of the same units. Inputs are
/// re-ranked (ties averaged) before the Pearson correlation is taken, so any
/// strictly monotone relabeling of either side gives the same value.
/// Identical inputs give exactly 1, even when every unit is tied.
pub fn spearman_rho(ranks_a: &[f64], ranks_b: &[f64]) -> Result<f64, CompareError> {
    check_pairing(ranks_a.len(), ranks_b.len())?;
    if ranks_a == ranks_b {
        return Ok(1.0);
    }
    pearson(&average_ranks(ranks_a), &average_ranks(ranks_b))
}

/// How the mean rank shift is denominated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftAveraging {
    /// Over every assessed unit, non-shifters included.
    #[default]
    AllUnits,
    /// Over the units whose rank changed only.
    ShiftersOnly,
}

pub fn shift_stats(
    ranks_a: &[u32],
    ranks_b: &[u32],
    percentiles_a: &[f64],
    percentiles_b: &[f64],
) -> Result<ComparisonReport, CompareError> {
    shift_stats_with(ranks_a, ranks_b, percentiles_a, percentiles_b, ShiftAveraging::AllUnits)
}

pub fn shift_stats_with(
    ranks_a: &[u32],
    ranks_b: &[u32],
    percentiles_a: &[f64],
    percentiles_b: &[f64],
    averaging: ShiftAveraging,
) -> Result<ComparisonReport, CompareError> {
    check_pairing(ranks_a.len(), ranks_b.len())?;
    check_pairing(ranks_a.len(), percentiles_a.len())?;
    check_pairing(ranks_a.len(), percentiles_b.len())?;
    let n = ranks_a.len();

    let to_f64 = |r: &[u32]| r.iter().map(|&x| f64::from(x)).collect::<Vec<_>>();
    let spearman = spearman_rho(&to_f64(ranks_a), &to_f64(ranks_b))?;

    let rank_shifts: Vec<u32> = ranks_a.iter().zip(ranks_b).map(|(a, b)| a.abs_diff(*b)).collect();
    let pct_shifts: Vec<f64> = percentiles_a.iter().zip(percentiles_b).map(|(a, b)| (a - b).abs()).collect();
    let shifters = rank_shifts.iter().filter(|&&d| d > 0).count();

    let denom = match averaging {
        ShiftAveraging::AllUnits => n,
        ShiftAveraging::ShiftersOnly => shifters,
    };
    let mean_over = |total: f64| if denom == 0 { 0.0 } else { total / denom as f64 };

    Ok(ComparisonReport {
        n_units: n,
        spearman_rho: spearman,
        pct_shifting: 100.0 * shifters as f64 / n as f64,
        avg_shift: mean_over(rank_shifts.iter().map(|&d| f64::from(d)).sum()),
        max_shift: rank_shifts.iter().copied().max().unwrap_or(0),
        avg_percentile_shift: mean_over(pct_shifts.iter().sum()),
        max_percentile_shift: pct_shifts.iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// `None` when fewer than three values or no spread.
    pub skewness: Option<f64>,
}

pub fn mean(values: &[f64]) -> Result<f64, CompareError> {
    if values.is_empty() {
        return Err(CompareError::Empty);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median(values: &[f64]) -> Result<f64, CompareError> {
    if values.is_empty() {
        return Err(CompareError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Ok(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Adjusted Fisher–Pearson skewness `sqrt(n(n-1))/(n-2) * m3 / m2^1.5`.
pub fn skewness(values: &[f64]) -> Result<f64, CompareError> {
    let n = values.len();
    if n < 3 {
        return Err(CompareError::TooFewValues(n));
    }
    let m = mean(values)?;
    let nf = n as f64;
    let m2 = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / nf;
    let m3 = values.iter().map(|x| (x - m).powi(3)).sum::<f64>() / nf;
    // relative test: a constant vector leaves only rounding noise in m2
    if m2 <= f64::EPSILON * f64::EPSILON * m * m || m2 == 0.0 {
        return Err(CompareError::DegenerateDistribution);
    }
    let g1 = m3 / m2.powf(1.5);
    Ok((nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1)
}

pub fn distribution_stats(values: &[f64]) -> Result<DistributionStats, CompareError> {
    Ok(DistributionStats {
        n: values.len(),
        mean: mean(values)?,
        median: median(values)?,
        skewness: skewness(values).ok(),
    })
}

/// Spearman's rho between the ranking by size and the ranking by score.
pub fn size_performance_correlation(staff_counts: &[usize], scores: &[f64]) -> Result<f64, CompareError> {
    check_pairing(staff_counts.len(), scores.len())?;
    let sizes: Vec<f64> = staff_counts.iter().map(|&s| s as f64).collect();
    let by_size: Vec<f64> = competition_rank(&sizes).into_iter().map(f64::from).collect();
    let by_score: Vec<f64> = competition_rank(scores).into_iter().map(f64::from).collect();
    spearman_rho(&by_size, &by_score)
}
