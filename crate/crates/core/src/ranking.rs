//! League tables: eligibility, competition ranking and rank percentiles.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AssessmentConfig, ScopeKind, ScoreRow, UnitId};

/// Scores closer than this (relative) share a rank. Scores reached by
/// different but mathematically equivalent arithmetic must still tie.
pub const TIE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingError {
    #[error("rank {rank} is outside 1..={n}")]
    InvalidRank { rank: u32, n: u32 },
}

/// A scored unit before eligibility and ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitScore {
    pub unit_id: UnitId,
    pub staff_count: usize,
    pub cost_w: f64,
    pub score: f64,
}

/// Keeps the units with at least the scope's minimum head-count.
pub fn filter_eligible(rows: Vec<UnitScore>, scope: ScopeKind, config: &AssessmentConfig) -> Vec<UnitScore> {
    let min = config.min_staff(scope);
    rows.into_iter()
        .filter(|r| r.staff_count >= min && r.cost_w > 0.0)
        .collect()
}

fn ties(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
}

/// Standard competition ("1224") ranking, highest score first.
pub fn competition_rank(scores: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0u32; scores.len()];
    let mut head = f64::NAN;
    let mut head_rank = 0u32;
    for (pos, &idx) in order.iter().enumerate() {
        let s = scores[idx];
        if pos == 0 || !ties(head, s) {
            head = s;
            head_rank = pos as u32 + 1;
        }
        ranks[idx] = head_rank;
    }
    ranks
}

fn check_rank(rank: u32, n: u32) -> Result<(), RankingError> {
    if rank == 0 || rank > n {
        return Err(RankingError::InvalidRank { rank, n });
    }
    Ok(())
}

/// `100 * (n - rank) / (n - 1)`, rounded half away from zero; 100 when `n = 1`.
pub fn rank_percentile(rank: u32, n: u32) -> Result<u8, RankingError> {
    check_rank(rank, n)?;
    if n == 1 {
        return Ok(100);
    }
    let (num, den) = (u64::from(n - rank), u64::from(n - 1));
    Ok(((200 * num + den) / (2 * den)) as u8)
}

/// Unrounded rank percentile.
pub fn rank_percentile_exact(rank: u32, n: u32) -> Result<f64, RankingError> {
    check_rank(rank, n)?;
    if n == 1 {
        return Ok(100.0);
    }
    Ok(100.0 * f64::from(n - rank) / f64::from(n - 1))
}

/// Percentile printed for a table row. A unit with no output at all sits at
/// the bottom (0) whatever its tie rank.
pub fn row_percentile(score: f64, rank: u32, n: u32) -> Result<u8, RankingError> {
    if score == 0.0 {
        check_rank(rank, n)?;
        return Ok(0);
    }
    rank_percentile(rank, n)
}

/// Unrounded counterpart of [`row_percentile`].
pub fn row_percentile_exact(score: f64, rank: u32, n: u32) -> Result<f64, RankingError> {
    if score == 0.0 {
        check_rank(rank, n)?;
        return Ok(0.0);
    }
    rank_percentile_exact(rank, n)
}

/// Eligible units ranked best first; tied units in ascending university id.
pub fn build_league_table(units: Vec<UnitScore>, config: &AssessmentConfig, scope: ScopeKind) -> Vec<ScoreRow> {
    let eligible = filter_eligible(units, scope, config);
    let scores: Vec<f64> = eligible.iter().map(|u| u.score).collect();
    let ranks = competition_rank(&scores);
    let n = eligible.len() as u32;
    let mut rows: Vec<ScoreRow> = eligible
        .into_iter()
        .zip(ranks)
        .map(|(u, rank)| ScoreRow {
            rank_percentile: row_percentile(u.score, rank, n).expect("rank within population"),
            unit_id: u.unit_id,
            staff_count: u.staff_count,
            cost_w: u.cost_w,
            score: u.score,
            rank,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then_with(|| a.unit_id.cmp(&b.unit_id))
            .then_with(|| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal))
    });
    rows
}
