//! The efficiency indicator at field, discipline and institution level.
//!
//! Field level: `score = multiplier / w * Σ f_i` over the highly-cited
//! publications, with `f_i` the unit's credit share and `w` its labor cost.
//!
//! Discipline and institution level: each field score is divided by the
//! cost-weighted national average of that field (taken over universities
//! with a positive score) and the ratios are averaged with weights
//! `w_k / w_U`. A field where no university scored has no national average;
//! its cost stays in `w_U` but it adds nothing to the sum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::credit::unit_fraction;
use crate::hca::HcaSet;
use crate::model::{FieldTaxonomy, PublicationRecord, Roster};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("labor cost must be positive, got {0}")]
    ZeroCost(f64),
    #[error("no university produced a highly-cited article in this field")]
    NoHcaInSds,
}

/// Field score from the summed credit shares of a unit's highly-cited output.
pub fn sds_score_from_credit(hca_credit: f64, cost_w: f64, multiplier: f64) -> Result<f64, ScoringError> {
    if cost_w.is_nan() || cost_w <= 0.0 {
        return Err(ScoringError::ZeroCost(cost_w));
    }
    Ok(multiplier / cost_w * hca_credit)
}

/// Field score of one university, summing its credit over every HCA in `pubs`.
#[allow(clippy::too_many_arguments)]
pub fn score_sds(
    university_id: &str,
    sds_code: &str,
    hcas: &HcaSet,
    pubs: &[PublicationRecord],
    roster: &Roster,
    taxonomy: &FieldTaxonomy,
    cost_w: f64,
    multiplier: f64,
) -> Result<f64, ScoringError> {
    let credit: f64 = pubs
        .iter()
        .filter(|p| hcas.is_hca(p.pub_id()))
        .map(|p| unit_fraction(p, university_id, sds_code, roster, taxonomy))
        .sum();
    sds_score_from_credit(credit, cost_w, multiplier)
}

/// Cost-weighted mean score of the universities with a positive score in
/// one field. Input pairs are `(cost_w, score)`.
pub fn national_sds_average(rows: &[(f64, f64)]) -> Result<f64, ScoringError> {
    let (num, den) = rows
        .iter()
        .filter(|(_, score)| *score > 0.0)
        .fold((0.0, 0.0), |(n, d), (w, s)| (n + w * s, d + w));
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(ScoringError::NoHcaInSds)
    }
}

/// One field of a university, as input to the aggregate score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdsContribution {
    pub score: f64,
    pub cost_w: f64,
    /// `None` when no university nationally scored in the field.
    pub national_avg: Option<f64>,
}

/// Aggregate score over a set of fields of one university: a discipline
/// when the fields are those of one discipline, the institution when they
/// are all of them.
pub fn score_aggregate(fields: &[SdsContribution]) -> Result<f64, ScoringError> {
    let total_cost: f64 = fields.iter().map(|f| f.cost_w).sum();
    if total_cost.is_nan() || total_cost <= 0.0 {
        return Err(ScoringError::ZeroCost(total_cost));
    }
    Ok(fields
        .iter()
        .filter_map(|f| f.national_avg.map(|avg| f.score / avg * (f.cost_w / total_cost)))
        .sum())
}

/// Discipline-level score.
pub fn score_uda(fields: &[SdsContribution]) -> Result<f64, ScoringError> {
    score_aggregate(fields)
}

/// Institution-level score: the same sum extended to every assessed field.
pub fn score_overall(fields: &[SdsContribution]) -> Result<f64, ScoringError> {
    score_aggregate(fields)
}
