//! Fractional author credit.
//!
//! Alphabetical fields split a publication evenly among its authors. In
//! position-weighted fields the byline ends carry most of the credit:
//!
//! * first and last author at the same university: 40% each, the other 20%
//!   shared evenly by everyone in between;
//! * otherwise: 30% to first and last, 15% to second and penultimate, the
//!   remaining 10% shared by everyone else.
//!
//! Bylines too short to hold every share (fewer than five authors in the
//! second case, fewer than three in the first) collapse the shares that
//! coincide or have no recipient and are rescaled to sum to one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BylineConvention, FieldTaxonomy, PublicationRecord, Roster};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CreditError {
    #[error("a byline needs at least one author")]
    InvalidByline,
}

const SAME_ENDS_EACH: f64 = 0.40;
const SAME_ENDS_REST: f64 = 0.20;
const SPLIT_ENDS_EACH: f64 = 0.30;
const SPLIT_INNER_EACH: f64 = 0.15;
const SPLIT_REST: f64 = 0.10;

/// Credit share per byline position (index = position - 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Weight at a 1-based byline position.
    pub fn at(&self, position: u32) -> f64 {
        self.0[position as usize - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

pub fn fractional_weights(
    n: usize,
    convention: BylineConvention,
    ends_same_university: bool,
) -> Result<WeightVector, CreditError> {
    if n == 0 {
        return Err(CreditError::InvalidByline);
    }
    let weights = match convention {
        BylineConvention::Alphabetical => vec![1.0 / n as f64; n],
        BylineConvention::PositionWeighted => position_weights(n, ends_same_university),
    };
    Ok(WeightVector(weights))
}

fn position_weights(n: usize, ends_same_university: bool) -> Vec<f64> {
    match n {
        1 => return vec![1.0],
        2 => return vec![0.5, 0.5],
        _ => {}
    }
    let mut w = vec![0.0; n];
    if ends_same_university {
        w[0] = SAME_ENDS_EACH;
        w[n - 1] = SAME_ENDS_EACH;
        let inner = SAME_ENDS_REST / (n - 2) as f64;
        w[1..n - 1].fill(inner);
        return w;
    }
    if n >= 5 {
        w[0] = SPLIT_ENDS_EACH;
        w[n - 1] = SPLIT_ENDS_EACH;
        w[1] = SPLIT_INNER_EACH;
        w[n - 2] = SPLIT_INNER_EACH;
        let rest = SPLIT_REST / (n - 4) as f64;
        w[2..n - 2].fill(rest);
        return w;
    }
    // n = 3: second and penultimate are one author holding both 15% shares.
    // n = 4: nobody is left for the 10% share.
    // Either way the raw shares sum to 0.9 and are rescaled.
    w[0] = SPLIT_ENDS_EACH;
    w[n - 1] = SPLIT_ENDS_EACH;
    w[1] += SPLIT_INNER_EACH;
    w[n - 2] += SPLIT_INNER_EACH;
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Weights of a publication's byline under `convention`.
pub fn byline_weights(publication: &PublicationRecord, convention: BylineConvention) -> WeightVector {
    fractional_weights(
        publication.byline().len(),
        convention,
        publication.ends_same_university(),
    )
    .expect("validated publications have a non-empty byline")
}

/// Share of `publication` credited to the researchers of one university in
/// one field. The convention is the one of the target field.
pub fn unit_fraction(
    publication: &PublicationRecord,
    university_id: &str,
    sds_code: &str,
    roster: &Roster,
    taxonomy: &FieldTaxonomy,
) -> f64 {
    let Some(convention) = taxonomy.convention_of(sds_code) else {
        return 0.0;
    };
    let weights = byline_weights(publication, convention);
    publication
        .byline()
        .iter()
        .filter(|slot| {
            roster
                .resolve(slot)
                .is_some_and(|r| r.university_id() == university_id && r.sds_code() == sds_code)
        })
        .map(|slot| weights.at(slot.position))
        .sum()
}

/// Every (university, field) share of one publication in a single pass.
/// Equivalent to calling [`unit_fraction`] for each unit on the byline.
pub fn allocate(
    publication: &PublicationRecord,
    roster: &Roster,
    taxonomy: &FieldTaxonomy,
) -> BTreeMap<(String, String), f64> {
    let mut by_convention: [Option<WeightVector>; 2] = [None, None];
    let mut shares: BTreeMap<(String, String), f64> = BTreeMap::new();
    for slot in publication.byline() {
        let Some(researcher) = roster.resolve(slot) else {
            continue;
        };
        let Some(convention) = taxonomy.convention_of(researcher.sds_code()) else {
            continue;
        };
        let idx = convention as usize;
        let weights = by_convention[idx].get_or_insert_with(|| byline_weights(publication, convention));
        *shares
            .entry((researcher.university_id().to_string(), researcher.sds_code().to_string()))
            .or_insert(0.0) += weights.at(slot.position);
    }
    shares
}
