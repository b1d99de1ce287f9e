//! Highly-cited article detection.
//!
//! An article's standing in a (year, subject category) cohort is the share of
//! the cohort with strictly fewer citations, in percent. Articles in journals
//! with several categories take the plain mean over their categories, and an
//! article is highly cited when that mean reaches `100 * (1 - top_fraction)`.
//! The cohort is always the full ingested corpus.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AssessmentConfig, PublicationRecord};

/// Slack on the percentile cut so that e.g. `100 * 9 / 10` against
/// `100 * (1 - 0.1)` is not decided by the last bit.
pub const PERCENTILE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HcaError {
    #[error("publication {0} is not a member of the cohort")]
    Membership(String),
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("publication {pub_id}: no cohort for category {category}")]
    MissingCohort { pub_id: String, category: String },
}

/// Percentile of `publication` within `cohort`: the percentage of cohort
/// members with strictly fewer citations.
pub fn citation_percentile<R: Borrow<PublicationRecord>>(
    publication: &PublicationRecord,
    cohort: &[R],
) -> Result<f64, HcaError> {
    if cohort.is_empty() {
        return Err(HcaError::EmptyCohort);
    }
    if !cohort.iter().any(|q| q.borrow().pub_id() == publication.pub_id()) {
        return Err(HcaError::Membership(publication.pub_id().to_string()));
    }
    let below = cohort
        .iter()
        .filter(|q| Borrow::<PublicationRecord>::borrow(*q).citations() < publication.citations())
        .count();
    Ok(100.0 * below as f64 / cohort.len() as f64)
}

/// Mean percentile over the publication's own subject categories. `cohorts`
/// maps a category code to that category's cohort for the publication's year.
pub fn averaged_percentile<R: Borrow<PublicationRecord>>(
    publication: &PublicationRecord,
    cohorts: &BTreeMap<String, Vec<R>>,
) -> Result<f64, HcaError> {
    let cats = publication.subject_categories();
    let mut total = 0.0;
    for cat in cats {
        let cohort = cohorts.get(cat).ok_or_else(|| HcaError::MissingCohort {
            pub_id: publication.pub_id().to_string(),
            category: cat.clone(),
        })?;
        total += citation_percentile(publication, cohort)?;
    }
    Ok(total / cats.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcaEntry {
    pub year: i32,
    pub percentile: f64,
    pub is_hca: bool,
}

/// Averaged percentile and HCA flag of every publication in the corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HcaSet {
    pub threshold: f64,
    entries: BTreeMap<String, HcaEntry>,
}

impl HcaSet {
    pub fn get(&self, pub_id: &str) -> Option<&HcaEntry> {
        self.entries.get(pub_id)
    }

    pub fn is_hca(&self, pub_id: &str) -> bool {
        self.entries.get(pub_id).is_some_and(|e| e.is_hca)
    }

    pub fn percentile(&self, pub_id: &str) -> Option<f64> {
        self.entries.get(pub_id).map(|e| e.percentile)
    }

    /// Entries in publication-id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &HcaEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hca_count(&self) -> usize {
        self.entries.values().filter(|e| e.is_hca).count()
    }
}

pub fn is_hca_percentile(percentile: f64, threshold: f64) -> bool {
    percentile + PERCENTILE_EPS >= threshold
}

/// Sorted citation counts of one (year, category) cohort.
struct Cohort(Vec<u64>);

impl Cohort {
    fn percentile_of(&self, citations: u64) -> f64 {
        let below = self.0.partition_point(|&c| c < citations);
        100.0 * below as f64 / self.0.len() as f64
    }
}

fn build_cohorts(pubs: &[PublicationRecord]) -> HashMap<(i32, &str), Cohort> {
    let mut raw: HashMap<(i32, &str), Vec<u64>> = HashMap::new();
    for p in pubs {
        for cat in p.subject_categories() {
            raw.entry((p.year(), cat.as_str())).or_default().push(p.citations());
        }
    }
    raw.into_iter()
        .map(|(k, mut counts)| {
            counts.sort_unstable();
            (k, Cohort(counts))
        })
        .collect()
}

/// Size of every (year, category) cohort in the corpus.
pub fn cohort_sizes(pubs: &[PublicationRecord]) -> BTreeMap<(i32, String), usize> {
    let mut sizes = BTreeMap::new();
    for p in pubs {
        for cat in p.subject_categories() {
            *sizes.entry((p.year(), cat.clone())).or_insert(0) += 1;
        }
    }
    sizes
}

/// Flags the highly-cited articles of a corpus. The result does not depend
/// on the order of `pubs`.
pub fn detect_hcas(pubs: &[PublicationRecord], config: &AssessmentConfig) -> HcaSet {
    let cohorts = build_cohorts(pubs);
    let threshold = config.hca_threshold();
    let entries: Vec<(String, HcaEntry)> = pubs
        .par_iter()
        .map(|p| {
            let cats = p.subject_categories();
            let sum: f64 = cats
                .iter()
                .map(|cat| cohorts[&(p.year(), cat.as_str())].percentile_of(p.citations()))
                .sum();
            let percentile = sum / cats.len() as f64;
            let entry = HcaEntry {
                year: p.year(),
                percentile,
                is_hca: is_hca_percentile(percentile, threshold),
            };
            (p.pub_id().to_string(), entry)
        })
        .collect();
    HcaSet {
        threshold,
        entries: entries.into_iter().collect(),
    }
}
