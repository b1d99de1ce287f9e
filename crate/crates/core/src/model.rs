//! Domain types shared by every stage of the assessment.
//!
//! All types validate their invariants on construction (including when
//! deserialized) and are immutable afterwards, so they can be shared freely
//! between worker threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// How a field orders its bylines, which decides how credit is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BylineConvention {
    /// Authors listed alphabetically; everyone gets `1/n`.
    Alphabetical,
    /// Position signals contribution (life sciences): ends weigh most.
    PositionWeighted,
}

impl std::str::FromStr for BylineConvention {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "alphabetical" => Ok(Self::Alphabetical),
            "position_weighted" | "positionweighted" => Ok(Self::PositionWeighted),
            other => Err(ValidationError::UnknownConvention(other.to_string())),
        }
    }
}

/// One author position in a byline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorSlot {
    /// 1-based byline position.
    pub position: u32,
    /// Institution of the author; `None` for external or unmatched authors.
    pub university_id: Option<String>,
    /// Roster key when the author is an assessed researcher.
    pub researcher_id: Option<String>,
}

impl AuthorSlot {
    pub fn new(
        position: u32,
        university_id: Option<String>,
        researcher_id: Option<String>,
    ) -> Result<Self, ValidationError> {
        if researcher_id.is_some() && university_id.is_none() {
            return Err(ValidationError::ResearcherWithoutUniversity {
                position,
                researcher_id: researcher_id.unwrap_or_default(),
            });
        }
        Ok(Self {
            position,
            university_id,
            researcher_id,
        })
    }

    /// An author outside every assessed institution.
    pub fn external(position: u32) -> Self {
        Self {
            position,
            university_id: None,
            researcher_id: None,
        }
    }
}

#[derive(Deserialize)]
struct RawPublication {
    pub_id: String,
    year: i32,
    doc_type: String,
    citations: u64,
    subject_categories: Vec<String>,
    byline: Vec<AuthorSlot>,
}

impl TryFrom<RawPublication> for PublicationRecord {
    type Error = ValidationError;

    fn try_from(raw: RawPublication) -> Result<Self, Self::Error> {
        PublicationRecord::new(
            raw.pub_id,
            raw.year,
            raw.doc_type,
            raw.citations,
            raw.subject_categories,
            raw.byline,
        )
    }
}

/// One indexed article together with its citation count and byline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPublication")]
pub struct PublicationRecord {
    pub_id: String,
    year: i32,
    doc_type: String,
    citations: u64,
    subject_categories: Vec<String>,
    byline: Vec<AuthorSlot>,
}

impl PublicationRecord {
    /// Builds a record, sorting the byline by position and checking that
    /// positions run `1..=n` and categories are non-empty and distinct.
    pub fn new(
        pub_id: impl Into<String>,
        year: i32,
        doc_type: impl Into<String>,
        citations: u64,
        subject_categories: Vec<String>,
        mut byline: Vec<AuthorSlot>,
    ) -> Result<Self, ValidationError> {
        let pub_id = pub_id.into();
        if subject_categories.is_empty() {
            return Err(ValidationError::NoSubjectCategories { pub_id });
        }
        let mut seen = BTreeSet::new();
        for cat in &subject_categories {
            if !seen.insert(cat.as_str()) {
                return Err(ValidationError::DuplicateSubjectCategory {
                    pub_id,
                    category: cat.clone(),
                });
            }
        }
        if byline.is_empty() {
            return Err(ValidationError::EmptyByline { pub_id });
        }
        byline.sort_by_key(|slot| slot.position);
        for (idx, slot) in byline.iter().enumerate() {
            let expected = idx as u32 + 1;
            if slot.position != expected {
                return Err(ValidationError::BylinePositions {
                    pub_id,
                    expected,
                    found: slot.position,
                });
            }
            if slot.researcher_id.is_some() && slot.university_id.is_none() {
                return Err(ValidationError::ResearcherWithoutUniversity {
                    position: slot.position,
                    researcher_id: slot.researcher_id.clone().unwrap_or_default(),
                });
            }
        }
        Ok(Self {
            pub_id,
            year,
            doc_type: doc_type.into(),
            citations,
            subject_categories,
            byline,
        })
    }

    pub fn pub_id(&self) -> &str {
        &self.pub_id
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn doc_type(&self) -> &str {
        &self.doc_type
    }

    pub fn citations(&self) -> u64 {
        self.citations
    }

    pub fn subject_categories(&self) -> &[String] {
        &self.subject_categories
    }

    /// Byline ordered by position.
    pub fn byline(&self) -> &[AuthorSlot] {
        &self.byline
    }

    /// True when the first and last authors share a known institution.
    pub fn ends_same_university(&self) -> bool {
        let first = self.byline.first().and_then(|s| s.university_id.as_ref());
        let last = self.byline.last().and_then(|s| s.university_id.as_ref());
        matches!((first, last), (Some(a), Some(b)) if a == b)
    }
}

#[derive(Deserialize)]
struct RawResearcher {
    researcher_id: String,
    university_id: String,
    sds_code: String,
    employment: BTreeMap<i32, String>,
}

impl TryFrom<RawResearcher> for Researcher {
    type Error = ValidationError;

    fn try_from(raw: RawResearcher) -> Result<Self, Self::Error> {
        Researcher::new(raw.researcher_id, raw.university_id, raw.sds_code, raw.employment)
    }
}

/// A staff member: one university, one field, an academic rank per year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawResearcher")]
pub struct Researcher {
    researcher_id: String,
    university_id: String,
    sds_code: String,
    employment: BTreeMap<i32, String>,
}

impl Researcher {
    pub fn new(
        researcher_id: impl Into<String>,
        university_id: impl Into<String>,
        sds_code: impl Into<String>,
        employment: BTreeMap<i32, String>,
    ) -> Result<Self, ValidationError> {
        let researcher_id = researcher_id.into();
        if employment.is_empty() {
            return Err(ValidationError::EmptyEmployment { researcher_id });
        }
        Ok(Self {
            researcher_id,
            university_id: university_id.into(),
            sds_code: sds_code.into(),
            employment,
        })
    }

    pub fn researcher_id(&self) -> &str {
        &self.researcher_id
    }

    pub fn university_id(&self) -> &str {
        &self.university_id
    }

    pub fn sds_code(&self) -> &str {
        &self.sds_code
    }

    /// Year → academic rank.
    pub fn employment(&self) -> &BTreeMap<i32, String> {
        &self.employment
    }

    /// Employment years (and ranks) falling inside `window`.
    pub fn years_in(&self, window: YearWindow) -> impl Iterator<Item = (i32, &str)> + '_ {
        self.employment
            .range(window.start..=window.end)
            .map(|(y, r)| (*y, r.as_str()))
    }

    pub fn is_active_in(&self, window: YearWindow) -> bool {
        self.years_in(window).next().is_some()
    }
}

/// All researchers, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Researcher>", into = "Vec<Researcher>")]
pub struct Roster {
    by_id: BTreeMap<String, Researcher>,
}

impl TryFrom<Vec<Researcher>> for Roster {
    type Error = ValidationError;

    fn try_from(researchers: Vec<Researcher>) -> Result<Self, Self::Error> {
        Roster::new(researchers)
    }
}

impl From<Roster> for Vec<Researcher> {
    fn from(roster: Roster) -> Self {
        roster.by_id.into_values().collect()
    }
}

impl Roster {
    pub fn new(researchers: impl IntoIterator<Item = Researcher>) -> Result<Self, ValidationError> {
        let mut by_id = BTreeMap::new();
        for r in researchers {
            if by_id.contains_key(r.researcher_id()) {
                return Err(ValidationError::DuplicateResearcher(r.researcher_id));
            }
            by_id.insert(r.researcher_id.clone(), r);
        }
        Ok(Self { by_id })
    }

    pub fn get(&self, researcher_id: &str) -> Option<&Researcher> {
        self.by_id.get(researcher_id)
    }

    /// Researchers in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Researcher> {
        self.by_id.values()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Researcher behind an author slot, if the slot resolves to the roster.
    pub fn resolve(&self, slot: &AuthorSlot) -> Option<&Researcher> {
        slot.researcher_id.as_deref().and_then(|id| self.get(id))
    }
}

/// Field → discipline mapping plus the byline convention of each field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldTaxonomy {
    pub sds_to_uda: BTreeMap<String, String>,
    pub byline_convention: BTreeMap<String, BylineConvention>,
}

impl FieldTaxonomy {
    pub fn new(entries: impl IntoIterator<Item = (String, String, BylineConvention)>) -> Result<Self, ValidationError> {
        let mut taxonomy = Self::default();
        for (sds, uda, convention) in entries {
            if taxonomy.sds_to_uda.contains_key(&sds) {
                return Err(ValidationError::DuplicateSds(sds));
            }
            taxonomy.byline_convention.insert(sds.clone(), convention);
            taxonomy.sds_to_uda.insert(sds, uda);
        }
        Ok(taxonomy)
    }

    pub fn uda_of(&self, sds: &str) -> Option<&str> {
        self.sds_to_uda.get(sds).map(String::as_str)
    }

    pub fn convention_of(&self, sds: &str) -> Option<BylineConvention> {
        self.byline_convention.get(sds).copied()
    }

    /// Every field referenced by the roster needs a discipline and a convention.
    pub fn check_covers(&self, roster: &Roster) -> Result<(), ValidationError> {
        for r in roster.iter() {
            if !self.sds_to_uda.contains_key(r.sds_code()) {
                return Err(ValidationError::SdsWithoutUda(r.sds_code().to_string()));
            }
            if !self.byline_convention.contains_key(r.sds_code()) {
                return Err(ValidationError::SdsWithoutConvention(r.sds_code().to_string()));
            }
        }
        Ok(())
    }
}

/// Average annual salary per academic rank.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct SalarySchedule {
    by_rank: BTreeMap<String, f64>,
}

impl TryFrom<BTreeMap<String, f64>> for SalarySchedule {
    type Error = ValidationError;

    fn try_from(by_rank: BTreeMap<String, f64>) -> Result<Self, Self::Error> {
        SalarySchedule::new(by_rank)
    }
}

impl From<SalarySchedule> for BTreeMap<String, f64> {
    fn from(s: SalarySchedule) -> Self {
        s.by_rank
    }
}

impl SalarySchedule {
    pub fn new(by_rank: impl IntoIterator<Item = (String, f64)>) -> Result<Self, ValidationError> {
        let mut map = BTreeMap::new();
        for (rank, salary) in by_rank {
            if !(salary.is_finite() && salary > 0.0) {
                return Err(ValidationError::NonPositiveSalary { rank, salary });
            }
            map.insert(rank, salary);
        }
        Ok(Self { by_rank: map })
    }

    pub fn salary(&self, rank: &str) -> Option<f64> {
        self.by_rank.get(rank).copied()
    }

    pub fn ranks(&self) -> impl Iterator<Item = &str> {
        self.by_rank.keys().map(String::as_str)
    }

    /// Every salary multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, ValidationError> {
        Self::new(self.by_rank.iter().map(|(r, s)| (r.clone(), s * factor)))
    }
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Result<Self, ValidationError> {
        if start > end {
            return Err(ValidationError::EmptyWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// What the denominator `w` of the indicator measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Researcher-years priced at the average salary of the rank held.
    Salary,
    /// Plain researcher-years.
    YearsOnly,
}

impl std::str::FromStr for CostMode {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "salary" => Ok(Self::Salary),
            "years_only" | "years" => Ok(Self::YearsOnly),
            other => Err(ValidationError::UnknownCostMode(other.to_string())),
        }
    }
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::Salary => "salary",
            CostMode::YearsOnly => "years_only",
        })
    }
}

pub const DEFAULT_DOC_TYPES: [&str; 4] = ["article", "letter", "proceedings paper", "review"];

#[derive(Deserialize)]
struct RawConfig {
    window: YearWindow,
    hca_top_fraction: f64,
    multiplier: f64,
    cost_mode: CostMode,
    min_staff_sds: usize,
    min_staff_uda: usize,
    min_staff_overall: usize,
    doc_type_whitelist: BTreeSet<String>,
    sds_coverage_min: f64,
}

impl TryFrom<RawConfig> for AssessmentConfig {
    type Error = ValidationError;

    fn try_from(raw: RawConfig) -> Result<Self, Self::Error> {
        let config = AssessmentConfig {
            window: raw.window,
            hca_top_fraction: raw.hca_top_fraction,
            multiplier: raw.multiplier,
            cost_mode: raw.cost_mode,
            min_staff_sds: raw.min_staff_sds,
            min_staff_uda: raw.min_staff_uda,
            min_staff_overall: raw.min_staff_overall,
            doc_type_whitelist: raw.doc_type_whitelist,
            sds_coverage_min: raw.sds_coverage_min,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Every knob of an assessment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct AssessmentConfig {
    pub window: YearWindow,
    /// Share of each (year, category) cohort counted as highly cited.
    pub hca_top_fraction: f64,
    /// Readability multiplier of the field-level score.
    pub multiplier: f64,
    pub cost_mode: CostMode,
    pub min_staff_sds: usize,
    pub min_staff_uda: usize,
    pub min_staff_overall: usize,
    /// Lower-cased document types kept by ingestion.
    pub doc_type_whitelist: BTreeSet<String>,
    /// Minimum share of a field's researchers with at least one publication.
    pub sds_coverage_min: f64,
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        Self {
            window: YearWindow { start: 2008, end: 2012 },
            hca_top_fraction: 0.10,
            multiplier: 100.0,
            cost_mode: CostMode::Salary,
            min_staff_sds: 2,
            min_staff_uda: 10,
            min_staff_overall: 30,
            doc_type_whitelist: DEFAULT_DOC_TYPES.iter().map(|s| s.to_string()).collect(),
            sds_coverage_min: 0.50,
        }
    }
}

impl AssessmentConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        YearWindow::new(self.window.start, self.window.end)?;
        if !(self.hca_top_fraction > 0.0 && self.hca_top_fraction < 1.0) {
            return Err(ValidationError::TopFractionOutOfRange(self.hca_top_fraction));
        }
        if !(self.multiplier.is_finite() && self.multiplier > 0.0) {
            return Err(ValidationError::NonPositiveMultiplier(self.multiplier));
        }
        if !(0.0..=1.0).contains(&self.sds_coverage_min) {
            return Err(ValidationError::CoverageOutOfRange(self.sds_coverage_min));
        }
        for (name, value) in [
            ("min_staff_sds", self.min_staff_sds),
            ("min_staff_uda", self.min_staff_uda),
            ("min_staff_overall", self.min_staff_overall),
        ] {
            if value == 0 {
                return Err(ValidationError::ZeroStaffMinimum(name));
            }
        }
        Ok(())
    }

    /// Cut-off on the averaged percentile, e.g. 90 for the top 10%.
    pub fn hca_threshold(&self) -> f64 {
        100.0 * (1.0 - self.hca_top_fraction)
    }

    pub fn accepts_doc_type(&self, doc_type: &str) -> bool {
        self.doc_type_whitelist
            .contains(doc_type.trim().to_ascii_lowercase().as_str())
    }

    pub fn min_staff(&self, scope: ScopeKind) -> usize {
        match scope {
            ScopeKind::Sds => self.min_staff_sds,
            ScopeKind::Uda => self.min_staff_uda,
            ScopeKind::Overall => self.min_staff_overall,
        }
    }
}

/// Aggregation level without its code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeKind {
    Sds,
    Uda,
    Overall,
}

/// Aggregation level of a score.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "code")]
pub enum Scope {
    Sds(String),
    Uda(String),
    Overall,
}

impl Scope {
    pub fn kind(&self) -> ScopeKind {
        match self {
            Scope::Sds(_) => ScopeKind::Sds,
            Scope::Uda(_) => ScopeKind::Uda,
            Scope::Overall => ScopeKind::Overall,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Sds(code) | Scope::Uda(code) => f.write_str(code),
            Scope::Overall => f.write_str("Total"),
        }
    }
}

/// A university seen at one aggregation level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitId {
    pub university_id: String,
    pub scope: Scope,
}

impl UnitId {
    pub fn new(university_id: impl Into<String>, scope: Scope) -> Self {
        Self {
            university_id: university_id.into(),
            scope,
        }
    }
}

/// A ranked line of a league table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub unit_id: UnitId,
    pub staff_count: usize,
    pub cost_w: f64,
    pub score: f64,
    pub rank: u32,
    pub rank_percentile: u8,
}

/// Agreement between two rankings of the same units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_units: usize,
    pub spearman_rho: f64,
    pub pct_shifting: f64,
    pub avg_shift: f64,
    pub max_shift: u32,
    pub avg_percentile_shift: f64,
    pub max_percentile_shift: f64,
}
