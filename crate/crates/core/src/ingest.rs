//! Loading and validating the input files.
//!
//! A corpus lives in one directory of UTF-8 CSV files with header rows:
//!
//! | file               | columns                                              |
//! |--------------------|------------------------------------------------------|
//! | `publications.csv` | `pub_id,year,doc_type,citations,categories`          |
//! | `authorship.csv`   | `pub_id,position,university_id,researcher_id`        |
//! | `researchers.csv`  | `researcher_id,university_id,sds,year,rank`          |
//! | `taxonomy.csv`     | `sds,uda,convention`                                 |
//! | `salaries.csv`     | `rank,avg_salary`                                    |
//!
//! `categories` is semicolon separated. Empty `university_id` or
//! `researcher_id` cells mean the author is external or unmatched.
//! `researchers.csv` has one row per employment year.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestError, ValidationError};
use crate::hca::cohort_sizes;
use crate::model::{
    AssessmentConfig, AuthorSlot, BylineConvention, CostMode, FieldTaxonomy, PublicationRecord, Researcher, Roster,
    SalarySchedule, YearWindow,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub publications: PathBuf,
    pub authorship: PathBuf,
    pub researchers: PathBuf,
    pub taxonomy: PathBuf,
    pub salaries: PathBuf,
}

impl CorpusPaths {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            publications: dir.join("publications.csv"),
            authorship: dir.join("authorship.csv"),
            researchers: dir.join("researchers.csv"),
            taxonomy: dir.join("taxonomy.csv"),
            salaries: dir.join("salaries.csv"),
        }
    }
}

/// Why a record was dropped or looks suspicious.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningCode {
    DocTypeExcluded,
    OutsideWindow,
    NoByline,
    OrphanAuthorship,
    EmptyCorpus,
    SingletonCohort,
    NoActiveStaff,
    BelowCoverage,
    TooFewUnits,
}

impl fmt::Display for WarningCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WarningCode::DocTypeExcluded => "doc_type_excluded",
            WarningCode::OutsideWindow => "outside_window",
            WarningCode::NoByline => "no_byline",
            WarningCode::OrphanAuthorship => "orphan_authorship",
            WarningCode::EmptyCorpus => "empty_corpus",
            WarningCode::SingletonCohort => "singleton_cohort",
            WarningCode::NoActiveStaff => "no_active_staff",
            WarningCode::BelowCoverage => "below_coverage",
            WarningCode::TooFewUnits => "too_few_units",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub subject: String,
    pub detail: String,
}

impl Warning {
    pub fn new(code: WarningCode, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            code,
            subject: subject.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning[{}] {}: {}", self.code, self.subject, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn push(&mut self, warning: Warning) {
        self.warnings.push(warning);
    }

    pub fn count(&self, code: WarningCode) -> usize {
        self.warnings.iter().filter(|w| w.code == code).count()
    }
}

/// Validated inputs of one assessment. Publications are kept in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub publications: Vec<PublicationRecord>,
    pub roster: Roster,
    pub taxonomy: FieldTaxonomy,
    pub salaries: SalarySchedule,
}

impl Corpus {
    /// Applies the corpus filters (document type, window, empty byline) and
    /// cross-checks every byline against the roster.
    pub fn assemble(
        publications: Vec<PublicationRecord>,
        roster: Roster,
        taxonomy: FieldTaxonomy,
        salaries: SalarySchedule,
        config: &AssessmentConfig,
    ) -> Result<(Self, ValidationReport), ValidationError> {
        taxonomy.check_covers(&roster)?;
        let mut report = ValidationReport::default();
        let mut seen = BTreeSet::new();
        let mut kept = Vec::with_capacity(publications.len());
        for p in publications {
            if !seen.insert(p.pub_id().to_string()) {
                return Err(ValidationError::DuplicatePublication(p.pub_id().to_string()));
            }
            for slot in p.byline() {
                check_slot(&roster, slot, p.pub_id())?;
            }
            if !config.accepts_doc_type(p.doc_type()) {
                report.push(Warning::new(
                    WarningCode::DocTypeExcluded,
                    p.pub_id(),
                    format!("document type {:?} is not assessed", p.doc_type()),
                ));
                continue;
            }
            if !config.window.contains(p.year()) {
                report.push(Warning::new(
                    WarningCode::OutsideWindow,
                    p.pub_id(),
                    format!("year {} outside {}", p.year(), config.window),
                ));
                continue;
            }
            kept.push(p);
        }
        kept.sort_by(|a, b| a.pub_id().cmp(b.pub_id()));
        finish_report(&kept, &mut report);
        Ok((
            Self {
                publications: kept,
                roster,
                taxonomy,
                salaries,
            },
            report,
        ))
    }
}

fn finish_report(kept: &[PublicationRecord], report: &mut ValidationReport) {
    if kept.is_empty() {
        report.push(Warning::new(WarningCode::EmptyCorpus, "publications", "no publication left to assess"));
    }
    for ((year, cat), size) in cohort_sizes(kept) {
        if size == 1 {
            report.push(Warning::new(
                WarningCode::SingletonCohort,
                format!("{year}/{cat}"),
                "cohort holds a single publication; it cannot rank above 0",
            ));
        }
    }
}

fn check_slot(roster: &Roster, slot: &AuthorSlot, pub_id: &str) -> Result<(), ValidationError> {
    let Some(rid) = slot.researcher_id.as_deref() else {
        return Ok(());
    };
    let Some(researcher) = roster.get(rid) else {
        return Err(ValidationError::UnknownResearcher {
            pub_id: pub_id.to_string(),
            researcher_id: rid.to_string(),
        });
    };
    let uni = slot.university_id.as_deref().unwrap_or_default();
    if uni != researcher.university_id() {
        return Err(ValidationError::AffiliationMismatch {
            pub_id: pub_id.to_string(),
            researcher_id: rid.to_string(),
            byline: uni.to_string(),
            roster: researcher.university_id().to_string(),
        });
    }
    Ok(())
}

#[derive(Deserialize)]
struct PublicationRow {
    pub_id: String,
    year: i32,
    doc_type: String,
    citations: u64,
    categories: String,
}

#[derive(Deserialize)]
struct AuthorshipRow {
    pub_id: String,
    position: u32,
    university_id: Option<String>,
    researcher_id: Option<String>,
}

#[derive(Deserialize)]
struct ResearcherRow {
    researcher_id: String,
    university_id: String,
    sds: String,
    year: i32,
    rank: String,
}

#[derive(Deserialize)]
struct TaxonomyRow {
    sds: String,
    uda: String,
    convention: String,
}

#[derive(Deserialize)]
struct SalaryRow {
    rank: String,
    avg_salary: f64,
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.map(|v| v.trim().to_string()).filter(|v| !v.is_empty())
}

/// Rows of a CSV file paired with their 1-based line numbers.
fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<(u64, T)>, IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let parse_err = |line: u64, e: csv::Error| IngestError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(|e| parse_err(1, e))?.clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record.deserialize(Some(&headers)).map_err(|e| parse_err(line, e))?;
        rows.push((line, row));
    }
    Ok(rows)
}

fn invalid(path: &Path, source: ValidationError) -> IngestError {
    IngestError::Invalid {
        path: path.to_path_buf(),
        source,
    }
}

fn load_roster(path: &Path) -> Result<Roster, IngestError> {
    let mut grouped: BTreeMap<String, (String, String, BTreeMap<i32, String>)> = BTreeMap::new();
    for (_, row) in read_rows::<ResearcherRow>(path)? {
        let entry = grouped
            .entry(row.researcher_id.clone())
            .or_insert_with(|| (row.university_id.clone(), row.sds.clone(), BTreeMap::new()));
        for (field, first, second) in [("university", &entry.0, &row.university_id), ("sds", &entry.1, &row.sds)] {
            if first != second {
                return Err(invalid(
                    path,
                    ValidationError::InconsistentResearcher {
                        researcher_id: row.researcher_id,
                        field,
                        first: first.clone(),
                        second: second.clone(),
                    },
                ));
            }
        }
        if entry.2.insert(row.year, row.rank).is_some() {
            return Err(invalid(
                path,
                ValidationError::DuplicateEmploymentYear {
                    researcher_id: row.researcher_id,
                    year: row.year,
                },
            ));
        }
    }
    let researchers = grouped
        .into_iter()
        .map(|(id, (uni, sds, employment))| Researcher::new(id, uni, sds, employment))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| invalid(path, e))?;
    Roster::new(researchers).map_err(|e| invalid(path, e))
}

fn load_taxonomy(path: &Path) -> Result<FieldTaxonomy, IngestError> {
    let mut entries = Vec::new();
    for (line, row) in read_rows::<TaxonomyRow>(path)? {
        let convention: BylineConvention = row.convention.parse().map_err(|e: ValidationError| IngestError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        entries.push((row.sds, row.uda, convention));
    }
    FieldTaxonomy::new(entries).map_err(|e| invalid(path, e))
}

fn load_salaries(path: &Path) -> Result<SalarySchedule, IngestError> {
    let rows = read_rows::<SalaryRow>(path)?;
    SalarySchedule::new(rows.into_iter().map(|(_, r)| (r.rank, r.avg_salary))).map_err(|e| invalid(path, e))
}

fn load_publications(
    paths: &CorpusPaths,
    roster: &Roster,
    report: &mut ValidationReport,
) -> Result<Vec<PublicationRecord>, IngestError> {
    let pub_rows = read_rows::<PublicationRow>(&paths.publications)?;
    let mut bylines: BTreeMap<String, Vec<AuthorSlot>> = BTreeMap::new();
    let known: BTreeSet<&str> = pub_rows.iter().map(|(_, r)| r.pub_id.as_str()).collect();
    let path = &paths.authorship;
    for (line, row) in read_rows::<AuthorshipRow>(path)? {
        if !known.contains(row.pub_id.as_str()) {
            report.push(Warning::new(
                WarningCode::OrphanAuthorship,
                format!("{}:{line}", path.display()),
                format!("publication {} is not in the publications file", row.pub_id),
            ));
            continue;
        }
        let slot = AuthorSlot::new(row.position, non_empty(row.university_id), non_empty(row.researcher_id))
            .map_err(|e| invalid(path, e))?;
        check_slot(roster, &slot, &row.pub_id).map_err(|e| IngestError::Referential {
            path: path.clone(),
            line,
            message: e.to_string(),
        })?;
        bylines.entry(row.pub_id).or_default().push(slot);
    }

    let mut pubs = Vec::with_capacity(pub_rows.len());
    for (_, row) in pub_rows {
        let categories: Vec<String> = row
            .categories
            .split(';')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        let Some(byline) = bylines.remove(&row.pub_id) else {
            report.push(Warning::new(WarningCode::NoByline, &row.pub_id, "no authorship rows"));
            continue;
        };
        let record = PublicationRecord::new(row.pub_id, row.year, row.doc_type, row.citations, categories, byline)
            .map_err(|e| invalid(&paths.publications, e))?;
        pubs.push(record);
    }
    Ok(pubs)
}

/// Reads, validates and filters a corpus. Dropped records are listed in the
/// returned report; referential breaks abort.
pub fn load_corpus(paths: &CorpusPaths, config: &AssessmentConfig) -> Result<(Corpus, ValidationReport), Error> {
    let roster = load_roster(&paths.researchers)?;
    let taxonomy = load_taxonomy(&paths.taxonomy)?;
    let salaries = load_salaries(&paths.salaries)?;
    let mut report = ValidationReport::default();
    let pubs = load_publications(paths, &roster, &mut report)?;
    let (corpus, filtered) = Corpus::assemble(pubs, roster, taxonomy, salaries, config)?;
    report.warnings.extend(filtered.warnings);
    Ok((corpus, report))
}

/// Fields where enough of the national staff published at least once in the
/// window. The boundary is inclusive.
pub fn filter_sds_coverage(
    roster: &Roster,
    publications: &[PublicationRecord],
    config: &AssessmentConfig,
) -> (BTreeSet<String>, Vec<Warning>) {
    let authors: BTreeSet<&str> = publications
        .iter()
        .flat_map(|p| p.byline().iter().filter_map(|s| s.researcher_id.as_deref()))
        .collect();
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in roster.iter() {
        let entry = tally.entry(r.sds_code()).or_insert((0, 0));
        if r.is_active_in(config.window) {
            entry.0 += 1;
            if authors.contains(r.researcher_id()) {
                entry.1 += 1;
            }
        }
    }
    let mut assessed = BTreeSet::new();
    let mut warnings = Vec::new();
    for (sds, (active, publishing)) in tally {
        if active == 0 {
            warnings.push(Warning::new(WarningCode::NoActiveStaff, sds, "no researcher employed in the window"));
        } else if publishing as f64 / active as f64 >= config.sds_coverage_min {
            assessed.insert(sds.to_string());
        } else {
            warnings.push(Warning::new(
                WarningCode::BelowCoverage,
                sds,
                format!("{publishing} of {active} researchers published"),
            ));
        }
    }
    (assessed, warnings)
}

/// Every setting is optional; missing keys keep their defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    window_start: Option<i32>,
    window_end: Option<i32>,
    hca_top_fraction: Option<f64>,
    multiplier: Option<f64>,
    cost_mode: Option<String>,
    min_staff_sds: Option<usize>,
    min_staff_uda: Option<usize>,
    min_staff_overall: Option<usize>,
    doc_type_whitelist: Option<Vec<String>>,
    sds_coverage_min: Option<f64>,
}

/// Parses a TOML key-value configuration on top of the defaults.
pub fn parse_config(text: &str, origin: &Path) -> Result<AssessmentConfig, IngestError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| IngestError::Parse {
        path: origin.to_path_buf(),
        line: e
            .span()
            .map_or(0, |span| text[..span.start].matches('\n').count() as u64 + 1),
        message: e.message().to_string(),
    })?;
    let mut config = AssessmentConfig::default();
    let start = file.window_start.unwrap_or(config.window.start);
    let end = file.window_end.unwrap_or(config.window.end);
    config.window = YearWindow::new(start, end).map_err(|e| invalid(origin, e))?;
    if let Some(v) = file.hca_top_fraction {
        config.hca_top_fraction = v;
    }
    if let Some(v) = file.multiplier {
        config.multiplier = v;
    }
    if let Some(v) = file.cost_mode {
        config.cost_mode = v.parse::<CostMode>().map_err(|e| invalid(origin, e))?;
    }
    if let Some(v) = file.min_staff_sds {
        config.min_staff_sds = v;
    }
    if let Some(v) = file.min_staff_uda {
        config.min_staff_uda = v;
    }
    if let Some(v) = file.min_staff_overall {
        config.min_staff_overall = v;
    }
    if let Some(v) = file.doc_type_whitelist {
        config.doc_type_whitelist = v.into_iter().map(|d| d.trim().to_ascii_lowercase()).collect();
    }
    if let Some(v) = file.sds_coverage_min {
        config.sds_coverage_min = v;
    }
    config.validate().map_err(|e| invalid(origin, e))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<AssessmentConfig, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn researcher(id: &str, sds: &str, years: &[i32]) -> Researcher {
        let employment = years.iter().map(|y| (*y, "full".to_string())).collect();
        Researcher::new(id, "U1", sds, employment).unwrap()
    }

    fn authored(id: &str, researchers: &[&str]) -> PublicationRecord {
        let byline = researchers
            .iter()
            .enumerate()
            .map(|(i, r)| AuthorSlot::new(i as u32 + 1, Some("U1".into()), Some(r.to_string())).unwrap())
            .collect();
        PublicationRecord::new(id, 2010, "article", 1, vec!["C".into()], byline).unwrap()
    }

    #[test]
    fn coverage_boundary_is_inclusive() {
        let cfg = AssessmentConfig::default();
        let roster = Roster::new([
            researcher("a", "S4", &[2010]),
            researcher("b", "S4", &[2010]),
            researcher("c", "S4", &[2010]),
            researcher("d", "S4", &[2010]),
            researcher("e", "S3", &[2010]),
            researcher("f", "S3", &[2010]),
            researcher("g", "S3", &[2010]),
            researcher("h", "S0", &[1990]),
        ])
        .unwrap();
        let pubs = vec![authored("p1", &["a", "b"]), authored("p2", &["e"])];
        let (assessed, warnings) = filter_sds_coverage(&roster, &pubs, &cfg);
        assert_eq!(assessed, BTreeSet::from(["S4".to_string()]));
        assert!(warnings.iter().any(|w| w.code == WarningCode::BelowCoverage && w.subject == "S3"));
        assert!(warnings.iter().any(|w| w.code == WarningCode::NoActiveStaff && w.subject == "S0"));
    }

    #[test]
    fn inactive_staff_stay_out_of_the_denominator() {
        let cfg = AssessmentConfig::default();
        let roster = Roster::new([
            researcher("a", "S", &[2010]),
            researcher("b", "S", &[2001]),
            researcher("c", "S", &[2002]),
        ])
        .unwrap();
        let (assessed, _) = filter_sds_coverage(&roster, &[authored("p", &["a"])], &cfg);
        assert!(assessed.contains("S"));
    }

    #[test]
    fn assemble_drops_with_reasons() {
        let cfg = AssessmentConfig::default();
        let roster = Roster::new([researcher("a", "S", &[2010])]).unwrap();
        let taxonomy = FieldTaxonomy::new([("S".into(), "1".into(), BylineConvention::Alphabetical)]).unwrap();
        let salaries = SalarySchedule::new([("full".to_string(), 1.0)]).unwrap();
        let slot = || vec![AuthorSlot::new(1, Some("U1".into()), Some("a".into())).unwrap()];
        let pubs = vec![
            PublicationRecord::new("ok", 2010, "Article", 1, vec!["C".into()], slot()).unwrap(),
            PublicationRecord::new("ed", 2010, "editorial material", 1, vec!["C".into()], slot()).unwrap(),
            PublicationRecord::new("old", 2003, "article", 1, vec!["C".into()], slot()).unwrap(),
        ];
        let (corpus, report) = Corpus::assemble(pubs, roster, taxonomy, salaries, &cfg).unwrap();
        assert_eq!(corpus.publications.len(), 1);
        assert_eq!(report.count(WarningCode::DocTypeExcluded), 1);
        assert_eq!(report.count(WarningCode::OutsideWindow), 1);
        assert_eq!(report.count(WarningCode::SingletonCohort), 1);
    }

    #[test]
    fn assemble_rejects_dangling_researchers() {
        let cfg = AssessmentConfig::default();
        let roster = Roster::new([researcher("a", "S", &[2010])]).unwrap();
        let taxonomy = FieldTaxonomy::new([("S".into(), "1".into(), BylineConvention::Alphabetical)]).unwrap();
        let salaries = SalarySchedule::new([("full".to_string(), 1.0)]).unwrap();
        let ghost = PublicationRecord::new(
            "p",
            2010,
            "article",
            1,
            vec!["C".into()],
            vec![AuthorSlot::new(1, Some("U1".into()), Some("ghost".into())).unwrap()],
        )
        .unwrap();
        let err = Corpus::assemble(vec![ghost], roster, taxonomy, salaries, &cfg).unwrap_err();
        assert!(matches!(err, ValidationError::UnknownResearcher { .. }));
    }

    #[test]
    fn config_overrides_defaults() {
        let cfg = parse_config(
            "window_start = 2001\nwindow_end = 2003\ncost_mode = \"years_only\"\nhca_top_fraction = 0.05\n",
            Path::new("cfg.toml"),
        )
        .unwrap();
        assert_eq!(cfg.window, YearWindow { start: 2001, end: 2003 });
        assert_eq!(cfg.cost_mode, CostMode::YearsOnly);
        assert_eq!(cfg.hca_top_fraction, 0.05);
        assert_eq!(cfg.min_staff_uda, 10);

        let err = parse_config("bogus = 1\n", Path::new("cfg.toml")).unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 1, .. }));
        let err = parse_config("hca_top_fraction = 2.0\n", Path::new("cfg.toml")).unwrap_err();
        assert!(matches!(err, IngestError::Invalid { source: ValidationError::TopFractionOutOfRange(_), .. }));
    }
}
