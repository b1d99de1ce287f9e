//! End-to-end assessment: coverage filter, HCA detection, credit and cost,
//! field scores, national averages, aggregate scores and league tables.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{shift_stats_with, ShiftAveraging};
use crate::cost::{staff_headcount, unit_cost};
use crate::credit::allocate;
use crate::error::{Error, Result, Stage, StageExt};
use crate::hca::{detect_hcas, HcaSet};
use crate::ingest::{filter_sds_coverage, load_corpus, Corpus, CorpusPaths, Warning, WarningCode};
use crate::model::{AssessmentConfig, ComparisonReport, CostMode, Researcher, Scope, ScopeKind, ScoreRow, UnitId};
use crate::ranking::{build_league_table, row_percentile_exact, UnitScore};
use crate::scoring::{national_sds_average, score_aggregate, sds_score_from_credit, ScoringError, SdsContribution};

/// One university in one field, before ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdsUnit {
    pub university_id: String,
    pub sds_code: String,
    pub staff_count: usize,
    pub cost_w: f64,
    /// Summed credit shares over highly-cited publications.
    pub hca_credit: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentResult {
    pub config: AssessmentConfig,
    pub assessed_sds: BTreeSet<String>,
    pub hcas: HcaSet,
    /// Keyed by (university, SDS).
    pub sds_units: BTreeMap<(String, String), SdsUnit>,
    /// `None` where no university produced an HCA in the field.
    pub national_averages: BTreeMap<String, Option<f64>>,
    /// Every unit of every scope, before eligibility.
    pub uda_units: BTreeMap<String, Vec<UnitScore>>,
    pub overall_units: Vec<UnitScore>,
    pub sds_tables: BTreeMap<String, Vec<ScoreRow>>,
    pub uda_tables: BTreeMap<String, Vec<ScoreRow>>,
    pub overall_table: Vec<ScoreRow>,
    pub warnings: Vec<Warning>,
}

/// The cost-mode independent part of an assessment.
struct Prepared {
    assessed: BTreeSet<String>,
    hcas: HcaSet,
    /// (university, SDS) → window-active staff.
    staff: BTreeMap<(String, String), Vec<Researcher>>,
    credit: BTreeMap<(String, String), f64>,
    warnings: Vec<Warning>,
}

fn prepare(corpus: &Corpus, config: &AssessmentConfig) -> Result<Prepared> {
    config.validate().stage(Stage::Load)?;
    let (assessed, warnings) = filter_sds_coverage(&corpus.roster, &corpus.publications, config);

    let hcas = detect_hcas(&corpus.publications, config);

    let mut staff: BTreeMap<(String, String), Vec<Researcher>> = BTreeMap::new();
    for r in corpus.roster.iter() {
        if assessed.contains(r.sds_code()) && r.is_active_in(config.window) {
            staff
                .entry((r.university_id().to_string(), r.sds_code().to_string()))
                .or_default()
                .push(r.clone());
        }
    }

    let shares: Vec<BTreeMap<(String, String), f64>> = corpus
        .publications
        .par_iter()
        .filter(|p| hcas.is_hca(p.pub_id()))
        .map(|p| allocate(p, &corpus.roster, &corpus.taxonomy))
        .collect();
    let mut credit: BTreeMap<(String, String), f64> = BTreeMap::new();
    for per_pub in shares {
        for (unit, f) in per_pub {
            if staff.contains_key(&unit) {
                *credit.entry(unit).or_insert(0.0) += f;
            }
        }
    }

    Ok(Prepared {
        assessed,
        hcas,
        staff,
        credit,
        warnings,
    })
}

/// Headcount and contributing fields of one aggregate unit.
type Group = (usize, Vec<SdsContribution>);

fn score(prepared: &Prepared, corpus: &Corpus, config: &AssessmentConfig) -> Result<AssessmentResult> {
    let mut sds_units = BTreeMap::new();
    for ((uni, sds), members) in &prepared.staff {
        let cost_w = unit_cost(members, config.window, config.cost_mode, &corpus.salaries).stage(Stage::Cost)?;
        let hca_credit = prepared.credit.get(&(uni.clone(), sds.clone())).copied().unwrap_or(0.0);
        let score = sds_score_from_credit(hca_credit, cost_w, config.multiplier).stage(Stage::ScoreSds)?;
        sds_units.insert(
            (uni.clone(), sds.clone()),
            SdsUnit {
                university_id: uni.clone(),
                sds_code: sds.clone(),
                staff_count: staff_headcount(members, config.window),
                cost_w,
                hca_credit,
                score,
            },
        );
    }

    let mut by_sds: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for unit in sds_units.values() {
        by_sds.entry(&unit.sds_code).or_default().push((unit.cost_w, unit.score));
    }
    let mut national_averages = BTreeMap::new();
    for (sds, rows) in by_sds {
        let avg = match national_sds_average(&rows) {
            Ok(avg) => Some(avg),
            Err(ScoringError::NoHcaInSds) => None,
            Err(e) => return Err(Error::from(e).at(Stage::NationalAverage)),
        };
        national_averages.insert(sds.to_string(), avg);
    }

    // (university, UDA) → contributing fields; "" collects every field.
    let mut groups: BTreeMap<(&str, Option<&str>), Group> = BTreeMap::new();
    for unit in sds_units.values() {
        let uda = corpus
            .taxonomy
            .uda_of(&unit.sds_code)
            .ok_or_else(|| Error::NotFound(format!("SDS {} has no UDA", unit.sds_code)).at(Stage::ScoreAggregate))?;
        let contribution = SdsContribution {
            score: unit.score,
            cost_w: unit.cost_w,
            national_avg: national_averages[&unit.sds_code],
        };
        for key in [(unit.university_id.as_str(), Some(uda)), (unit.university_id.as_str(), None)] {
            let entry = groups.entry(key).or_default();
            entry.0 += unit.staff_count;
            entry.1.push(contribution);
        }
    }

    let mut uda_units: BTreeMap<String, Vec<UnitScore>> = BTreeMap::new();
    let mut overall_units = Vec::new();
    for ((uni, uda), (staff_count, fields)) in groups {
        let cost_w: f64 = fields.iter().map(|f| f.cost_w).sum();
        let score = score_aggregate(&fields).stage(Stage::ScoreAggregate)?;
        let scope = match uda {
            Some(code) => Scope::Uda(code.to_string()),
            None => Scope::Overall,
        };
        let unit = UnitScore {
            unit_id: UnitId::new(uni, scope),
            staff_count,
            cost_w,
            score,
        };
        match uda {
            Some(code) => uda_units.entry(code.to_string()).or_default().push(unit),
            None => overall_units.push(unit),
        }
    }

    let mut sds_tables = BTreeMap::new();
    for sds in &prepared.assessed {
        let units: Vec<UnitScore> = sds_units
            .values()
            .filter(|u| &u.sds_code == sds)
            .map(|u| UnitScore {
                unit_id: UnitId::new(&u.university_id, Scope::Sds(sds.clone())),
                staff_count: u.staff_count,
                cost_w: u.cost_w,
                score: u.score,
            })
            .collect();
        sds_tables.insert(sds.clone(), build_league_table(units, config, ScopeKind::Sds));
    }
    let uda_tables = uda_units
        .iter()
        .map(|(uda, units)| (uda.clone(), build_league_table(units.clone(), config, ScopeKind::Uda)))
        .collect();
    let overall_table = build_league_table(overall_units.clone(), config, ScopeKind::Overall);

    Ok(AssessmentResult {
        config: config.clone(),
        assessed_sds: prepared.assessed.clone(),
        hcas: prepared.hcas.clone(),
        sds_units,
        national_averages,
        uda_units,
        overall_units,
        sds_tables,
        uda_tables,
        overall_table,
        warnings: prepared.warnings.clone(),
    })
}

/// Runs the whole assessment on an already validated corpus.
pub fn run_assessment(corpus: &Corpus, config: &AssessmentConfig) -> Result<AssessmentResult> {
    let prepared = prepare(corpus, config)?;
    score(&prepared, corpus, config)
}

/// Loads the corpus from disk and runs the assessment. Load warnings come
/// first in the result's warning list.
pub fn run_assessment_from_paths(paths: &CorpusPaths, config: &AssessmentConfig) -> Result<AssessmentResult> {
    let (corpus, report) = load_corpus(paths, config).stage(Stage::Load)?;
    let mut result = run_assessment(&corpus, config)?;
    let mut warnings = report.warnings;
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}

/// One line of a university profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub scope: Scope,
    pub research_staff: usize,
    pub score: f64,
    pub rank: u32,
    pub population: u32,
    pub percentile: u8,
}

impl ProfileRow {
    /// e.g. `5 of 63`.
    pub fn rank_display(&self) -> String {
        format!("{} of {}", self.rank, self.population)
    }
}

fn profile_row(table: &[ScoreRow], university_id: &str) -> Option<ProfileRow> {
    table
        .iter()
        .find(|r| r.unit_id.university_id == university_id)
        .map(|r| ProfileRow {
            scope: r.unit_id.scope.clone(),
            research_staff: r.staff_count,
            score: r.score,
            rank: r.rank,
            population: table.len() as u32,
            percentile: r.rank_percentile,
        })
}

/// National standing of one university in every field and discipline where
/// it is ranked, then overall.
pub fn profile(result: &AssessmentResult, university_id: &str) -> Result<Vec<ProfileRow>> {
    let mut rows: Vec<ProfileRow> = result
        .sds_tables
        .values()
        .filter_map(|t| profile_row(t, university_id))
        .collect();
    rows.extend(result.uda_tables.values().filter_map(|t| profile_row(t, university_id)));
    rows.extend(profile_row(&result.overall_table, university_id));
    if rows.is_empty() {
        return Err(Error::NotFound(format!("university {university_id} is not ranked at any level")));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scope: Scope,
    pub report: ComparisonReport,
}

/// Salary-normalized against years-only rankings, per discipline and overall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModeComparison {
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<Warning>,
}

fn compare_tables(scope: Scope, salary: &[ScoreRow], years: &[ScoreRow], averaging: ShiftAveraging) -> Result<ComparisonRow> {
    let by_uni: BTreeMap<&str, &ScoreRow> = years.iter().map(|r| (r.unit_id.university_id.as_str(), r)).collect();
    let paired: Vec<(&ScoreRow, &ScoreRow)> = salary
        .iter()
        .filter_map(|a| by_uni.get(a.unit_id.university_id.as_str()).map(|b| (a, *b)))
        .collect();
    let (na, nb) = (salary.len() as u32, years.len() as u32);
    let ranks_a: Vec<u32> = paired.iter().map(|(a, _)| a.rank).collect();
    let ranks_b: Vec<u32> = paired.iter().map(|(_, b)| b.rank).collect();
    let pct = |row: &ScoreRow, n: u32| row_percentile_exact(row.score, row.rank, n);
    let pct_a = paired.iter().map(|(a, _)| pct(a, na)).collect::<Result<Vec<_>, _>>()?;
    let pct_b = paired.iter().map(|(_, b)| pct(b, nb)).collect::<Result<Vec<_>, _>>()?;
    let report = shift_stats_with(&ranks_a, &ranks_b, &pct_a, &pct_b, averaging)?;
    Ok(ComparisonRow { scope, report })
}

/// Reruns the assessment with plain researcher-years as cost and compares
/// each discipline table and the overall table with the salary-based one.
/// Tables with fewer than two ranked units are skipped with a warning.
pub fn compare_cost_modes(corpus: &Corpus, config: &AssessmentConfig, averaging: ShiftAveraging) -> Result<CostModeComparison> {
    let prepared = prepare(corpus, config)?;
    let salary = score(&prepared, corpus, &AssessmentConfig { cost_mode: CostMode::Salary, ..config.clone() })?;
    let years = score(&prepared, corpus, &AssessmentConfig { cost_mode: CostMode::YearsOnly, ..config.clone() })?;

    let mut rows = Vec::new();
    let mut warnings = prepared.warnings.clone();
    let mut pairs: Vec<(Scope, &[ScoreRow], &[ScoreRow])> = salary
        .uda_tables
        .iter()
        .map(|(uda, table)| {
            let other = years.uda_tables.get(uda).map_or(&[][..], Vec::as_slice);
            (Scope::Uda(uda.clone()), table.as_slice(), other)
        })
        .collect();
    pairs.push((Scope::Overall, &salary.overall_table, &years.overall_table));
    for (scope, a, b) in pairs {
        if a.len() < 2 || b.len() < 2 {
            warnings.push(Warning::new(
                WarningCode::TooFewUnits,
                scope.to_string(),
                format!("{} ranked units; comparison needs at least 2", a.len().min(b.len())),
            ));
            continue;
        }
        rows.push(compare_tables(scope, a, b, averaging).stage(Stage::Compare)?);
    }
    Ok(CostModeComparison { rows, warnings })
}
