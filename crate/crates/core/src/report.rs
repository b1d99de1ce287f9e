//! CSV and JSON renderings of league tables, profiles, comparisons and the
//! HCA listing. JSON reports are arrays of objects carrying the CSV columns
//! as keys, in column order.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hca::HcaSet;
use crate::model::{Scope, ScopeKind, ScoreRow};
use crate::pipeline::{ComparisonRow, ProfileRow};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeagueLine {
    pub unit: String,
    pub research_staff: usize,
    pub p_hca: f64,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileLine {
    pub level: ScopeKind,
    pub scope: String,
    pub research_staff: usize,
    pub p_hca: f64,
    pub rank: String,
    pub percentile: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonLine {
    pub uda: String,
    pub universities: usize,
    pub spearman_rho: f64,
    pub shifting_in_rank_pct: f64,
    pub average_shift: f64,
    pub max_shift: u32,
    pub average_percentile_shift: f64,
    pub max_percentile_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcaLine {
    pub pub_id: String,
    pub year: i32,
    pub averaged_percentile: f64,
    pub is_hca: bool,
}

/// Anything `emit_report` can render.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    League(Vec<LeagueLine>),
    Profile(Vec<ProfileLine>),
    Comparison(Vec<ComparisonLine>),
    Hca(Vec<HcaLine>),
}

impl Report {
    pub fn league(rows: &[ScoreRow]) -> Self {
        Report::League(
            rows.iter()
                .map(|r| LeagueLine {
                    unit: r.unit_id.university_id.clone(),
                    research_staff: r.staff_count,
                    p_hca: r.score,
                    rank: r.rank,
                })
                .collect(),
        )
    }

    pub fn profile(rows: &[ProfileRow]) -> Self {
        Report::Profile(
            rows.iter()
                .map(|r| ProfileLine {
                    level: r.scope.kind(),
                    scope: r.scope.to_string(),
                    research_staff: r.research_staff,
                    p_hca: r.score,
                    rank: r.rank_display(),
                    percentile: r.percentile,
                })
                .collect(),
        )
    }

    pub fn comparison(rows: &[ComparisonRow]) -> Self {
        Report::Comparison(
            rows.iter()
                .map(|r| ComparisonLine {
                    uda: match &r.scope {
                        Scope::Overall => "Total".to_string(),
                        other => other.to_string(),
                    },
                    universities: r.report.n_units,
                    spearman_rho: r.report.spearman_rho,
                    shifting_in_rank_pct: r.report.pct_shifting,
                    average_shift: r.report.avg_shift,
                    max_shift: r.report.max_shift,
                    average_percentile_shift: r.report.avg_percentile_shift,
                    max_percentile_shift: r.report.max_percentile_shift,
                })
                .collect(),
        )
    }

    pub fn hcas(set: &HcaSet) -> Self {
        Report::Hca(
            set.iter()
                .map(|(id, e)| HcaLine {
                    pub_id: id.to_string(),
                    year: e.year,
                    averaged_percentile: e.percentile,
                    is_hca: e.is_hca,
                })
                .collect(),
        )
    }
}

fn header_of(report: &Report) -> &'static [&'static str] {
    match report {
        Report::League(_) => &["unit", "research_staff", "p_hca", "rank"],
        Report::Profile(_) => &["level", "scope", "research_staff", "p_hca", "rank", "percentile"],
        Report::Comparison(_) => &[
            "uda",
            "universities",
            "spearman_rho",
            "shifting_in_rank_pct",
            "average_shift",
            "max_shift",
            "average_percentile_shift",
            "max_percentile_shift",
        ],
        Report::Hca(_) => &["pub_id", "year", "averaged_percentile", "is_hca"],
    }
}

fn write_csv<W: Write, T: Serialize>(out: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(header).map_err(csv_to_io)?;
    for row in rows {
        writer.serialize(row).map_err(csv_to_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_to_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_json<W: Write, T: Serialize>(mut out: W, rows: &[T]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Renders `report` to `out`.
pub fn emit_report<W: Write>(report: &Report, format: Format, out: W) -> Result<()> {
    let header = header_of(report);
    match (report, format) {
        (Report::League(rows), Format::Csv) => write_csv(out, header, rows),
        (Report::Profile(rows), Format::Csv) => write_csv(out, header, rows),
        (Report::Comparison(rows), Format::Csv) => write_csv(out, header, rows),
        (Report::Hca(rows), Format::Csv) => write_csv(out, header, rows),
        (Report::League(rows), Format::Json) => write_json(out, rows),
        (Report::Profile(rows), Format::Json) => write_json(out, rows),
        (Report::Comparison(rows), Format::Json) => write_json(out, rows),
        (Report::Hca(rows), Format::Json) => write_json(out, rows),
    }
}

/// Renders `report` into a new file at `path`.
pub fn emit_report_to_path(report: &Report, format: Format, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    emit_report(report, format, BufWriter::new(file))
}
