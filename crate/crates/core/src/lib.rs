//! Research-excellence efficiency rankings: highly-cited articles per unit
//! of research labor cost, for universities by field (SDS), by discipline
//! (UDA) and as a whole.
//!
//! The pipeline runs
//! [`ingest`] → coverage filter → [`hca`] → [`credit`] and [`cost`] →
//! [`scoring`] → [`ranking`], with [`compare`] providing the diagnostics
//! (rank correlation, rank shifts, distribution shape) and [`report`] the
//! CSV/JSON output. [`pipeline`] chains it all.

pub mod compare;
pub mod cost;
pub mod credit;
pub mod error;
pub mod hca;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod scoring;

pub use error::{Error, Result, Stage};
pub use model::{
    AssessmentConfig, AuthorSlot, BylineConvention, ComparisonReport, CostMode, FieldTaxonomy, PublicationRecord,
    Researcher, Roster, SalarySchedule, Scope, ScopeKind, ScoreRow, UnitId, YearWindow,
};
