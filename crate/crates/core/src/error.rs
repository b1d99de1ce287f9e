use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::compare::CompareError;
use crate::cost::CostError;
use crate::credit::CreditError;
use crate::hca::HcaError;
use crate::ranking::RankingError;
use crate::scoring::ScoringError;

/// Broken invariant of a domain type or configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("publication {pub_id}: byline is empty")]
    EmptyByline { pub_id: String },
    #[error("publication {pub_id}: byline position {found} where {expected} was expected")]
    BylinePositions { pub_id: String, expected: u32, found: u32 },
    #[error("publication {pub_id}: no subject categories")]
    NoSubjectCategories { pub_id: String },
    #[error("publication {pub_id}: subject category {category} listed twice")]
    DuplicateSubjectCategory { pub_id: String, category: String },
    #[error("publication {0} appears more than once")]
    DuplicatePublication(String),
    #[error("byline position {position}: researcher {researcher_id} has no university")]
    ResearcherWithoutUniversity { position: u32, researcher_id: String },
    #[error("publication {pub_id}: researcher {researcher_id} is not on the roster")]
    UnknownResearcher { pub_id: String, researcher_id: String },
    #[error("publication {pub_id}: researcher {researcher_id} bylined at {byline:?} but on the roster at {roster}")]
    AffiliationMismatch {
        pub_id: String,
        researcher_id: String,
        byline: String,
        roster: String,
    },
    #[error("researcher {researcher_id}: no employment years")]
    EmptyEmployment { researcher_id: String },
    #[error("researcher {0} appears more than once")]
    DuplicateResearcher(String),
    #[error("researcher {researcher_id}: conflicting {field} ({first} vs {second})")]
    InconsistentResearcher {
        researcher_id: String,
        field: &'static str,
        first: String,
        second: String,
    },
    #[error("researcher {researcher_id}: year {year} listed twice")]
    DuplicateEmploymentYear { researcher_id: String, year: i32 },
    #[error("SDS {0} listed twice in the taxonomy")]
    DuplicateSds(String),
    #[error("SDS {0} has no UDA in the taxonomy")]
    SdsWithoutUda(String),
    #[error("SDS {0} has no byline convention in the taxonomy")]
    SdsWithoutConvention(String),
    #[error("unknown byline convention {0:?}")]
    UnknownConvention(String),
    #[error("unknown cost mode {0:?}")]
    UnknownCostMode(String),
    #[error("salary for rank {rank} must be positive, got {salary}")]
    NonPositiveSalary { rank: String, salary: f64 },
    #[error("window {start}-{end} is empty")]
    EmptyWindow { start: i32, end: i32 },
    #[error("HCA top fraction must lie in (0, 1), got {0}")]
    TopFractionOutOfRange(f64),
    #[error("multiplier must be positive, got {0}")]
    NonPositiveMultiplier(f64),
    #[error("SDS coverage minimum must lie in [0, 1], got {0}")]
    CoverageOutOfRange(f64),
    #[error("{0} must be at least 1")]
    ZeroStaffMinimum(&'static str),
}

/// Failure while reading input files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}:{line}: {message}")]
    Referential { path: PathBuf, line: u64, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ValidationError,
    },
}

/// Pipeline step an error surfaced in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Coverage,
    DetectHca,
    Cost,
    ScoreSds,
    NationalAverage,
    ScoreAggregate,
    Rank,
    Compare,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::Coverage => "coverage",
            Stage::DetectHca => "detect-hca",
            Stage::Cost => "cost",
            Stage::ScoreSds => "score-sds",
            Stage::NationalAverage => "national-average",
            Stage::ScoreAggregate => "score-aggregate",
            Stage::Rank => "rank",
            Stage::Compare => "compare",
            Stage::Report => "report",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Hca(#[from] HcaError),
    #[error(transparent)]
    Credit(#[from] CreditError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error("{0}")]
    NotFound(String),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: Stage) -> Self {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, with stage tags peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit status: 2 for I/O and parse failures, 1 for everything
    /// the data itself got wrong.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io(_) | Error::Ingest(IngestError::Io { .. }) | Error::Ingest(IngestError::Parse { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Tags the error of a fallible step with its pipeline stage.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.into().at(stage))
    }
}
