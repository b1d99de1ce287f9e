//! Labor cost of a set of researchers over the assessment window.

use std::borrow::Borrow;

use thiserror::Error;

use crate::model::{CostMode, Researcher, SalarySchedule, YearWindow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("no salary for rank {rank:?} held by researcher {researcher_id} in {year}")]
    MissingSalary {
        rank: String,
        researcher_id: String,
        year: i32,
    },
}

/// Cost of one researcher's window years.
pub fn researcher_cost(
    researcher: &Researcher,
    window: YearWindow,
    mode: CostMode,
    salaries: &SalarySchedule,
) -> Result<f64, CostError> {
    let mut total = 0.0;
    for (year, rank) in researcher.years_in(window) {
        total += match mode {
            CostMode::YearsOnly => 1.0,
            CostMode::Salary => salaries.salary(rank).ok_or_else(|| CostError::MissingSalary {
                rank: rank.to_string(),
                researcher_id: researcher.researcher_id().to_string(),
                year,
            })?,
        };
    }
    Ok(total)
}

/// Sum over researcher-years inside the window of the salary of the rank
/// held that year, or of 1 in [`CostMode::YearsOnly`].
pub fn unit_cost<R: Borrow<Researcher>>(
    staff: &[R],
    window: YearWindow,
    mode: CostMode,
    salaries: &SalarySchedule,
) -> Result<f64, CostError> {
    staff
        .iter()
        .map(|r| researcher_cost(r.borrow(), window, mode, salaries))
        .sum()
}

/// Researchers with at least one employment year inside the window.
pub fn staff_headcount<R: Borrow<Researcher>>(staff: &[R], window: YearWindow) -> usize {
    staff.iter().filter(|r| Borrow::<Researcher>::borrow(*r).is_active_in(window)).count()
}
