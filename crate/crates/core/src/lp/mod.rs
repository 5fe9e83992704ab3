//! Monthly bill-minimisation LP: assembly, solution and independent checks.

mod build;
mod instance;
mod lpfile;
mod solve;
mod verify;

pub use build::{build_lp, build_lp_with, FlexInput, MonthProblem};
pub use instance::{ColumnBound, ConstraintTag, Formulation, LpInstance, Row, Var, VarIndex};
pub use lpfile::{lp_string, write_lp};
pub use solve::{solve_lp, solve_smoothed, TIE_BREAK_RTOL, DispatchSolution, SolveStatus, Tightness, DEFAULT_TOLERANCE};
pub use verify::{verify_solution, VerificationReport, BALANCE_TOLERANCE, OBJECTIVE_RTOL};

#[cfg(test)]
mod tests;
