//! Conic programs over free, nonnegative and PSD variables, a reference
//! solver, SDPA interchange and solution checking.

mod check;
mod expr;
mod program;
mod sdpa;
mod solver;

pub use check::{check_solution, SolutionCheck};
pub use expr::{LinExpr, Var};
pub use program::{Assignment, ConicProgram, ConstraintBlock, EqRow, Mark, PsdVar};
pub use sdpa::{export_sdpa, import_solution, parse_sdpa, sdpa_legend};
pub use solver::{project_psd, solve_reference, Solution, SolverOptions, Status};
