use std::path::PathBuf;
use std::process::Command;

use crate::conic::{export_sdpa, import_solution, solve_reference, ConicProgram, Solution, SolverOptions};
use crate::error::{Error, Result};

/// Conic solver used by [`super::solve`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Built-in ADMM solver.
    #[default]
    Reference,
    /// External program run as `command… <input.dat-s> <output>`; the output
    /// must contain `phase.value`, `objValPrimal` and `yMat` in SDPA style.
    SdpaFile { command: Vec<String>, workdir: PathBuf },
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Reference => "reference",
            Backend::SdpaFile { .. } => "sdpa-file",
        }
    }

    pub fn solve(&self, prog: &ConicProgram, options: &SolverOptions) -> Result<Solution> {
        match self {
            Backend::Reference => solve_reference(prog, options),
            Backend::SdpaFile { command, workdir } => {
                let (program, args) = command
                    .split_first()
                    .ok_or_else(|| Error::InvalidProblem("empty external solver command".into()))?;
                std::fs::create_dir_all(workdir)?;
                let input = workdir.join("problem.dat-s");
                let output = workdir.join("problem.out");
                std::fs::write(&input, export_sdpa(prog))?;
                let status = Command::new(program).args(args).arg(&input).arg(&output).status()?;
                if !status.success() {
                    return Err(Error::Unsupported(format!("external solver `{program}` exited with {status}")));
                }
                import_solution(prog, &std::fs::read_to_string(&output)?)
            }
        }
    }
}
