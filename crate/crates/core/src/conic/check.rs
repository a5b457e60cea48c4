use std::fmt;

use super::program::{Assignment, ConicProgram};
use crate::linalg::min_eigenvalue;

/// Independent feasibility check of a solution.
///
/// Equality residuals are measured per row after dividing by
/// `max(1, max |coefficient|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionCheck {
    pub has_values: bool,
    pub equality_residual: f64,
    pub worst_row: Option<usize>,
    pub min_psd_eigenvalue: f64,
    pub worst_psd_block: Option<usize>,
    pub min_nonneg: f64,
    pub worst_nonneg: Option<usize>,
    /// Name of the constraint block owning the worst violation, when known.
    pub location: Option<String>,
    pub tol: f64,
    pub passed: bool,
}

impl fmt::Display for SolutionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.has_values {
            return write!(f, "no values");
        }
        write!(
            f,
            "{}: equality residual {:.3e}, min PSD eigenvalue {:.3e}, min nonneg {:.3e}",
            if self.passed { "pass" } else { "fail" },
            self.equality_residual,
            self.min_psd_eigenvalue,
            self.min_nonneg
        )?;
        if let (false, Some(loc)) = (self.passed, &self.location) {
            write!(f, " (worst in {loc})")?;
        }
        Ok(())
    }
}

pub(crate) fn row_residuals(prog: &ConicProgram, values: &Assignment) -> Vec<f64> {
    prog.rows()
        .iter()
        .map(|row| {
            let lhs: f64 = row.terms.iter().map(|(v, c)| c * values.value(*v)).sum();
            (lhs - row.rhs).abs() / row.max_abs_coefficient().max(1.0)
        })
        .collect()
}

/// Largest cone violation: negative nonneg entries and negative PSD eigenvalues.
pub(crate) fn cone_violation(values: &Assignment) -> f64 {
    let nonneg = values.nonneg.iter().fold(0.0_f64, |a, &x| a.max(-x));
    values
        .psd
        .iter()
        .fold(nonneg, |a, m| a.max(-min_eigenvalue(m)))
}

pub fn check_solution(prog: &ConicProgram, values: Option<&Assignment>, tol: f64) -> SolutionCheck {
    let Some(values) = values else {
        return SolutionCheck {
            has_values: false,
            equality_residual: f64::NAN,
            worst_row: None,
            min_psd_eigenvalue: f64::NAN,
            worst_psd_block: None,
            min_nonneg: f64::NAN,
            worst_nonneg: None,
            location: None,
            tol,
            passed: false,
        };
    };
    let residuals = row_residuals(prog, values);
    let (worst_row, equality_residual) = argmax(&residuals);
    let eigs: Vec<f64> = values.psd.iter().map(min_eigenvalue).collect();
    let (worst_psd_block, min_psd_eigenvalue) = argmin(&eigs);
    let (worst_nonneg, min_nonneg) = argmin(&values.nonneg);

    let eq_ok = equality_residual <= tol;
    let psd_ok = min_psd_eigenvalue >= -tol;
    let nn_ok = min_nonneg >= -tol;
    let passed = eq_ok && psd_ok && nn_ok;

    let owner = |pred: &dyn Fn(&super::ConstraintBlock) -> bool| {
        prog.blocks().iter().find(|b| pred(b)).map(|b| b.name.clone())
    };
    let location = if !eq_ok {
        worst_row.and_then(|r| owner(&|b| b.rows.contains(&r)).or(Some(format!("row {r}"))))
    } else if !psd_ok {
        worst_psd_block.and_then(|k| owner(&|b| b.psd.contains(&k)).or(Some(format!("PSD block {k}"))))
    } else if !nn_ok {
        worst_nonneg.and_then(|k| owner(&|b| b.nonneg.contains(&k)).or(Some(format!("nonneg {k}"))))
    } else {
        None
    };

    SolutionCheck {
        has_values: true,
        equality_residual,
        worst_row,
        min_psd_eigenvalue,
        worst_psd_block,
        min_nonneg,
        worst_nonneg,
        location,
        tol,
        passed,
    }
}

fn argmax(v: &[f64]) -> (Option<usize>, f64) {
    v.iter()
        .enumerate()
        .fold((None, 0.0), |(bi, bv), (i, &x)| if x > bv { (Some(i), x) } else { (bi, bv) })
}

fn argmin(v: &[f64]) -> (Option<usize>, f64) {
    v.iter().enumerate().fold((None, f64::INFINITY), |(bi, bv), (i, &x)| {
        if x < bv {
            (Some(i), x)
        } else {
            (bi, bv)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve_reference, LinExpr, SolverOptions};

    fn two_by_two() -> ConicProgram {
        let mut p = ConicProgram::new();
        let t = p.add_free();
        let one = LinExpr::constant(1.0);
        let tv = LinExpr::var(t);
        let mark = p.mark();
        p.add_psd_constraint(&[vec![one.clone(), tv.clone()], vec![tv.clone(), one]]);
        p.close_block(mark, "determinant");
        p.maximize(tv);
        p
    }

    #[test]
    fn optimal_solution_passes() {
        let p = two_by_two();
        let sol = solve_reference(&p, &SolverOptions::default()).unwrap();
        let report = check_solution(&p, sol.values.as_ref(), 1e-6);
        assert!(report.passed, "{report}");
    }

    #[test]
    fn injected_fault_is_located() {
        let p = two_by_two();
        let sol = solve_reference(&p, &SolverOptions::default()).unwrap();
        let mut values = sol.values.unwrap();
        let x = p.psd_var(0);
        values.set(x.var(0, 0), values.value(x.var(0, 0)) + 1.0);
        let report = check_solution(&p, Some(&values), 1e-6);
        assert!(!report.passed);
        assert_eq!(report.location.as_deref(), Some("determinant"));
    }

    #[test]
    fn missing_values() {
        let report = check_solution(&two_by_two(), None, 1e-6);
        assert!(!report.passed);
        assert_eq!(report.to_string(), "no values");
    }
}
