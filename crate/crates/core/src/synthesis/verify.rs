use crate::error::Result;
use crate::sampling::circle_directions;
use crate::systems::{reduce, verify_algebraic_invariance_with, InvarianceReport};
use crate::templates::{ConvexityReport, SetTemplate};

use super::oracle::maximal_set_contains_within;
use super::{SynthesisOptions, SynthesisProblem};

/// Box facet test on the instantiated template.
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    /// Largest `h(±eᵢ)/bᵢ − 1`.
    pub max_excess: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Projection-boundary sweep against the closed-form maximal set.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub samples: usize,
    pub outside: usize,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub invariance: InvarianceReport,
    pub convexity: ConvexityReport,
    pub containment: ContainmentReport,
    /// Only for the benchmark system on a uniform box.
    pub oracle: Option<OracleReport>,
    pub passed: bool,
}

impl Verification {
    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.invariance.passed {
            out.push("invariance");
        }
        if !self.convexity.passed {
            out.push("convexity");
        }
        if !self.containment.passed {
            out.push("box");
        }
        if self.oracle.as_ref().is_some_and(|o| !o.passed) {
            out.push("oracle");
        }
        out
    }
}

/// Sampled invariance, midpoint convexity, box facets and (for the benchmark)
/// the maximal-set oracle, all at `options.verify_tol`.
pub fn verify_template(problem: &SynthesisProblem, template: &SetTemplate, options: &SynthesisOptions) -> Result<Verification> {
    let tol = options.verify_tol;
    let sys = reduce(&problem.system);
    let invariance = verify_algebraic_invariance_with(
        &sys,
        template,
        options.verify_samples,
        tol,
        options.seed,
        options.solver.execution,
    )?;
    let convexity = template.check_convexity(options.convexity_pairs, options.seed, tol)?;

    let n = template.dim();
    let mut max_excess = f64::NEG_INFINITY;
    for (i, &[_, b]) in problem.safe_box.iter().enumerate() {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            max_excess = max_excess.max(template.support(&e)? / b - 1.0);
        }
    }
    let containment = ContainmentReport {
        max_excess,
        tol,
        passed: max_excess <= tol,
    };

    let oracle = match problem.oracle_scale() {
        Some(scale) => {
            let dirs = circle_directions(options.boundary_samples);
            let points = template.projection_boundary(&dirs, problem.projection_dims)?;
            let outside = points
                .iter()
                .filter(|x| !maximal_set_contains_within(&[x[0] / scale, x[1] / scale], tol))
                .count();
            Some(OracleReport {
                samples: points.len(),
                outside,
                tol,
                passed: outside == 0,
            })
        }
        None => None,
    };
    let passed = invariance.passed && convexity.passed && containment.passed && oracle.as_ref().is_none_or(|o| o.passed);
    Ok(Verification {
        invariance,
        convexity,
        containment,
        oracle,
        passed,
    })
}
