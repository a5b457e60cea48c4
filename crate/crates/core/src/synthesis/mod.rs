//! Set programs for the safe-set benchmark: invariance, box containment and
//! inclusion of a scaled polytope in a planar projection, maximizing the scale.

mod backend;
mod benchmark;
mod constraints;
mod oracle;
mod verify;

use std::time::Duration;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    ellipsoid_invariance, ellipsoid_linear_feedback, free_matrix, piecewise_continuity, piecewise_convexity,
    piecewise_invariance, polyset_invariance, sos_constraint, sos_convexity, ExprMatrix,
};
use crate::conic::{check_solution, Assignment, ConicProgram, LinExpr, PsdVar, SolutionCheck, SolverOptions, Status, Var};
use crate::error::{Error, Result};
use crate::geometry::{polytope_d, ConicPartition, FacetMode, Polytope};
use crate::polynomials::{monomial_basis, HomogeneousPolynomial};
use crate::systems::{benchmark_system, reduce, ControlSystem};
use crate::templates::{EllipsoidTemplate, PartitionSpec, PiecewiseTemplate, PolysetTemplate, SetTemplate};

pub use backend::Backend;
pub use benchmark::{benchmark_specs, expected_range, run_benchmark, BenchmarkEntry};
pub use constraints::{box_containment, vertex_inclusion};
pub use oracle::{maximal_polar_contains, maximal_set_contains, maximal_set_contains_within};
pub use verify::{verify_template, ContainmentReport, OracleReport, Verification};

/// Which family of sets to synthesize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TemplateSpec {
    Ellipsoid,
    Polyset { degree: u32 },
    Piecewise { m1: usize, m2: usize },
    /// Ellipsoid kept invariant by a linear state feedback.
    Baseline,
}

impl TemplateSpec {
    pub fn label(&self) -> String {
        match self {
            TemplateSpec::Ellipsoid => "ellipsoid".into(),
            TemplateSpec::Polyset { degree } => format!("polyset-{degree}"),
            TemplateSpec::Piecewise { m1, m2 } => format!("piecewise-{m1}x{m2}"),
            TemplateSpec::Baseline => "baseline".into(),
        }
    }

    /// Degree of the template in the state: `γ = t^{1/degree}`.
    pub fn homogeneity(&self) -> u32 {
        match self {
            TemplateSpec::Polyset { degree } => *degree,
            _ => 2,
        }
    }
}

/// Problem data for one synthesis run.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisProblem {
    pub system: ControlSystem,
    /// `[lower, upper]` per state axis.
    pub safe_box: Vec<[f64; 2]>,
    pub template: TemplateSpec,
    pub inner_polytope: Polytope,
    /// Zero-based state indices of the projection plane.
    pub projection_dims: [usize; 2],
}

impl SynthesisProblem {
    /// Unit box, `polytope_d` and the first two coordinates.
    pub fn new(system: ControlSystem, template: TemplateSpec) -> Self {
        let n = system.state_dim();
        Self {
            system,
            safe_box: vec![[-1.0, 1.0]; n],
            template,
            inner_polytope: polytope_d(),
            projection_dims: [0, 1],
        }
    }

    pub fn benchmark(template: TemplateSpec) -> Self {
        Self::new(benchmark_system(), template)
    }

    pub fn with_box_scale(mut self, s: f64) -> Self {
        for b in &mut self.safe_box {
            b[0] *= s;
            b[1] *= s;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.system.state_dim();
        if self.safe_box.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.safe_box.len(),
            });
        }
        for (i, &[lo, hi]) in self.safe_box.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidProblem(format!("box axis {i}: need finite lo < hi, got [{lo}, {hi}]")));
            }
            if (lo + hi).abs() > 1e-12 * hi.abs().max(1.0) {
                return Err(Error::InvalidProblem(format!("box axis {i} is not symmetric: [{lo}, {hi}]")));
            }
        }
        let [a, b] = self.projection_dims;
        if a == b || a >= n || b >= n {
            return Err(Error::InvalidProblem(format!(
                "projection dims {:?} must be distinct and below {n}",
                self.projection_dims
            )));
        }
        if self.inner_polytope.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.inner_polytope.dim(),
            });
        }
        match self.template {
            TemplateSpec::Polyset { degree } if degree == 0 || degree % 2 == 1 => Err(Error::OddDegree(degree)),
            TemplateSpec::Piecewise { .. } if n != 3 => Err(Error::Unsupported(format!(
                "piecewise templates need a 3-dimensional state, got {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// Largest box half-width; constraint margins are scaled by its powers.
    pub fn box_scale(&self) -> f64 {
        self.safe_box.iter().map(|b| b[1]).fold(0.0, f64::max)
    }

    /// `Some(s)` when this is the benchmark system on the box `[−s, s]³`
    /// projected onto the first two coordinates, where the closed-form
    /// maximal set applies after scaling by `s`.
    pub fn oracle_scale(&self) -> Option<f64> {
        let bench = benchmark_system();
        let s = self.box_scale();
        let uniform = self.safe_box.iter().all(|b| (b[1] - s).abs() <= 1e-12 * s);
        (self.system == bench && uniform && self.projection_dims == [0, 1]).then_some(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisOptions {
    /// Strictness of every invariance certificate and box facet, relative to
    /// the box scale.
    pub margin: f64,
    /// Require an SOS Hessian form for polyset templates.
    pub sos_convexity: bool,
    pub facet_mode: FacetMode,
    /// With the reference backend, polysets of at least this degree (and a
    /// multiple of 4) are solved at half the degree and squared.
    pub square_from_degree: Option<u32>,
    pub solver: SolverOptions,
    pub verify_samples: usize,
    pub verify_tol: f64,
    pub convexity_pairs: usize,
    pub boundary_samples: usize,
    pub seed: u64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            margin: 1e-5,
            sos_convexity: true,
            facet_mode: FacetMode::Facets,
            square_from_degree: Some(20),
            solver: SolverOptions::default(),
            verify_samples: 10_000,
            verify_tol: 1e-6,
            convexity_pairs: 2_000,
            boundary_samples: 720,
            seed: crate::sampling::seed_or(0),
        }
    }
}

/// Decision variables describing the template inside a program.
#[derive(Clone, Debug)]
pub enum TemplateVars {
    Ellipsoid(PsdVar),
    Polyset(HomogeneousPolynomial<LinExpr>),
    Piecewise {
        spec: PartitionSpec,
        partition: ConicPartition,
        pieces: Vec<PsdVar>,
    },
    Baseline { q: PsdVar, feedback: ExprMatrix },
}

impl TemplateVars {
    fn new(prog: &mut ConicProgram, problem: &SynthesisProblem, options: &SynthesisOptions) -> Result<Self> {
        let n = problem.system.state_dim();
        Ok(match problem.template {
            TemplateSpec::Ellipsoid => TemplateVars::Ellipsoid(prog.add_psd(n)),
            TemplateSpec::Baseline => {
                let q = prog.add_psd(n);
                let feedback = free_matrix(prog, problem.system.input_dim(), n);
                TemplateVars::Baseline { q, feedback }
            }
            TemplateSpec::Polyset { degree } => {
                let basis = monomial_basis(n, degree);
                let terms: Vec<_> = basis.iter().map(|m| (m.clone(), LinExpr::var(prog.add_free()))).collect();
                TemplateVars::Polyset(HomogeneousPolynomial::from_terms(n, degree, terms)?)
            }
            TemplateSpec::Piecewise { m1, m2 } => {
                let spec = PartitionSpec::Sphere {
                    m1,
                    m2,
                    triangulated: options.facet_mode == FacetMode::Triangulated,
                };
                let partition = spec.build()?;
                let pieces = (0..partition.len()).map(|_| prog.add_psd(n)).collect();
                TemplateVars::Piecewise { spec, partition, pieces }
            }
        })
    }

    /// Instantiates the template from solved values.
    pub fn instantiate(&self, values: &Assignment) -> Result<SetTemplate> {
        match self {
            TemplateVars::Ellipsoid(q) | TemplateVars::Baseline { q, .. } => {
                Ok(SetTemplate::Ellipsoid(EllipsoidTemplate::new(values.matrix(*q).clone())?))
            }
            TemplateVars::Polyset(p) => {
                let real = p.map_coefficients(|c| values.eval(c));
                Ok(SetTemplate::Polyset(PolysetTemplate::new(real)?))
            }
            TemplateVars::Piecewise { spec, partition, pieces } => {
                let q: Vec<DMatrix<f64>> = pieces.iter().map(|p| values.matrix(*p).clone()).collect();
                let q = project_continuous(partition, q);
                Ok(SetTemplate::Piecewise(PiecewiseTemplate::with_partition(
                    *spec,
                    partition.clone(),
                    q,
                )?))
            }
        }
    }
}

/// Assembled program with handles to the template variables and the scale `t`.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub program: ConicProgram,
    pub t: Var,
    pub vars: TemplateVars,
}

/// Builds the full set program: validity, invariance, box containment,
/// vertex inclusion, objective `max t`.
pub fn assemble(problem: &SynthesisProblem, options: &SynthesisOptions) -> Result<Assembled> {
    problem.validate()?;
    let mut prog = ConicProgram::new();
    let vars = TemplateVars::new(&mut prog, problem, options)?;
    let t = prog.add_nonneg();
    let sys = reduce(&problem.system);
    let margin = options.margin * problem.box_scale().powi(problem.template.homogeneity() as i32);

    match &vars {
        TemplateVars::Ellipsoid(q) => {
            ellipsoid_invariance(&mut prog, &sys, &q.matrix(), margin)?;
        }
        TemplateVars::Baseline { q, feedback } => {
            ellipsoid_linear_feedback(&mut prog, &problem.system, &q.matrix(), feedback)?;
        }
        TemplateVars::Polyset(p) => {
            let mark = prog.mark();
            sos_constraint(&mut prog, p)?;
            prog.close_block(mark, "polyset nonnegativity");
            if options.sos_convexity {
                sos_convexity(&mut prog, p)?;
            }
            polyset_invariance(&mut prog, &sys, p, margin)?;
        }
        TemplateVars::Piecewise { partition, pieces, .. } => {
            let q: Vec<ExprMatrix> = pieces.iter().map(PsdVar::matrix).collect();
            piecewise_continuity(&mut prog, partition, &q)?;
            piecewise_convexity(&mut prog, partition, &q)?;
            piecewise_invariance(&mut prog, &sys, partition, &q, margin)?;
        }
    }
    // the facet rows are tight at the optimum, so they get the same relative margin
    let shrunk: Vec<[f64; 2]> = problem
        .safe_box
        .iter()
        .map(|&[lo, hi]| [lo * (1.0 - options.margin), hi * (1.0 - options.margin)])
        .collect();
    box_containment(&mut prog, &vars, &shrunk)?;
    vertex_inclusion(
        &mut prog,
        &vars,
        problem.inner_polytope.vertices(),
        t,
        problem.projection_dims,
    )?;
    prog.maximize(LinExpr::var(t));
    Ok(Assembled { program: prog, t, vars })
}

/// Outcome of the conic solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub status: Status,
    pub iterations: usize,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    /// Residual check of the returned point against the assembled program.
    pub check: SolutionCheck,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub spec: TemplateSpec,
    pub gamma: f64,
    /// `None` when the solver returned no point or the point is not a valid template.
    pub template: Option<SetTemplate>,
    /// Why the template could not be instantiated or verified.
    pub error: Option<String>,
    pub solver: SolverReport,
    pub verification: Option<Verification>,
}

impl SynthesisResult {
    /// Solver status is not optimal: `gamma` comes from the last iterate.
    pub fn inaccurate(&self) -> bool {
        self.solver.status != Status::Optimal
    }

    pub fn verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.passed)
    }
}

/// Assembles, solves, recovers `γ`, instantiates and verifies the template.
pub fn solve(problem: &SynthesisProblem, backend: &Backend, options: &SynthesisOptions) -> Result<SynthesisResult> {
    if let Some(half) = squared_half_degree(problem.template, backend, options) {
        return solve_squared(problem, half, backend, options);
    }
    let assembled = assemble(problem, options)?;
    let start = std::time::Instant::now();
    let solution = backend.solve(&assembled.program, &options.solver)?;
    let elapsed = start.elapsed();
    let check = check_solution(&assembled.program, solution.values.as_ref(), options.verify_tol);
    log::info!(
        "{}: {} after {} iterations ({:.2?})",
        problem.template.label(),
        solution.status,
        solution.iterations,
        elapsed
    );
    let solver = SolverReport {
        status: solution.status,
        iterations: solution.iterations,
        objective: solution.objective,
        primal_residual: solution.primal_residual,
        dual_residual: solution.dual_residual,
        gap: solution.gap,
        check,
        elapsed,
    };
    let Some(values) = solution.values else {
        return Ok(SynthesisResult {
            spec: problem.template,
            gamma: 0.0,
            template: None,
            error: None,
            solver,
            verification: None,
        });
    };
    let gamma = recover_gamma(values.value(assembled.t), problem.template.homogeneity());
    let (template, template_error) = match assembled.vars.instantiate(&values) {
        Ok(t) => (Some(t), None),
        Err(e) => {
            log::warn!("{}: solved point is not a valid template: {e}", problem.template.label());
            (None, Some(e.to_string()))
        }
    };
    let mut error = template_error;
    let verification = match template.as_ref().map(|t| verify_template(problem, t, options)) {
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            log::warn!("{}: verification could not run: {e}", problem.template.label());
            error = Some(format!("verification: {e}"));
            None
        }
        None => None,
    };
    Ok(SynthesisResult {
        spec: problem.template,
        gamma,
        template,
        error,
        solver,
        verification,
    })
}

fn squared_half_degree(spec: TemplateSpec, backend: &Backend, options: &SynthesisOptions) -> Option<u32> {
    let TemplateSpec::Polyset { degree } = spec else {
        return None;
    };
    let from = options.square_from_degree?;
    (matches!(backend, Backend::Reference) && degree >= from && degree % 4 == 0).then_some(degree / 2)
}

/// Solves at half the degree and returns `p²`. The sets `{p² ≤ 1}` and
/// `{p ≤ 1}` coincide, and `p²` is SOS and SOS-convex whenever `p` is, so this
/// is a point of the full-degree program with the same `γ`.
fn solve_squared(problem: &SynthesisProblem, half: u32, backend: &Backend, options: &SynthesisOptions) -> Result<SynthesisResult> {
    let half_problem = SynthesisProblem {
        template: TemplateSpec::Polyset { degree: half },
        ..problem.clone()
    };
    let base = solve(&half_problem, backend, options)?;
    log::info!("{}: squared from the degree-{half} solution", problem.template.label());
    let template = match &base.template {
        Some(SetTemplate::Polyset(t)) => {
            let p = t.polynomial();
            Some(SetTemplate::Polyset(PolysetTemplate::new(p.mul_real(p))?))
        }
        _ => None,
    };
    let mut error = base.error;
    let verification = match template.as_ref().map(|t| verify_template(problem, t, options)) {
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            error = Some(format!("verification: {e}"));
            None
        }
        None => None,
    };
    Ok(SynthesisResult {
        spec: problem.template,
        gamma: base.gamma,
        template,
        error,
        solver: base.solver,
        verification,
    })
}

/// Positive root `t^{1/degree}`; negative round-off maps to zero.
pub fn recover_gamma(t: f64, degree: u32) -> f64 {
    t.max(0.0).powf(1.0 / degree as f64)
}

/// Least-squares projection of the piece matrices onto the continuity subspace
/// `Bᵀ(Qᵢ − Qⱼ)B = 0`, removing the solver's residual jumps.
pub fn project_continuous(partition: &ConicPartition, q: Vec<DMatrix<f64>>) -> Vec<DMatrix<f64>> {
    let n = partition.dim();
    let adjacency = partition.adjacency();
    if adjacency.is_empty() || q.len() != partition.len() {
        return q;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let per = pairs.len();
    let k = adjacency[0].basis.ncols();
    let rows_per = k * (k + 1) / 2;
    let mut kmat = DMatrix::zeros(adjacency.len() * rows_per, q.len() * per);
    for (e, adj) in adjacency.iter().enumerate() {
        let basis = &adj.basis;
        let mut row = e * rows_per;
        for u in 0..k {
            for v in u..k {
                for (col, &(a, b)) in pairs.iter().enumerate() {
                    let c = if a == b {
                        basis[(a, u)] * basis[(a, v)]
                    } else {
                        basis[(a, u)] * basis[(b, v)] + basis[(b, u)] * basis[(a, v)]
                    };
                    kmat[(row, adj.first * per + col)] += c;
                    kmat[(row, adj.second * per + col)] -= c;
                }
                row += 1;
            }
        }
    }
    let mut x = nalgebra::DVector::zeros(q.len() * per);
    for (i, m) in q.iter().enumerate() {
        for (col, &(a, b)) in pairs.iter().enumerate() {
            x[i * per + col] = 0.5 * (m[(a, b)] + m[(b, a)]);
        }
    }
    let svd = kmat.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s > 1e-10 * smax {
            let dir = v_t.row(r).transpose();
            let c = dir.dot(&x);
            x.axpy(-c, &dir, 1.0);
        }
    }
    (0..q.len())
        .map(|i| {
            let mut m = DMatrix::zeros(n, n);
            for (col, &(a, b)) in pairs.iter().enumerate() {
                m[(a, b)] = x[i * per + col];
                m[(b, a)] = x[i * per + col];
            }
            m
        })
        .collect()
}

#[cfg(test)]
mod tests;
