use super::*;
use crate::conic::{solve_reference, Status};
use crate::geometry::Polytope;
use crate::polynomials::ExponentVector;

fn feasible(prog: &ConicProgram) -> bool {
    let sol = solve_reference(prog, &SolverOptions::default()).unwrap();
    match sol.status {
        Status::Optimal => true,
        Status::InfeasibleCertified => false,
        other => panic!("undecided: {other} after {} iterations", sol.iterations),
    }
}

fn pin(prog: &mut ConicProgram, q: PsdVar, m: &DMatrix<f64>) {
    for i in 0..q.side() {
        for j in i..q.side() {
            prog.add_eq(&(q.entry(i, j) - LinExpr::constant(m[(i, j)])));
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn gamma(problem: &SynthesisProblem) -> SynthesisResult {
    let result = solve(problem, &Backend::Reference, &SynthesisOptions::default()).unwrap();
    assert_eq!(result.solver.status, Status::Optimal, "{}", problem.template.label());
    result
}

#[test]
fn ellipsoid_census() {
    let a = assemble(&SynthesisProblem::benchmark(TemplateSpec::Ellipsoid), &SynthesisOptions::default()).unwrap();
    assert_eq!(a.program.psd_sides(), &[3, 2, 2, 2, 2, 2]);
    let boxes = a.program.blocks().iter().find(|b| b.name == "box containment").unwrap();
    assert_eq!(boxes.rows.len(), 3);
}

#[test]
fn quartic_census() {
    let options = SynthesisOptions {
        sos_convexity: false,
        ..Default::default()
    };
    let a = assemble(&SynthesisProblem::benchmark(TemplateSpec::Polyset { degree: 4 }), &options).unwrap();
    // validity (3 vars, half degree 2), invariance (2 reduced vars), four vertex blocks
    assert_eq!(sorted(a.program.psd_sides().to_vec()), vec![3, 3, 3, 3, 3, 6]);
}

#[test]
fn coarse_piecewise_census() {
    let a = assemble(
        &SynthesisProblem::benchmark(TemplateSpec::Piecewise { m1: 4, m2: 3 }),
        &SynthesisOptions::default(),
    )
    .unwrap();
    let TemplateVars::Piecewise { partition, pieces, .. } = &a.vars else {
        panic!("wrong template variables");
    };
    assert_eq!(partition.len(), 8);
    assert_eq!(pieces.len(), 8);
    assert_eq!(partition.adjacency().len(), 12);
}

fn fixed_ellipsoid_scale(q: DMatrix<f64>, vertices: &[Vec<f64>]) -> f64 {
    let mut prog = ConicProgram::new();
    let qv = prog.add_psd(3);
    pin(&mut prog, qv, &q);
    let t = prog.add_nonneg();
    vertex_inclusion(&mut prog, &TemplateVars::Ellipsoid(qv), vertices, t, [0, 1]).unwrap();
    prog.maximize(LinExpr::var(t));
    let sol = solve_reference(&prog, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    recover_gamma(sol.values.unwrap().value(t), 2)
}

#[test]
fn vertex_inclusion_examples() {
    let unit = fixed_ellipsoid_scale(DMatrix::identity(3, 3), &[vec![1.0, 0.0]]);
    assert!((unit - 1.0).abs() < 1e-4);
    let diagonal = fixed_ellipsoid_scale(DMatrix::identity(3, 3), &[vec![1.0, 1.0]]);
    assert!((diagonal - 0.5f64.sqrt()).abs() < 1e-4);
}

#[test]
fn box_containment_examples() {
    let unit_box = vec![[-1.0, 1.0]; 3];
    let ellipsoid = |scale: f64| {
        let mut prog = ConicProgram::new();
        let q = prog.add_psd(3);
        pin(&mut prog, q, &(DMatrix::identity(3, 3) * scale));
        box_containment(&mut prog, &TemplateVars::Ellipsoid(q), &unit_box).unwrap();
        prog
    };
    assert!(feasible(&ellipsoid(1.0)));
    assert!(!feasible(&ellipsoid(1.1)));

    let quartic = |c: f64| {
        let terms = (0..3).map(|i| {
            let coeff = if i == 0 { c } else { 1.0 };
            (ExponentVector::axis(3, i, 4), LinExpr::constant(coeff))
        });
        let p = HomogeneousPolynomial::from_terms(3, 4, terms).unwrap();
        let mut prog = ConicProgram::new();
        prog.add_nonneg();
        box_containment(&mut prog, &TemplateVars::Polyset(p), &unit_box).unwrap();
        prog
    };
    assert!(feasible(&quartic(1.0)));
    assert!(!feasible(&quartic(1.2)));
}

#[test]
fn asymmetric_box_is_rejected() {
    let mut prog = ConicProgram::new();
    let q = prog.add_psd(3);
    let lopsided = vec![[-1.0, 1.0], [-0.5, 1.0], [-1.0, 1.0]];
    assert!(box_containment(&mut prog, &TemplateVars::Ellipsoid(q), &lopsided).is_err());

    let mut problem = SynthesisProblem::benchmark(TemplateSpec::Ellipsoid);
    problem.safe_box = lopsided;
    assert!(matches!(problem.validate(), Err(Error::InvalidProblem(_))));
}

#[test]
fn invalid_problems() {
    let mut problem = SynthesisProblem::benchmark(TemplateSpec::Polyset { degree: 3 });
    assert!(matches!(problem.validate(), Err(Error::OddDegree(3))));
    problem.template = TemplateSpec::Ellipsoid;
    problem.projection_dims = [1, 1];
    assert!(problem.validate().is_err());
    problem.projection_dims = [0, 3];
    assert!(problem.validate().is_err());
    problem.projection_dims = [0, 1];
    problem.inner_polytope = Polytope::new(vec![vec![1.0, 0.0, 0.0]]).unwrap();
    assert!(problem.validate().is_err());
}

#[test]
fn gamma_recovery() {
    assert!((recover_gamma(0.25, 2) - 0.5).abs() < 1e-15);
    assert!((recover_gamma(0.0625, 4) - 0.5).abs() < 1e-15);
    assert_eq!(recover_gamma(-1e-12, 2), 0.0);
}

#[test]
fn continuity_projection() {
    let partition = crate::geometry::sphere_partition(4, 3).unwrap();
    let base = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]);
    let equal = vec![base.clone(); partition.len()];
    let kept = project_continuous(&partition, equal.clone());
    for (a, b) in kept.iter().zip(&equal) {
        assert!((a - b).norm() < 1e-10);
    }

    let jittered: Vec<DMatrix<f64>> = (0..partition.len())
        .map(|i| {
            let mut m = base.clone();
            m[(0, 0)] += 1e-3 * i as f64;
            m
        })
        .collect();
    let fixed = project_continuous(&partition, jittered);
    for adj in partition.adjacency() {
        let jump = adj.basis.transpose() * (&fixed[adj.first] - &fixed[adj.second]) * &adj.basis;
        assert!(jump.amax() < 1e-10);
    }
}

#[test]
fn benchmark_ellipsoid() {
    let r = gamma(&SynthesisProblem::benchmark(TemplateSpec::Ellipsoid));
    assert!((0.79..=0.83).contains(&r.gamma), "{}", r.gamma);
    assert!(r.verified());
}

#[test]
fn quadratic_polyset_matches_ellipsoid() {
    let e = gamma(&SynthesisProblem::benchmark(TemplateSpec::Ellipsoid));
    let p = gamma(&SynthesisProblem::benchmark(TemplateSpec::Polyset { degree: 2 }));
    assert!((e.gamma - p.gamma).abs() <= 1e-4, "{} vs {}", e.gamma, p.gamma);
}

#[test]
fn linear_feedback_is_dominated() {
    let e = gamma(&SynthesisProblem::benchmark(TemplateSpec::Ellipsoid));
    let b = gamma(&SynthesisProblem::benchmark(TemplateSpec::Baseline));
    assert!(b.gamma <= e.gamma + 1e-4, "{} vs {}", b.gamma, e.gamma);
}

#[test]
fn scaled_box_scales_gamma() {
    let one = gamma(&SynthesisProblem::benchmark(TemplateSpec::Ellipsoid));
    let two = gamma(&SynthesisProblem::benchmark(TemplateSpec::Ellipsoid).with_box_scale(2.0));
    assert!((two.gamma - 2.0 * one.gamma).abs() <= 1e-4, "{} vs {}", two.gamma, one.gamma);
    assert!(two.verified());
}

#[test]
fn squared_polyset_keeps_gamma() {
    let options = SynthesisOptions {
        square_from_degree: Some(4),
        ..Default::default()
    };
    let quartic = SynthesisProblem::benchmark(TemplateSpec::Polyset { degree: 4 });
    let squared = solve(&quartic, &Backend::Reference, &options).unwrap();
    let quadratic = gamma(&SynthesisProblem::benchmark(TemplateSpec::Polyset { degree: 2 }));
    assert_eq!(squared.spec, quartic.template);
    assert!((squared.gamma - quadratic.gamma).abs() <= 1e-12);
    assert!(squared.verified());
    match squared.template {
        Some(SetTemplate::Polyset(t)) => assert_eq!(t.polynomial().degree(), 4),
        other => panic!("{other:?}"),
    }
}
