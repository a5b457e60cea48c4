//! Invariance certificates and set-validity constraints compiled into conic
//! program blocks.
//!
//! Matrix-valued unknowns are passed as square lists of affine expressions,
//! so the same routines accept PSD variables, free symmetric matrices or
//! fixed numeric matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::conic::{ConicProgram, ConstraintBlock, LinExpr, PsdVar};
use crate::error::{Error, Result};
use crate::geometry::{cone_generators, ConicPartition};
use crate::polynomials::{monomial_basis, Coefficient, ExponentVector, HomogeneousPolynomial};
use crate::systems::{AlgebraicSystem, ControlSystem};

/// Square matrix of affine expressions.
pub type ExprMatrix = Vec<Vec<LinExpr>>;

pub fn constant_matrix(m: &DMatrix<f64>) -> ExprMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| LinExpr::constant(m[(i, j)])).collect())
        .collect()
}

/// Symmetric matrix of fresh free variables.
pub fn free_symmetric(prog: &mut ConicProgram, n: usize) -> ExprMatrix {
    let mut m = vec![vec![LinExpr::default(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = LinExpr::var(prog.add_free());
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    m
}

/// Matrix of fresh free variables.
pub fn free_matrix(prog: &mut ConicProgram, rows: usize, cols: usize) -> ExprMatrix {
    (0..rows)
        .map(|_| (0..cols).map(|_| LinExpr::var(prog.add_free())).collect())
        .collect()
}

/// `L · M · R` for numeric `L`, `R`.
fn sandwich(l: &DMatrix<f64>, m: &[Vec<LinExpr>], r: &DMatrix<f64>) -> ExprMatrix {
    let inner = m.len();
    let inner_c = m.first().map_or(0, Vec::len);
    let mut lm = vec![vec![LinExpr::default(); inner_c]; l.nrows()];
    for a in 0..l.nrows() {
        for i in 0..inner {
            let c = l[(a, i)];
            if c != 0.0 {
                for j in 0..inner_c {
                    lm[a][j].add_scaled(&m[i][j], c);
                }
            }
        }
    }
    let mut out = vec![vec![LinExpr::default(); r.ncols()]; l.nrows()];
    for a in 0..l.nrows() {
        for j in 0..inner_c {
            for b in 0..r.ncols() {
                let c = r[(j, b)];
                if c != 0.0 {
                    out[a][b].add_scaled(&lm[a][j], c);
                }
            }
        }
    }
    out
}

/// `M + Mᵀ`
fn sym_sum(m: &[Vec<LinExpr>]) -> ExprMatrix {
    let n = m.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i][j].clone() + m[j][i].clone()).collect())
        .collect()
}

fn negate(m: &[Vec<LinExpr>]) -> ExprMatrix {
    m.iter().map(|row| row.iter().map(|e| -e.clone()).collect()).collect()
}

fn add_identity(m: &mut [Vec<LinExpr>], factor: f64) {
    for (i, row) in m.iter_mut().enumerate() {
        row[i].add_constant(factor);
    }
}

fn check_square(m: &[Vec<LinExpr>], n: usize, what: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidProblem(format!("{what} must be {n}×{n}")));
    }
    Ok(())
}

/// `−(CQEᵀ + EQCᵀ) − margin·I ⪰ 0`; nothing is added when `r = 0`.
pub fn ellipsoid_invariance(
    prog: &mut ConicProgram,
    sys: &AlgebraicSystem,
    q: &[Vec<LinExpr>],
    margin: f64,
) -> Result<ConstraintBlock> {
    check_square(q, sys.state_dim(), "Q")?;
    let mark = prog.mark();
    if sys.rank() > 0 {
        let m = sandwich(sys.c(), q, &sys.e().transpose());
        let mut neg = negate(&sym_sum(&m));
        add_identity(&mut neg, -margin);
        prog.add_psd_constraint(&neg);
    }
    Ok(prog.close_block(mark, "ellipsoid invariance"))
}

/// `−(QAᵀ + AQ + YᵀBᵀ + BY) ⪰ 0` with `Y` an `m × n` matrix of expressions.
pub fn ellipsoid_linear_feedback(
    prog: &mut ConicProgram,
    cs: &ControlSystem,
    q: &[Vec<LinExpr>],
    y: &[Vec<LinExpr>],
) -> Result<ConstraintBlock> {
    let n = cs.state_dim();
    check_square(q, n, "Q")?;
    if y.len() != cs.input_dim() || y.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidProblem(format!("Y must be {}×{n}", cs.input_dim())));
    }
    let mark = prog.mark();
    let aq = sandwich(cs.a(), q, &DMatrix::identity(n, n));
    let by = sandwich(cs.b(), y, &DMatrix::identity(n, n));
    let total: ExprMatrix = (0..n)
        .map(|i| (0..n).map(|j| aq[i][j].clone() + by[i][j].clone()).collect())
        .collect();
    prog.add_psd_constraint(&negate(&sym_sum(&total)));
    Ok(prog.close_block(mark, "linear feedback invariance"))
}

/// `−(AᵀP + PA) ⪰ 0`
pub fn autonomous_ellipsoid(prog: &mut ConicProgram, a: &DMatrix<f64>, p: &[Vec<LinExpr>]) -> Result<ConstraintBlock> {
    check_square(p, a.nrows(), "P")?;
    let mark = prog.mark();
    let pa = sandwich(&DMatrix::identity(a.nrows(), a.nrows()), p, a);
    prog.add_psd_constraint(&negate(&sym_sum(&pa)));
    Ok(prog.close_block(mark, "autonomous invariance"))
}

/// `q = m(z)ᵀ G m(z)` with `G ⪰ 0` over the given basis. Every monomial that
/// appears in `q` or in a basis product gets one matching row.
pub fn sos_constraint_with_basis(
    prog: &mut ConicProgram,
    q: &HomogeneousPolynomial<LinExpr>,
    basis: &[ExponentVector],
    name: &str,
) -> Result<(ConstraintBlock, PsdVar)> {
    let mark = prog.mark();
    let g = prog.add_psd(basis.len().max(1));
    let mut rows: BTreeMap<ExponentVector, LinExpr> = BTreeMap::new();
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate().skip(i) {
            let coeff = if i == j { 1.0 } else { 2.0 };
            rows.entry(bi.product(bj))
                .or_default()
                .add_term(g.var(i, j), coeff);
        }
    }
    for (mono, c) in q.terms() {
        rows.entry(mono.clone()).or_default().add_scaled(c, -1.0);
    }
    for row in rows.values() {
        prog.add_eq(row);
    }
    Ok((prog.close_block(mark, name), g))
}

/// SOS certificate for a form of even degree `2k` over `monomial_basis(n, k)`.
pub fn sos_constraint(prog: &mut ConicProgram, q: &HomogeneousPolynomial<LinExpr>) -> Result<(ConstraintBlock, PsdVar)> {
    if q.degree() % 2 == 1 {
        return Err(Error::OddDegree(q.degree()));
    }
    let basis = monomial_basis(q.num_vars(), q.degree() / 2);
    sos_constraint_with_basis(prog, q, basis.monomials(), "sos")
}

/// `(Σ zᵢ²)^k` as a real form of degree `2k`.
pub fn norm_power(num_vars: usize, k: u32) -> HomogeneousPolynomial {
    let mut square = HomogeneousPolynomial::zero(num_vars, 2);
    for i in 0..num_vars {
        square.add_term(ExponentVector::axis(num_vars, i, 2), &1.0, 1.0);
    }
    let mut out = HomogeneousPolynomial::constant(num_vars, 1.0);
    for _ in 0..k {
        out = out.mul_real(&square);
    }
    out
}

/// `q(z) = −⟨z, C (∇p)(Eᵀz)⟩`, a form of degree `deg p` in `r` variables.
pub fn invariance_form(sys: &AlgebraicSystem, p: &HomogeneousPolynomial<LinExpr>) -> Result<HomogeneousPolynomial<LinExpr>> {
    let r = sys.rank();
    let e_t = sys.e().transpose();
    let grads = p.gradient();
    let pulled: Vec<HomogeneousPolynomial<LinExpr>> =
        grads.iter().map(|g| g.pullback(&e_t)).collect::<Result<_>>()?;
    let mut q = HomogeneousPolynomial::zero(r, p.degree());
    for a in 0..r {
        let za = HomogeneousPolynomial::monomial(ExponentVector::axis(r, a, 1), 1.0);
        for (i, gi) in pulled.iter().enumerate() {
            let c = sys.c()[(a, i)];
            if c != 0.0 {
                q.add_scaled(&gi.mul_real(&za), -c)?;
            }
        }
    }
    Ok(q)
}

/// SOS certificate of `−⟨z, C (∇p)(Eᵀz)⟩ − margin·‖z‖^{2d}`.
pub fn polyset_invariance(
    prog: &mut ConicProgram,
    sys: &AlgebraicSystem,
    p: &HomogeneousPolynomial<LinExpr>,
    margin: f64,
) -> Result<ConstraintBlock> {
    if p.num_vars() != sys.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.state_dim(),
            got: p.num_vars(),
        });
    }
    if sys.rank() == 0 {
        let mark = prog.mark();
        return Ok(prog.close_block(mark, "polyset invariance"));
    }
    let mut q = invariance_form(sys, p)?;
    if margin != 0.0 {
        let np = norm_power(sys.rank(), p.degree() / 2).map_coefficients(|c| LinExpr::constant(*c));
        q.add_scaled(&np, -margin)?;
    }
    let basis = monomial_basis(sys.rank(), p.degree() / 2);
    let (block, _) = sos_constraint_with_basis(prog, &q, basis.monomials(), "polyset invariance")?;
    Ok(block)
}

/// Certifies `zᵀMz ≤ 0` on the cone generated by the columns of `rays` through
/// `−RᵀMR = S + N`, `S ⪰ 0`, `N ≥ 0` entrywise (off-diagonal).
pub fn cone_nonpositivity(prog: &mut ConicProgram, m: &[Vec<LinExpr>], rays: &DMatrix<f64>) -> Result<ConstraintBlock> {
    cone_nonpositivity_named(prog, m, rays, "cone nonpositivity")
}

fn cone_nonpositivity_named(
    prog: &mut ConicProgram,
    m: &[Vec<LinExpr>],
    rays: &DMatrix<f64>,
    name: &str,
) -> Result<ConstraintBlock> {
    check_square(m, rays.nrows(), "M")?;
    let mark = prog.mark();
    let k = rays.ncols();
    if k == 0 {
        return Ok(prog.close_block(mark, name));
    }
    let rtmr = sandwich(&rays.transpose(), m, rays);
    let s = prog.add_psd(k);
    for i in 0..k {
        for j in i..k {
            // −(RᵀMR)ᵢⱼ − Sᵢⱼ − Nᵢⱼ = 0
            let mut row = -(rtmr[i][j].clone() + rtmr[j][i].clone()) * 0.5;
            row -= &s.entry(i, j);
            if i != j {
                let n = prog.add_nonneg();
                row.add_term(n, -1.0);
            }
            prog.add_eq(&row);
        }
    }
    Ok(prog.close_block(mark, name))
}

/// Generators (as columns) of `{z : Gᵢ Eᵀ z ≥ 0}` for every cone of the partition.
pub fn pulled_back_generators(sys: &AlgebraicSystem, partition: &ConicPartition) -> Result<Vec<DMatrix<f64>>> {
    let r = sys.rank();
    partition
        .cones()
        .iter()
        .map(|cone| {
            let normals: Vec<Vec<f64>> = cone
                .facet_normals()
                .iter()
                .map(|g| crate::linalg::mat_vec(sys.e(), g))
                .collect();
            Ok(cone_generators(&normals, r)?.ray_matrix(r))
        })
        .collect()
}

/// Per cone `i`: `zᵀ(CQᵢEᵀ + EQᵢCᵀ)z ≤ −margin·‖z‖²` on the pulled-back cone.
/// Cones whose pullback is `{0}` impose nothing.
pub fn piecewise_invariance(
    prog: &mut ConicProgram,
    sys: &AlgebraicSystem,
    partition: &ConicPartition,
    q: &[ExprMatrix],
    margin: f64,
) -> Result<Vec<ConstraintBlock>> {
    if q.len() != partition.len() {
        return Err(Error::InvalidProblem(format!(
            "{} matrices for {} cones",
            q.len(),
            partition.len()
        )));
    }
    if sys.rank() == 0 {
        return Ok(Vec::new());
    }
    let gens = pulled_back_generators(sys, partition)?;
    let mut blocks = Vec::new();
    for (i, (qi, rays)) in q.iter().zip(&gens).enumerate() {
        check_square(qi, sys.state_dim(), "Qᵢ")?;
        if rays.ncols() == 0 {
            log::debug!("cone {i}: pulled-back cone is {{0}}, skipped");
            continue;
        }
        let mut m = sym_sum(&sandwich(sys.c(), qi, &sys.e().transpose()));
        add_identity(&mut m, margin);
        blocks.push(cone_nonpositivity_named(prog, &m, rays, &format!("piecewise invariance, cone {i}"))?);
    }
    Ok(blocks)
}

/// `Bᵀ(Qᵢ − Qⱼ)B = 0` (upper triangle) for every adjacent pair.
pub fn piecewise_continuity(prog: &mut ConicProgram, partition: &ConicPartition, q: &[ExprMatrix]) -> Result<ConstraintBlock> {
    let mark = prog.mark();
    for adj in partition.adjacency() {
        let diff: ExprMatrix = q[adj.first]
            .iter()
            .zip(&q[adj.second])
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        let restricted = sandwich(&adj.basis.transpose(), &diff, &adj.basis);
        let k = restricted.len();
        for i in 0..k {
            for j in i..k {
                prog.add_eq(&((restricted[i][j].clone() + restricted[j][i].clone()) * 0.5));
            }
        }
    }
    Ok(prog.close_block(mark, "piecewise continuity"))
}

/// Gradient-jump condition across facets: `nᵀ(Qⱼ − Qᵢ)r ≥ 0` for each ray `r`
/// of the shared facet, `n` pointing from piece `i` into piece `j`. Together
/// with `Qᵢ ⪰ 0` this makes the squared support function convex.
pub fn piecewise_convexity(prog: &mut ConicProgram, partition: &ConicPartition, q: &[ExprMatrix]) -> Result<ConstraintBlock> {
    let mark = prog.mark();
    let n = partition.dim();
    for adj in partition.adjacency() {
        for ray in &adj.facet_rays {
            let mut e = LinExpr::default();
            for a in 0..n {
                for b in 0..n {
                    let c = adj.normal[a] * ray[b];
                    if c != 0.0 {
                        e.add_scaled(&q[adj.second][a][b], c);
                        e.add_scaled(&q[adj.first][a][b], -c);
                    }
                }
            }
            prog.add_ge(&e);
        }
    }
    Ok(prog.close_block(mark, "piecewise convexity"))
}

/// SOS certificate of the Hessian form `wᵀ∇²p(y)w` in the joint variables `(y, w)`.
pub fn sos_convexity(prog: &mut ConicProgram, p: &HomogeneousPolynomial<LinExpr>) -> Result<ConstraintBlock> {
    let n = p.num_vars();
    if p.degree() < 2 || p.degree() % 2 == 1 {
        return Err(Error::OddDegree(p.degree()));
    }
    let hessian_form = hessian_form(p);
    let y_basis = monomial_basis(n, p.degree() / 2 - 1);
    let mut basis = Vec::with_capacity(y_basis.len() * n);
    for m in y_basis.iter() {
        for j in 0..n {
            let mut e = m.as_slice().to_vec();
            e.extend((0..n).map(|k| u32::from(k == j)));
            basis.push(ExponentVector::new(e));
        }
    }
    let (block, _) = sos_constraint_with_basis(prog, &hessian_form, &basis, "sos convexity")?;
    Ok(block)
}

/// `wᵀ∇²p(y)w` over variables `(y₁..yₙ, w₁..wₙ)`.
pub fn hessian_form<C: Coefficient>(p: &HomogeneousPolynomial<C>) -> HomogeneousPolynomial<C> {
    let n = p.num_vars();
    let mut out = HomogeneousPolynomial::zero(2 * n, p.degree());
    for (a, ga) in p.gradient().iter().enumerate() {
        for (b, gab) in ga.gradient().iter().enumerate() {
            let mut w = vec![0u32; n];
            w[a] += 1;
            w[b] += 1;
            for (mono, c) in gab.terms() {
                let mut e = mono.as_slice().to_vec();
                e.extend_from_slice(&w);
                out.add_term(ExponentVector::new(e), c, 1.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve_reference, SolverOptions, Status};
    use crate::geometry::sphere_partition;
    use crate::systems::{benchmark_system, reduce};

    fn feasible(prog: &ConicProgram) -> bool {
        let sol = solve_reference(prog, &SolverOptions::default()).unwrap();
        match sol.status {
            Status::Optimal => true,
            Status::InfeasibleCertified => false,
            other => panic!("undecided: {other} after {} iterations", sol.iterations),
        }
    }

    fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, v.len() / n, v)
    }

    fn poly(n: usize, terms: &[(Vec<u32>, f64)]) -> HomogeneousPolynomial<LinExpr> {
        let deg = terms[0].0.iter().sum();
        HomogeneousPolynomial::from_terms(n, deg, terms.iter().map(|(e, c)| (e.clone().into(), LinExpr::constant(*c))))
            .unwrap()
    }

    #[test]
    fn ellipsoid_invariance_examples() {
        let stable = AlgebraicSystem::new(DMatrix::identity(2, 2), -DMatrix::identity(2, 2)).unwrap();
        let mut p = ConicProgram::new();
        let block = ellipsoid_invariance(&mut p, &stable, &constant_matrix(&DMatrix::identity(2, 2)), 0.0).unwrap();
        assert_eq!(block.psd.len(), 1);
        assert!(feasible(&p));
        let sol = solve_reference(&p, &SolverOptions::default()).unwrap();
        let x = sol.values.unwrap().psd[0].clone();
        assert!((x - DMatrix::identity(2, 2) * 2.0).amax() < 1e-6);

        let bench = reduce(&benchmark_system());
        let mut p = ConicProgram::new();
        ellipsoid_invariance(&mut p, &bench, &constant_matrix(&DMatrix::identity(3, 3)), 0.0).unwrap();
        assert!(!feasible(&p));

        let full = AlgebraicSystem::new(DMatrix::zeros(0, 3), DMatrix::zeros(0, 3)).unwrap();
        let mut p = ConicProgram::new();
        let block = ellipsoid_invariance(&mut p, &full, &constant_matrix(&DMatrix::identity(3, 3)), 0.0).unwrap();
        assert!(block.is_empty());
    }

    #[test]
    fn linear_feedback_examples() {
        let stable = ControlSystem::new(-DMatrix::identity(2, 2), DMatrix::zeros(2, 1)).unwrap();
        let mut p = ConicProgram::new();
        let q = constant_matrix(&DMatrix::identity(2, 2));
        let y = constant_matrix(&DMatrix::zeros(1, 2));
        ellipsoid_linear_feedback(&mut p, &stable, &q, &y).unwrap();
        assert!(feasible(&p));

        // A = I, B = 0: infeasible for every Q ≻ 0 (normalized by trace Q = 1)
        let unstable = ControlSystem::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 1)).unwrap();
        let mut p = ConicProgram::new();
        let qv = p.add_psd(2);
        let y = free_matrix(&mut p, 1, 2);
        p.add_eq(&(qv.entry(0, 0) + qv.entry(1, 1) - LinExpr::constant(1.0)));
        ellipsoid_linear_feedback(&mut p, &unstable, &qv.matrix(), &y).unwrap();
        assert!(!feasible(&p));
    }

    #[test]
    fn autonomous_examples() {
        let id = constant_matrix(&DMatrix::identity(2, 2));
        for (a, expect) in [
            (-DMatrix::identity(2, 2), true),
            (mat(2, &[0.0, 1.0, 0.0, 0.0]), false),
            (mat(2, &[0.0, 1.0, -1.0, 0.0]), true),
        ] {
            let mut p = ConicProgram::new();
            autonomous_ellipsoid(&mut p, &a, &id).unwrap();
            assert_eq!(feasible(&p), expect, "A = {a}");
        }
    }

    #[test]
    fn sos_examples() {
        let mut p = ConicProgram::new();
        let (_, g) = sos_constraint(&mut p, &poly(2, &[(vec![2, 0], 1.0), (vec![1, 1], -2.0), (vec![0, 2], 1.0)])).unwrap();
        let sol = solve_reference(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        let gram = sol.values.unwrap().matrix(g).clone();
        assert!((gram - mat(2, &[1.0, -1.0, -1.0, 1.0])).amax() < 1e-6);

        let mut p = ConicProgram::new();
        sos_constraint(&mut p, &poly(2, &[(vec![2, 2], 1.0), (vec![4, 0], -1.0)])).unwrap();
        assert!(!feasible(&p));

        let mut p = ConicProgram::new();
        let (_, g) = sos_constraint(&mut p, &poly(1, &[(vec![4], 4.0)])).unwrap();
        let sol = solve_reference(&p, &SolverOptions::default()).unwrap();
        assert!((sol.values.unwrap().matrix(g)[(0, 0)] - 4.0).abs() < 1e-6);

        let mut p = ConicProgram::new();
        assert!(matches!(sos_constraint(&mut p, &poly(1, &[(vec![3], 1.0)])), Err(Error::OddDegree(3))));
    }

    #[test]
    fn polyset_invariance_examples() {
        let contraction = AlgebraicSystem::new(DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -1.0)).unwrap();
        let p = poly(1, &[(vec![4], 1.0)]);
        let q = invariance_form(&contraction, &p).unwrap();
        assert_eq!(q.coefficient(&ExponentVector::new(vec![4])).unwrap().constant_part(), 4.0);
        let mut prog = ConicProgram::new();
        polyset_invariance(&mut prog, &contraction, &p, 0.0).unwrap();
        assert!(feasible(&prog));

        // d = 1 reproduces the quadratic form of the ellipsoid condition
        let sys = reduce(&benchmark_system());
        let qm = mat(3, &[2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 0.7]);
        let mut quad = HomogeneousPolynomial::zero(3, 2);
        for i in 0..3 {
            for j in 0..3 {
                let mut e = vec![0u32; 3];
                e[i] += 1;
                e[j] += 1;
                quad.add_term(e.into(), &LinExpr::constant(qm[(i, j)]), 1.0);
            }
        }
        let form = invariance_form(&sys, &quad).unwrap();
        let m = sys.c() * &qm * sys.e().transpose();
        let expected = -(&m + m.transpose());
        for (z1, z2) in [(1.0, 0.0), (0.3, -0.7), (0.5, 0.5)] {
            let z = [z1, z2];
            let value = form.evaluate_generic(&z).unwrap().constant_part();
            assert!((value - crate::linalg::quad_form(&expected, &z)).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_nonpositivity_examples() {
        let id = DMatrix::identity(2, 2);
        let mut p = ConicProgram::new();
        cone_nonpositivity(&mut p, &constant_matrix(&(-id.clone())), &id).unwrap();
        assert!(feasible(&p));

        for m in [mat(2, &[0.0, 1.0, 1.0, 0.0]), mat(2, &[-1.0, 2.0, 2.0, -1.0])] {
            let mut p = ConicProgram::new();
            cone_nonpositivity(&mut p, &constant_matrix(&m), &id).unwrap();
            assert!(!feasible(&p), "M = {m}");
        }

        let mut p = ConicProgram::new();
        let block = cone_nonpositivity(&mut p, &constant_matrix(&id), &DMatrix::zeros(2, 0)).unwrap();
        assert!(block.is_empty());
    }

    #[test]
    fn whole_space_piece_matches_ellipsoid() {
        let sys = AlgebraicSystem::new(DMatrix::identity(2, 2), mat(2, &[-1.0, 0.5, 0.0, -1.0])).unwrap();
        let part = ConicPartition::whole_space(2);
        for (q, expect) in [(DMatrix::identity(2, 2), true), (mat(2, &[0.01, 0.0, 0.0, 1.0]), false)] {
            let mut p = ConicProgram::new();
            piecewise_invariance(&mut p, &sys, &part, &[constant_matrix(&q)], 0.0).unwrap();
            let mut e = ConicProgram::new();
            ellipsoid_invariance(&mut e, &sys, &constant_matrix(&q), 0.0).unwrap();
            assert_eq!(feasible(&p), expect);
            assert_eq!(feasible(&e), expect);
        }
    }

    #[test]
    fn octahedron_with_equal_pieces() {
        let sys = AlgebraicSystem::new(DMatrix::identity(3, 3), -DMatrix::identity(3, 3)).unwrap();
        let part = sphere_partition(4, 3).unwrap();
        let q = constant_matrix(&DMatrix::identity(3, 3));
        let mut p = ConicProgram::new();
        piecewise_invariance(&mut p, &sys, &part, &vec![q.clone(); 8], 0.0).unwrap();
        piecewise_continuity(&mut p, &part, &vec![q; 8]).unwrap();
        assert!(feasible(&p));
    }

    #[test]
    fn continuity_examples() {
        // two half-spaces split by y₃ = 0
        let upper = crate::geometry::PolyhedralCone::from_parts(vec![], vec![vec![0.0, 0.0, 1.0]]);
        let lower = crate::geometry::PolyhedralCone::from_parts(vec![], vec![vec![0.0, 0.0, -1.0]]);
        let adj = crate::geometry::Adjacency {
            first: 0,
            second: 1,
            basis: mat(3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            normal: vec![0.0, 0.0, -1.0],
            facet_rays: vec![],
        };
        let part = ConicPartition::new(3, vec![upper, lower], vec![adj]);
        let mut p = ConicProgram::new();
        let qa = free_symmetric(&mut p, 3);
        let qb = free_symmetric(&mut p, 3);
        let block = piecewise_continuity(&mut p, &part, &[qa, qb]).unwrap();
        assert_eq!(block.rows.len(), 3);

        // Qᵢ − Qⱼ = e₃vᵀ + ve₃ᵀ vanishes on the facet
        let v = [0.3, -1.2, 0.4];
        let mut d = DMatrix::zeros(3, 3);
        for k in 0..3 {
            d[(2, k)] += v[k];
            d[(k, 2)] += v[k];
        }
        let base = mat(3, &[2.0, 0.1, 0.0, 0.1, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let mut p = ConicProgram::new();
        piecewise_continuity(&mut p, &part, &[constant_matrix(&(&base + &d)), constant_matrix(&base)]).unwrap();
        for row in p.rows() {
            assert!(row.terms.is_empty() && row.rhs.abs() < 1e-15);
        }
    }

    #[test]
    fn sos_convexity_examples() {
        let square = poly(2, &[(vec![4, 0], 1.0), (vec![2, 2], 2.0), (vec![0, 4], 1.0)]);
        let separable = poly(2, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]);
        let saddle = poly(2, &[(vec![4, 0], 1.0), (vec![2, 2], -2.0), (vec![0, 4], 1.0)]);
        for (p, expect) in [(square, true), (separable, true), (saddle, false)] {
            let mut prog = ConicProgram::new();
            sos_convexity(&mut prog, &p).unwrap();
            assert_eq!(feasible(&prog), expect, "{p:?}");
        }
        // the Hessian form of (y₁² − y₂²)² is −4 at y = e₁, w = e₂
        let h = hessian_form(&poly(2, &[(vec![4, 0], 1.0), (vec![2, 2], -2.0), (vec![0, 4], 1.0)]));
        let v = h.evaluate_generic(&[1.0, 0.0, 0.0, 1.0]).unwrap().constant_part();
        assert!((v + 4.0).abs() < 1e-12);
    }
}
