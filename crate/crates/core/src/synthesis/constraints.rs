use crate::conditions::{cone_nonpositivity, sos_constraint_with_basis};
use crate::conic::{ConicProgram, ConstraintBlock, LinExpr, Var};
use crate::error::{Error, Result};
use crate::geometry::cone_generators;
use crate::polynomials::{monomial_basis, power_of_linear_form, ExponentVector};

use super::TemplateVars;

/// Support-function facet test against a box symmetric around the origin.
pub fn box_containment(prog: &mut ConicProgram, vars: &TemplateVars, safe_box: &[[f64; 2]]) -> Result<ConstraintBlock> {
    for (i, &[lo, hi]) in safe_box.iter().enumerate() {
        if (lo + hi).abs() > 1e-12 * hi.abs().max(1.0) || hi <= 0.0 {
            return Err(Error::InvalidProblem(format!(
                "box containment needs a symmetric box, axis {i} is [{lo}, {hi}]"
            )));
        }
    }
    let mark = prog.mark();
    for (i, &[_, b]) in safe_box.iter().enumerate() {
        match vars {
            TemplateVars::Ellipsoid(q) | TemplateVars::Baseline { q, .. } => {
                prog.add_le(&(q.entry(i, i) - LinExpr::constant(b * b)));
            }
            TemplateVars::Polyset(p) => {
                let n = p.num_vars();
                let axis = ExponentVector::axis(n, i, p.degree());
                let coeff = p.coefficient(&axis).cloned().unwrap_or_default();
                prog.add_le(&(coeff - LinExpr::constant(b.powi(p.degree() as i32))));
            }
            TemplateVars::Piecewise { partition, pieces, .. } => {
                let n = partition.dim();
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    let k = partition.find_cone(&e)?;
                    prog.add_le(&(pieces[k].entry(i, i) - LinExpr::constant(b * b)));
                }
            }
        }
    }
    Ok(prog.close_block(mark, "box containment"))
}

/// `t·D ⊆ π(S)` through the support inequality at every vertex of `D`,
/// with `t = γ²` (quadratic templates) or `t = γ^{2d}` (polysets).
pub fn vertex_inclusion(
    prog: &mut ConicProgram,
    vars: &TemplateVars,
    vertices: &[Vec<f64>],
    t: Var,
    dims: [usize; 2],
) -> Result<ConstraintBlock> {
    if let Some(bad) = vertices.iter().find(|v| v.len() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: bad.len(),
        });
    }
    let mark = prog.mark();
    let tx = LinExpr::var(t);
    let planar = |m: &[Vec<LinExpr>], d: &[f64]| -> Vec<Vec<LinExpr>> {
        (0..2)
            .map(|a| (0..2).map(|b| m[dims[a]][dims[b]].clone() - tx.clone() * (d[a] * d[b])).collect())
            .collect()
    };
    for d in vertices {
        match vars {
            TemplateVars::Ellipsoid(q) | TemplateVars::Baseline { q, .. } => {
                prog.add_psd_constraint(&planar(&q.matrix(), d));
            }
            TemplateVars::Polyset(p) => {
                let n = p.num_vars();
                let mut lift = nalgebra::DMatrix::zeros(n, 2);
                lift[(dims[0], 0)] = 1.0;
                lift[(dims[1], 1)] = 1.0;
                let mut q = p.pullback(&lift)?;
                let power = power_of_linear_form(d, p.degree());
                for (mono, c) in power.terms() {
                    q.add_term(mono.clone(), &tx, -c);
                }
                let basis = monomial_basis(2, p.degree() / 2);
                sos_constraint_with_basis(prog, &q, basis.monomials(), "vertex sos")?;
            }
            TemplateVars::Piecewise { partition, pieces, .. } => {
                for (cone, piece) in partition.cones().iter().zip(pieces) {
                    let normals: Vec<Vec<f64>> = cone
                        .facet_normals()
                        .iter()
                        .map(|g| vec![g[dims[0]], g[dims[1]]])
                        .collect();
                    if cone_generators(&normals, 2)?.dim < 2 {
                        continue;
                    }
                    let mut halved = normals;
                    halved.push(d.clone());
                    let rays = cone_generators(&halved, 2)?.ray_matrix(2);
                    // t·ddᵀ − Q̄ ≤ 0 on the slice
                    let m: Vec<Vec<LinExpr>> = planar(&piece.matrix(), d)
                        .into_iter()
                        .map(|row| row.into_iter().map(|e| -e).collect())
                        .collect();
                    cone_nonpositivity(prog, &m, &rays)?;
                }
            }
        }
    }
    Ok(prog.close_block(mark, "vertex inclusion"))
}
