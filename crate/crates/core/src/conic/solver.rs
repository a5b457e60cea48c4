//! Operator-splitting reference solver.
//!
//! ADMM on `min c̃ᵀx s.t. Ax = b, x ∈ K` with the splitting `x` (affine set)
//! and `z` (cone). PSD blocks are handled in the isometric `svec` space; the
//! affine projection uses a dense Cholesky factor of `AAᵀ` over a maximal set of
//! linearly independent rows.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::expr::Var;
use super::program::{Assignment, ConicProgram};
use crate::error::Result;
use crate::parallel::Execution;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    /// Certified infeasible: inconsistent equalities or a Farkas certificate.
    InfeasibleCertified,
    /// Stopped at the iteration limit with residuals within 1000× tolerance.
    Inaccurate,
    IterationLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::InfeasibleCertified => "infeasible-certified",
            Status::Inaccurate => "inaccurate",
            Status::IterationLimit => "iteration-limit",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// Absent only for certified infeasible programs.
    pub values: Option<Assignment>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub cone_violation: f64,
    pub iterations: usize,
    /// Fixed-point residual per iteration, when requested.
    pub trace: Vec<f64>,
}

impl Solution {
    pub fn infeasible(primal_residual: f64, iterations: usize) -> Self {
        Self {
            status: Status::InfeasibleCertified,
            values: None,
            objective: f64::NAN,
            primal_residual,
            dual_residual: f64::NAN,
            gap: f64::NAN,
            cone_violation: 0.0,
            iterations,
            trace: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Over-relaxation factor in (0, 2).
    pub alpha: f64,
    pub rho: f64,
    pub adaptive_rho: bool,
    /// Anderson acceleration memory; `0` runs plain ADMM.
    pub anderson_memory: usize,
    pub record_trace: bool,
    /// How PSD block projections are distributed.
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            alpha: 1.5,
            rho: 1.0,
            adaptive_rho: true,
            anderson_memory: 10,
            record_trace: false,
            execution: Execution::default(),
        }
    }
}

/// Variable layout of the flat solver vector `[free | nonneg | svec blocks]`.
struct Layout {
    free: usize,
    nonneg: usize,
    blocks: Vec<(usize, usize)>,
    n: usize,
}

impl Layout {
    fn new(prog: &ConicProgram) -> Self {
        let free = prog.num_free();
        let nonneg = prog.num_nonneg();
        let mut offset = free + nonneg;
        let mut blocks = Vec::new();
        for &k in prog.psd_sides() {
            blocks.push((offset, k));
            offset += k * (k + 1) / 2;
        }
        Self {
            free,
            nonneg,
            blocks,
            n: offset,
        }
    }

    /// Flat index and the factor converting an entry-space coefficient to svec space.
    fn index(&self, v: Var) -> (usize, f64) {
        match v {
            Var::Free(k) => (k, 1.0),
            Var::Nonneg(k) => (self.free + k, 1.0),
            Var::Psd { block, i, j } => {
                let (offset, side) = self.blocks[block];
                (offset + svec_index(side, i, j), if i == j { 1.0 } else { 1.0 / SQRT2 })
            }
        }
    }

    fn assignment(&self, prog: &ConicProgram, x: &[f64]) -> Assignment {
        let mut out = Assignment::zeros(prog);
        out.free.copy_from_slice(&x[..self.free]);
        out.nonneg
            .copy_from_slice(&x[self.free..self.free + self.nonneg]);
        for (b, &(offset, side)) in self.blocks.iter().enumerate() {
            out.psd[b] = smat(&x[offset..offset + side * (side + 1) / 2], side);
        }
        out
    }
}

/// Position of `(i, j)`, `i <= j`, in the row-major upper triangle.
fn svec_index(side: usize, i: usize, j: usize) -> usize {
    i * side - i * (i + 1) / 2 + j
}

fn smat(v: &[f64], side: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for i in 0..side {
        for j in i..side {
            let val = if i == j { v[k] } else { v[k] / SQRT2 };
            m[(i, j)] = val;
            m[(j, i)] = val;
            k += 1;
        }
    }
    m
}

fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let side = m.nrows();
    let mut k = 0;
    for i in 0..side {
        for j in i..side {
            out[k] = if i == j { m[(i, j)] } else { SQRT2 * m[(i, j)] };
            k += 1;
        }
    }
}

const EQUILIBRATION_SWEEPS: usize = 10;
/// Largest residual growth accepted from an extrapolated step.
const ANDERSON_SAFEGUARD: f64 = 1.0;
/// Bound on the extrapolation length relative to the current step.
const ANDERSON_MAX_CORRECTION: f64 = 100.0;

/// Euclidean projection of a symmetric matrix onto the PSD cone.
pub fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = crate::linalg::symmetric_eigen(sym);
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return (m + m.transpose()) * 0.5;
    }
    let clamped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&clamped) * v.transpose();
    out = (&out + out.transpose()) * 0.5;
    out
}

/// Row-compressed sparse matrix.
struct Csr {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn rows(&self) -> usize {
        self.ptr.len() - 1
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.ptr[r]..self.ptr[r + 1]).map(move |k| (self.idx[k], self.val[k]))
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    fn mul_t_sub(&self, w: &[f64], out: &mut [f64]) {
        for (r, &wr) in w.iter().enumerate() {
            if wr != 0.0 {
                for (c, v) in self.row(r) {
                    out[c] -= v * wr;
                }
            }
        }
    }
}

/// Affine projection data over the independent rows.
struct Affine {
    a: Csr,
    b: Vec<f64>,
    chol: DMatrix<f64>,
}

impl Affine {
    /// `w = (AAᵀ)⁻¹ (A v − b)`
    fn multiplier(&self, v: &[f64]) -> DVector<f64> {
        let mut r = vec![0.0; self.a.rows()];
        self.a.mul(v, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        let mut w = DVector::from_vec(r);
        self.chol.solve_lower_triangular_mut(&mut w);
        self.chol.tr_solve_lower_triangular_mut(&mut w);
        w
    }

    fn project(&self, v: &[f64], out: &mut [f64]) -> DVector<f64> {
        let w = self.multiplier(v);
        out.copy_from_slice(v);
        self.a.mul_t_sub(w.as_slice(), out);
        w
    }
}

/// Scaled rows in svec coordinates; empty rows are kept for the consistency check.
fn scaled_rows(prog: &ConicProgram, layout: &Layout) -> (Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let mut rows = Vec::with_capacity(prog.rows().len());
    let mut rhs = Vec::with_capacity(prog.rows().len());
    for row in prog.rows() {
        let mut terms: Vec<(usize, f64)> = row
            .terms
            .iter()
            .map(|(v, c)| {
                let (k, s) = layout.index(*v);
                (k, c * s)
            })
            .collect();
        terms.sort_by_key(|t| t.0);
        let norm = terms.iter().map(|t| t.1 * t.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            terms.iter_mut().for_each(|t| t.1 /= norm);
            rhs.push(row.rhs / norm);
        } else {
            rhs.push(row.rhs);
        }
        rows.push(terms);
    }
    (rows, rhs)
}

/// Ruiz-style column equilibration in place, one factor per scalar variable
/// and a shared factor per PSD block so the cone is preserved. Rows are
/// renormalized after every sweep. Returns `d` with `x = d ⊙ x̃`.
fn equilibrate(rows: &mut [Vec<(usize, f64)>], rhs: &mut [f64], layout: &Layout) -> Vec<f64> {
    let n = layout.n;
    let mut d = vec![1.0; n];
    for _ in 0..EQUILIBRATION_SWEEPS {
        let mut sq = vec![0.0; n];
        for terms in rows.iter() {
            for &(c, v) in terms {
                sq[c] += v * v;
            }
        }
        let mut factor: Vec<f64> = sq
            .iter()
            .map(|&s| if s > 0.0 { 1.0 / s.sqrt().sqrt() } else { 1.0 })
            .collect();
        for &(offset, side) in &layout.blocks {
            let cols = &sq[offset..offset + side * (side + 1) / 2];
            let used: Vec<f64> = cols.iter().copied().filter(|&s| s > 0.0).collect();
            let f = if used.is_empty() {
                1.0
            } else {
                1.0 / (used.iter().sum::<f64>() / used.len() as f64).sqrt().sqrt()
            };
            factor[offset..offset + cols.len()].fill(f);
        }
        for (dk, fk) in d.iter_mut().zip(factor.iter_mut()) {
            let clamped = (*dk * *fk).clamp(1e-4, 1e4);
            *fk = clamped / *dk;
            *dk = clamped;
        }
        for (terms, b) in rows.iter_mut().zip(rhs.iter_mut()) {
            terms.iter_mut().for_each(|t| t.1 *= factor[t.0]);
            let norm = terms.iter().map(|t| t.1 * t.1).sum::<f64>().sqrt();
            if norm > 0.0 {
                terms.iter_mut().for_each(|t| t.1 /= norm);
                *b /= norm;
            }
        }
    }
    d
}

/// Selects independent rows (incremental Cholesky of the Gram matrix).
fn independent_rows(rows: &[Vec<(usize, f64)>], n: usize) -> (Vec<usize>, DMatrix<f64>) {
    let m = rows.len();
    // column -> (row, value) lists for the sparse Gram product
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, terms) in rows.iter().enumerate() {
        for &(c, v) in terms {
            cols[c].push((r, v));
        }
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for col in &cols {
        for &(r1, v1) in col {
            for &(r2, v2) in col {
                gram[(r1, r2)] += v1 * v2;
            }
        }
    }
    let mut kept: Vec<usize> = Vec::new();
    let mut l_rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        if gram[(i, i)] <= 0.0 {
            continue;
        }
        let k = kept.len();
        let mut l = vec![0.0; k + 1];
        for a in 0..k {
            let mut s = gram[(i, kept[a])];
            for (b, lb) in l.iter().enumerate().take(a) {
                s -= l_rows[a][b] * lb;
            }
            l[a] = s / l_rows[a][a];
        }
        let d = gram[(i, i)] - l[..k].iter().map(|x| x * x).sum::<f64>();
        if d > 1e-9 * gram[(i, i)] {
            l[k] = d.sqrt();
            l_rows.push(l);
            kept.push(i);
        }
    }
    let k = kept.len();
    let chol = DMatrix::from_fn(k, k, |i, j| if j <= i { l_rows[i][j] } else { 0.0 });
    (kept, chol)
}

fn csr_from(rows: &[Vec<(usize, f64)>], which: &[usize]) -> Csr {
    let mut ptr = vec![0];
    let mut idx = Vec::new();
    let mut val = Vec::new();
    for &r in which {
        for &(c, v) in &rows[r] {
            idx.push(c);
            val.push(v);
        }
        ptr.push(idx.len());
    }
    Csr { ptr, idx, val }
}

/// Projects the flat vector onto `ℝᶠ × ℝ₊ˡ × S₊ × …` in place.
fn project_cone(layout: &Layout, v: &mut [f64], exec: Execution) {
    for x in &mut v[layout.free..layout.free + layout.nonneg] {
        *x = x.max(0.0);
    }
    let projected: Vec<Vec<f64>> = exec.map(&layout.blocks, |&(offset, side)| {
        let len = side * (side + 1) / 2;
        let m = smat(&v[offset..offset + len], side);
        let p = project_psd(&m);
        let mut out = vec![0.0; len];
        svec_into(&p, &mut out);
        out
    });
    for (&(offset, _), p) in layout.blocks.iter().zip(projected) {
        v[offset..offset + p.len()].copy_from_slice(&p);
    }
}

/// Largest violation of membership in the dual cone `{0}ᶠ × ℝ₊ˡ × S₊ × …`.
fn dual_cone_violation(layout: &Layout, s: &[f64]) -> f64 {
    let mut worst = inf_norm(&s[..layout.free]);
    for x in &s[layout.free..layout.free + layout.nonneg] {
        worst = worst.max(-x);
    }
    for &(offset, side) in &layout.blocks {
        let m = smat(&s[offset..offset + side * (side + 1) / 2], side);
        worst = worst.max(-crate::linalg::min_eigenvalue(&m));
    }
    worst
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `prog` with the reference ADMM solver.
pub fn solve_reference(prog: &ConicProgram, options: &SolverOptions) -> Result<Solution> {
    prog.validate()?;
    let layout = Layout::new(prog);
    let n = layout.n;
    let (mut rows, mut rhs) = scaled_rows(prog, &layout);
    let d = equilibrate(&mut rows, &mut rhs, &layout);
    let (kept, chol) = independent_rows(&rows, n);
    let affine = Affine {
        a: csr_from(&rows, &kept),
        b: kept.iter().map(|&r| rhs[r]).collect(),
        chol,
    };

    // minimum-norm solution of the kept rows, then a consistency check on all rows
    let zero = vec![0.0; n];
    let mut x0 = vec![0.0; n];
    affine.project(&zero, &mut x0);
    let inconsistency = rows
        .iter()
        .zip(&rhs)
        .map(|(terms, b)| (terms.iter().map(|&(c, v)| v * x0[c]).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    if inconsistency > 1e-7 * (1.0 + inf_norm(&rhs)) {
        return Ok(Solution::infeasible(inconsistency, 0));
    }

    // minimize c̃ = -c
    let mut c = vec![0.0; n];
    for (v, coeff) in prog.objective().terms() {
        let (k, s) = layout.index(v);
        c[k] -= coeff * s * d[k];
    }

    let mut rho = options.rho;
    let alpha = options.alpha;
    let mut x = vec![0.0; n];
    let mut v = vec![0.0; n];
    // ADMM state `[z | u]`; `next` receives one operator step
    let mut state = vec![0.0; 2 * n];
    let mut next = vec![0.0; 2 * n];
    let mut anderson = Anderson::new(options.anderson_memory);
    // plain step kept while an extrapolated point is on trial, with its residual
    let mut fallback: Option<(Vec<f64>, f64)> = None;
    let mut w_prev: Option<DVector<f64>> = None;
    let mut trace = Vec::new();
    let eps_abs = options.eps_abs;
    let eps_rel = options.eps_rel;

    let mut residuals = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut status = Status::IterationLimit;
    let mut iterations = 0;
    for iter in 1..=options.max_iter {
        iterations = iter;
        let (z, u) = state.split_at(n);
        for k in 0..n {
            v[k] = z[k] - u[k] - c[k] / rho;
        }
        let w = affine.project(&v, &mut x);
        let (z_new, u_new) = next.split_at_mut(n);
        for k in 0..n {
            v[k] = alpha * x[k] + (1.0 - alpha) * z[k] + u[k];
        }
        z_new.copy_from_slice(&v);
        project_cone(&layout, z_new, options.execution);
        for k in 0..n {
            u_new[k] = v[k] - z_new[k];
        }
        let step = state
            .iter()
            .zip(&next)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();

        // an extrapolated point that made the residual grow is replaced by the plain step
        if let Some((plain, plain_step)) = fallback.take() {
            if !(step <= ANDERSON_SAFEGUARD * plain_step) {
                state = plain;
                anderson.reset();
                w_prev = None;
                continue;
            }
        }
        if options.record_trace {
            trace.push(step);
        }

        let (z, _) = state.split_at(n);
        let (z_new, u_new) = next.split_at(n);
        let check = iter % 10 == 0 || iter == options.max_iter;
        if check {
            let pres = (0..n).map(|k| (x[k] - z_new[k]).abs()).fold(0.0, f64::max);
            let dres = rho * (0..n).map(|k| (z_new[k] - z[k]).abs()).fold(0.0, f64::max);
            let primal_obj = dot(&c, z_new);
            let dual_obj = -rho * dot(&affine.b, w.as_slice());
            let gap = (primal_obj - dual_obj).abs();
            let scale_p = inf_norm(&x).max(inf_norm(z_new));
            let scale_d = rho * inf_norm(u_new);
            let pres_n = pres / (eps_abs + eps_rel * scale_p);
            let dres_n = dres / (eps_abs + eps_rel * scale_d);
            let gap_n = gap / (eps_abs + eps_rel * primal_obj.abs().max(dual_obj.abs()));
            residuals = (pres, dres, gap);
            if pres_n <= 1.0 && dres_n <= 1.0 && gap_n <= 1.0 {
                status = Status::Optimal;
                state.copy_from_slice(&next);
                break;
            }

            // infeasibility: the multiplier increment approximates a Farkas direction
            if iter >= 200 && iter % 50 == 0 {
                if let Some(wp) = &w_prev {
                    let dy: Vec<f64> = (w.clone() - wp).iter().map(|d| d * rho).collect();
                    if farkas_certificate(&affine, &layout, &dy) {
                        let mut sol = Solution::infeasible(pres, iter);
                        sol.trace = trace;
                        return Ok(sol);
                    }
                }
            }

            if options.adaptive_rho && iter % 50 == 0 {
                let ratio = ((pres / scale_p.max(1e-12)) / (dres / scale_d.max(1e-12)).max(1e-300)).sqrt();
                if !(0.2..=5.0).contains(&ratio) && ratio.is_finite() {
                    let new_rho = (rho * ratio).clamp(1e-6, 1e6);
                    let f = rho / new_rho;
                    next[n..].iter_mut().for_each(|ui| *ui *= f);
                    rho = new_rho;
                    anderson.reset();
                    state.copy_from_slice(&next);
                    w_prev = None;
                    continue;
                }
            }
        }
        w_prev = Some(w);

        // the step into a Farkas check stays plain so multiplier increments are comparable
        let extrapolated = if iter % 50 == 49 { None } else { anderson.extrapolate(&state, &next) };
        match extrapolated {
            Some(accelerated) => {
                fallback = Some((next.clone(), step));
                state = accelerated;
            }
            None => state.copy_from_slice(&next),
        }
    }

    if status != Status::Optimal {
        state.copy_from_slice(&next);
        let (pres, dres, gap) = residuals;
        let (z, u) = state.split_at(n);
        let scale_p = inf_norm(&x).max(inf_norm(z));
        let loose = 1000.0;
        let obj = dot(&c, z).abs();
        if pres <= loose * (eps_abs + eps_rel * scale_p)
            && dres <= loose * (eps_abs + eps_rel * rho * inf_norm(u))
            && gap <= loose * (eps_abs + eps_rel * obj)
        {
            status = Status::Inaccurate;
        }
    }

    let z = &state[..n];
    let unscaled: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi * di).collect();
    let values = layout.assignment(prog, &unscaled);
    let objective = values.eval(prog.objective());
    Ok(Solution {
        status,
        values: Some(values),
        objective,
        primal_residual: residuals.0,
        dual_residual: residuals.1,
        gap: residuals.2,
        cone_violation: 0.0,
        iterations,
        trace,
    })
}

/// Type-II Anderson acceleration over the last `memory` operator steps.
struct Anderson {
    memory: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    ds: VecDeque<Vec<f64>>,
    dg: VecDeque<Vec<f64>>,
}

impl Anderson {
    fn new(memory: usize) -> Self {
        Self {
            memory,
            prev: None,
            ds: VecDeque::new(),
            dg: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        self.prev = None;
        self.ds.clear();
        self.dg.clear();
    }

    /// Given `s` and `T(s)`, returns the extrapolated next point, if any.
    fn extrapolate(&mut self, s: &[f64], ts: &[f64]) -> Option<Vec<f64>> {
        if self.memory == 0 {
            return None;
        }
        let g: Vec<f64> = ts.iter().zip(s).map(|(a, b)| a - b).collect();
        if let Some((sp, gp)) = self.prev.take() {
            self.ds.push_back(s.iter().zip(&sp).map(|(a, b)| a - b).collect());
            self.dg.push_back(g.iter().zip(&gp).map(|(a, b)| a - b).collect());
            if self.ds.len() > self.memory {
                self.ds.pop_front();
                self.dg.pop_front();
            }
        }
        self.prev = Some((s.to_vec(), g.clone()));
        let m = self.dg.len();
        if m == 0 {
            return None;
        }
        let mut gram = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            rhs[i] = dot(&self.dg[i], &g);
            for j in i..m {
                let v = dot(&self.dg[i], &self.dg[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let reg = 1e-10 * gram.trace().max(f64::MIN_POSITIVE);
        for i in 0..m {
            gram[(i, i)] += reg;
        }
        let gamma = gram.cholesky()?.solve(&rhs);
        let mut out = ts.to_vec();
        for (j, gj) in gamma.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o -= gj * (self.ds[j][k] + self.dg[j][k]);
            }
        }
        // a correction much longer than the residual is an ill-conditioned fit
        let correction = out.iter().zip(ts).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let residual = dot(&g, &g).sqrt();
        (correction <= ANDERSON_MAX_CORRECTION * residual).then_some(out)
    }
}

/// Checks whether `±y` is an approximate Farkas certificate: `Aᵀy ∈ K*` up to
/// `1e-8 · |bᵀy|` and `bᵀy < 0`.
fn farkas_certificate(affine: &Affine, layout: &Layout, y: &[f64]) -> bool {
    if !y.iter().all(|v| v.is_finite()) || inf_norm(y) == 0.0 {
        return false;
    }
    let mut neg_s = vec![0.0; layout.n];
    affine.a.mul_t_sub(y, &mut neg_s);
    let by = dot(&affine.b, y);
    for sign in [1.0, -1.0] {
        let margin = -sign * by;
        if margin <= 0.0 {
            continue;
        }
        let s: Vec<f64> = neg_s.iter().map(|x| -sign * x).collect();
        if dual_cone_violation(layout, &s) <= 1e-8 * margin {
            return true;
        }
    }
    false
}
