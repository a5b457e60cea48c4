use std::ops::Range;

use nalgebra::DMatrix;

use super::expr::{LinExpr, Var};
use crate::error::{Error, Result};

/// Handle to a symmetric PSD matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PsdVar {
    block: usize,
    side: usize,
}

impl PsdVar {
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn var(&self, i: usize, j: usize) -> Var {
        assert!(i < self.side && j < self.side, "entry ({i}, {j}) outside a {0}×{0} block", self.side);
        Var::psd(self.block, i, j)
    }

    pub fn entry(&self, i: usize, j: usize) -> LinExpr {
        LinExpr::var(self.var(i, j))
    }

    /// The whole matrix as expressions.
    pub fn matrix(&self) -> Vec<Vec<LinExpr>> {
        (0..self.side)
            .map(|i| (0..self.side).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

/// Equality row `Σ coeff · var = rhs`, terms sorted by variable.
#[derive(Clone, Debug, PartialEq)]
pub struct EqRow {
    pub terms: Vec<(Var, f64)>,
    pub rhs: f64,
}

impl EqRow {
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().fold(0.0, |a, (_, c)| a.max(c.abs()))
    }
}

/// Named slice of a program: the variables and rows added by one certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintBlock {
    pub name: String,
    pub rows: Range<usize>,
    pub free: Range<usize>,
    pub nonneg: Range<usize>,
    pub psd: Range<usize>,
}

impl ConstraintBlock {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.free.is_empty() && self.nonneg.is_empty() && self.psd.is_empty()
    }
}

/// Position in a program's variable and row lists; see [`ConicProgram::mark`].
#[derive(Clone, Copy, Debug)]
pub struct Mark {
    rows: usize,
    free: usize,
    nonneg: usize,
    psd: usize,
}

/// `maximize ⟨c, x⟩ subject to A x = b, x ∈ ℝᶠ × ℝ₊ˡ × S₊^{k₁} × …`.
#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    num_free: usize,
    num_nonneg: usize,
    psd_sides: Vec<usize>,
    rows: Vec<EqRow>,
    objective: LinExpr,
    blocks: Vec<ConstraintBlock>,
}

impl PartialEq for ConicProgram {
    /// Same variables, rows and objective; block provenance is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.num_free == other.num_free
            && self.num_nonneg == other.num_nonneg
            && self.psd_sides == other.psd_sides
            && self.rows == other.rows
            && self.objective == other.objective
    }
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn num_nonneg(&self) -> usize {
        self.num_nonneg
    }

    pub fn psd_sides(&self) -> &[usize] {
        &self.psd_sides
    }

    pub fn psd_var(&self, block: usize) -> PsdVar {
        PsdVar {
            block,
            side: self.psd_sides[block],
        }
    }

    pub fn rows(&self) -> &[EqRow] {
        &self.rows
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn blocks(&self) -> &[ConstraintBlock] {
        &self.blocks
    }

    /// Number of scalar unknowns (PSD blocks counted by their upper triangle).
    pub fn num_scalars(&self) -> usize {
        self.num_free + self.num_nonneg + self.psd_sides.iter().map(|k| k * (k + 1) / 2).sum::<usize>()
    }

    pub fn add_free(&mut self) -> Var {
        self.num_free += 1;
        Var::Free(self.num_free - 1)
    }

    pub fn add_nonneg(&mut self) -> Var {
        self.num_nonneg += 1;
        Var::Nonneg(self.num_nonneg - 1)
    }

    pub fn add_psd(&mut self, side: usize) -> PsdVar {
        assert!(side >= 1, "PSD blocks need side >= 1");
        self.psd_sides.push(side);
        PsdVar {
            block: self.psd_sides.len() - 1,
            side,
        }
    }

    /// `expr = 0`. Identically zero expressions are dropped.
    pub fn add_eq(&mut self, expr: &LinExpr) {
        if expr.is_constant() && expr.constant_part() == 0.0 {
            return;
        }
        self.rows.push(EqRow {
            terms: expr.terms().collect(),
            rhs: -expr.constant_part(),
        });
    }

    /// `expr ≥ 0` through a nonnegative slack.
    pub fn add_ge(&mut self, expr: &LinExpr) {
        let mut terms = expr.terms();
        if let (Some((Var::Nonneg(_), c)), None) = (terms.next(), terms.next()) {
            if c > 0.0 && expr.constant_part() == 0.0 {
                return;
            }
        }
        let s = self.add_nonneg();
        let mut row = expr.clone();
        row.add_term(s, -1.0);
        self.add_eq(&row);
    }

    /// `expr ≤ 0`
    pub fn add_le(&mut self, expr: &LinExpr) {
        self.add_ge(&(-expr.clone()));
    }

    /// `M ⪰ 0` for a symmetric matrix of expressions (upper triangle is used).
    /// Returns the PSD slack block equal to `M`, or `None` for an empty matrix.
    pub fn add_psd_constraint(&mut self, m: &[Vec<LinExpr>]) -> Option<PsdVar> {
        let side = m.len();
        if side == 0 {
            return None;
        }
        let x = self.add_psd(side);
        for i in 0..side {
            for j in i..side {
                let mut row = x.entry(i, j);
                row -= &m[i][j];
                self.add_eq(&row);
            }
        }
        Some(x)
    }

    /// Sets the objective to maximize.
    pub fn maximize(&mut self, expr: LinExpr) {
        self.objective = expr;
    }

    pub fn mark(&self) -> Mark {
        Mark {
            rows: self.rows.len(),
            free: self.num_free,
            nonneg: self.num_nonneg,
            psd: self.psd_sides.len(),
        }
    }

    /// Records everything added since `mark` as a named block.
    pub fn close_block(&mut self, mark: Mark, name: impl Into<String>) -> ConstraintBlock {
        let block = ConstraintBlock {
            name: name.into(),
            rows: mark.rows..self.rows.len(),
            free: mark.free..self.num_free,
            nonneg: mark.nonneg..self.num_nonneg,
            psd: mark.psd..self.psd_sides.len(),
        };
        self.blocks.push(block.clone());
        block
    }

    /// Checks that every referenced variable exists.
    pub fn validate(&self) -> Result<()> {
        let check = |v: Var| -> Result<()> {
            let ok = match v {
                Var::Free(k) => k < self.num_free,
                Var::Nonneg(k) => k < self.num_nonneg,
                Var::Psd { block, i, j } => {
                    block < self.psd_sides.len() && i <= j && j < self.psd_sides[block]
                }
            };
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidProblem(format!("reference to missing variable {v}")))
            }
        };
        for row in &self.rows {
            for w in row.terms.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::InvalidProblem("row terms unsorted or duplicated".into()));
                }
            }
            for (v, _) in &row.terms {
                check(*v)?;
            }
        }
        for (v, _) in self.objective.terms() {
            check(v)?;
        }
        Ok(())
    }

    /// Builds a program from raw parts, validating variable references.
    pub fn from_parts(
        num_free: usize,
        num_nonneg: usize,
        psd_sides: Vec<usize>,
        rows: Vec<EqRow>,
        objective: LinExpr,
    ) -> Result<Self> {
        if psd_sides.contains(&0) {
            return Err(Error::InvalidProblem("PSD block of side 0".into()));
        }
        let prog = Self {
            num_free,
            num_nonneg,
            psd_sides,
            rows,
            objective,
            blocks: Vec::new(),
        };
        prog.validate()?;
        Ok(prog)
    }
}

/// Values of all program variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub free: Vec<f64>,
    pub nonneg: Vec<f64>,
    pub psd: Vec<DMatrix<f64>>,
}

impl Assignment {
    pub fn zeros(prog: &ConicProgram) -> Self {
        Self {
            free: vec![0.0; prog.num_free()],
            nonneg: vec![0.0; prog.num_nonneg()],
            psd: prog.psd_sides().iter().map(|&k| DMatrix::zeros(k, k)).collect(),
        }
    }

    pub fn value(&self, v: Var) -> f64 {
        match v {
            Var::Free(k) => self.free[k],
            Var::Nonneg(k) => self.nonneg[k],
            Var::Psd { block, i, j } => self.psd[block][(i, j)],
        }
    }

    pub fn set(&mut self, v: Var, value: f64) {
        match v {
            Var::Free(k) => self.free[k] = value,
            Var::Nonneg(k) => self.nonneg[k] = value,
            Var::Psd { block, i, j } => {
                self.psd[block][(i, j)] = value;
                self.psd[block][(j, i)] = value;
            }
        }
    }

    pub fn eval(&self, expr: &LinExpr) -> f64 {
        expr.evaluate(|v| self.value(v))
    }

    pub fn matrix(&self, x: PsdVar) -> &DMatrix<f64> {
        &self.psd[x.block()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_record_their_slice() {
        let mut p = ConicProgram::new();
        let t = p.add_nonneg();
        let mark = p.mark();
        let one_minus_t = LinExpr::constant(1.0) - LinExpr::var(t);
        p.add_psd_constraint(&[vec![one_minus_t]]);
        let block = p.close_block(mark, "bound");
        assert_eq!(block.rows, 0..1);
        assert_eq!(block.psd, 0..1);
        assert!(block.nonneg.is_empty());
        assert!(p.validate().is_ok());
    }

    #[test]
    fn trivial_nonneg_inequality_needs_no_slack() {
        let mut p = ConicProgram::new();
        let t = p.add_nonneg();
        p.add_ge(&LinExpr::var(t));
        assert_eq!(p.num_nonneg(), 1);
        assert!(p.rows().is_empty());
        p.add_le(&LinExpr::var(t));
        assert_eq!(p.num_nonneg(), 2);
        assert_eq!(p.rows().len(), 1);
    }

    #[test]
    fn missing_variables_are_rejected() {
        let rows = vec![EqRow {
            terms: vec![(Var::Free(3), 1.0)],
            rhs: 0.0,
        }];
        assert!(ConicProgram::from_parts(1, 0, vec![], rows, LinExpr::default()).is_err());
    }
}
