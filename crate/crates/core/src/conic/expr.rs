use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::polynomials::Coefficient;

/// Scalar decision variable of a [`super::ConicProgram`].
///
/// PSD entries are addressed by their upper-triangle position `(block, i, j)`,
/// `i <= j`, and stand for the matrix entry itself (no √2 scaling).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Free(usize),
    Nonneg(usize),
    Psd { block: usize, i: usize, j: usize },
}

impl Var {
    pub fn psd(block: usize, i: usize, j: usize) -> Self {
        Var::Psd {
            block,
            i: i.min(j),
            j: i.max(j),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Free(k) => write!(f, "free[{k}]"),
            Var::Nonneg(k) => write!(f, "nonneg[{k}]"),
            Var::Psd { block, i, j } => write!(f, "psd{block}[{i},{j}]"),
        }
    }
}

/// Affine expression `constant + Σ coeff · var`.
#[derive(Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<Var, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn constant(value: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: Var, coeff: f64) -> Self {
        let mut e = Self::default();
        e.add_term(v, coeff);
        e
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, *c))
    }

    pub fn coefficient(&self, v: Var) -> f64 {
        self.terms.get(&v).copied().unwrap_or(0.0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, v: Var, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let slot = self.terms.entry(v).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    /// Value at an assignment of the variables.
    pub fn evaluate(&self, value: impl Fn(Var) -> f64) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, (v, c)| acc + c * value(*v))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }
}

impl Coefficient for LinExpr {
    fn zero() -> Self {
        Self::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0.0
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        if factor == 0.0 {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, factor * c);
        }
        self.constant += factor * other.constant;
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (v, c) in &self.terms {
            write!(f, " + {c}·{v}")?;
        }
        Ok(())
    }
}

impl From<f64> for LinExpr {
    fn from(value: f64) -> Self {
        Self::constant(value)
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        Self::var(v)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        self.add_scaled(rhs, 1.0);
    }
}

impl SubAssign<&LinExpr> for LinExpr {
    fn sub_assign(&mut self, rhs: &LinExpr) {
        self.add_scaled(rhs, -1.0);
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += &rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self -= &rhs;
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, rhs: f64) -> LinExpr {
        self.scaled(rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_cancels_terms() {
        let x = LinExpr::var(Var::Free(0));
        let y = LinExpr::var(Var::Nonneg(1));
        let e = x.clone() * 2.0 + y.clone() - x.clone() * 2.0 + LinExpr::constant(3.0);
        assert_eq!(e.num_terms(), 1);
        assert_eq!(e.coefficient(Var::Nonneg(1)), 1.0);
        assert_eq!(e.constant_part(), 3.0);
        assert_eq!(e.evaluate(|_| 2.0), 5.0);
    }

    #[test]
    fn psd_entries_are_symmetric() {
        assert_eq!(Var::psd(0, 2, 1), Var::psd(0, 1, 2));
    }
}
