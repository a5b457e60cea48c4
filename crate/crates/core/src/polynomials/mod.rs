//! Dense homogeneous multivariate polynomials.
//!
//! Coefficients are generic over [`Coefficient`] so the same machinery serves
//! both numeric polynomials (`f64`) and polynomials whose coefficients are
//! affine expressions in the variables of a conic program.

mod basis;
mod exponent;

pub use basis::{monomial_basis, MonomialBasis};
pub use exponent::ExponentVector;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Coefficient ring of a [`HomogeneousPolynomial`]: a real vector space.
pub trait Coefficient: Clone + fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    /// `self += factor * other`
    fn add_scaled(&mut self, other: &Self, factor: f64);

    fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, factor);
        out
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn add_scaled(&mut self, other: &Self, factor: f64) {
        *self += factor * other;
    }
}

/// Polynomial whose monomials all have total degree `degree`.
///
/// Terms are kept in graded-lex order; exact zeros are dropped.
#[derive(Clone, PartialEq)]
pub struct HomogeneousPolynomial<C = f64> {
    num_vars: usize,
    degree: u32,
    terms: BTreeMap<ExponentVector, C>,
}

impl<C: Coefficient> HomogeneousPolynomial<C> {
    pub fn zero(num_vars: usize, degree: u32) -> Self {
        Self {
            num_vars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(num_vars: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExponentVector, C)>,
    {
        let mut poly = Self::zero(num_vars, degree);
        for (exponents, coeff) in terms {
            if exponents.num_vars() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    got: exponents.num_vars(),
                });
            }
            if exponents.degree() != degree {
                return Err(Error::InvalidTemplate(format!(
                    "monomial {exponents} has degree {} in a polynomial of degree {degree}",
                    exponents.degree()
                )));
            }
            poly.add_term(exponents, &coeff, 1.0);
        }
        Ok(poly)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &ExponentVector) -> Option<&C> {
        self.terms.get(exponents)
    }

    /// `self[exponents] += factor * coeff`
    pub fn add_term(&mut self, exponents: ExponentVector, coeff: &C, factor: f64) {
        debug_assert_eq!(exponents.degree(), self.degree);
        debug_assert_eq!(exponents.num_vars(), self.num_vars);
        match self.terms.entry(exponents) {
            Entry::Occupied(mut slot) => {
                slot.get_mut().add_scaled(coeff, factor);
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                let value = coeff.scaled(factor);
                if !value.is_zero() {
                    slot.insert(value);
                }
            }
        }
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        self.check_same_shape(other)?;
        for (exponents, coeff) in &other.terms {
            self.add_term(exponents.clone(), coeff, factor);
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.num_vars, self.degree);
        for (exponents, coeff) in &self.terms {
            out.add_term(exponents.clone(), coeff, factor);
        }
        out
    }

    /// Evaluates at a real point, producing a coefficient-valued result.
    pub fn evaluate_generic(&self, point: &[f64]) -> Result<C> {
        self.check_point(point)?;
        let mut acc = C::zero();
        for (exponents, coeff) in &self.terms {
            acc.add_scaled(coeff, exponents.evaluate(point));
        }
        Ok(acc)
    }

    /// Partial derivatives `∂p/∂y_i`, each of degree `degree - 1`.
    ///
    /// A constant polynomial yields zero polynomials of degree 0.
    pub fn gradient(&self) -> Vec<Self> {
        let out_degree = self.degree.saturating_sub(1);
        (0..self.num_vars)
            .map(|var| {
                let mut part = Self::zero(self.num_vars, out_degree);
                if self.degree == 0 {
                    return part;
                }
                for (exponents, coeff) in &self.terms {
                    if let Some((lowered, power)) = exponents.differentiate(var) {
                        part.add_term(lowered, coeff, f64::from(power));
                    }
                }
                part
            })
            .collect()
    }

    /// Returns `q(z) = p(M z)` where `M` has `num_vars` rows.
    pub fn pullback(&self, map: &DMatrix<f64>) -> Result<Self> {
        if map.nrows() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: map.nrows(),
            });
        }
        let new_vars = map.ncols();
        let max_power = self.degree as usize;
        // powers[i][e] = (row_i · z)^e
        let powers: Vec<Vec<HomogeneousPolynomial<f64>>> = (0..self.num_vars)
            .map(|i| {
                let row: Vec<f64> = map.row(i).iter().copied().collect();
                (0..=max_power)
                    .map(|e| power_of_linear_form(&row, e as u32))
                    .collect()
            })
            .collect();

        let mut out = Self::zero(new_vars, self.degree);
        for (exponents, coeff) in &self.terms {
            let mut product = HomogeneousPolynomial::constant(new_vars, 1.0);
            for (i, &e) in exponents.as_slice().iter().enumerate() {
                if e > 0 {
                    product = product.mul_real(&powers[i][e as usize]);
                }
            }
            for (mono, factor) in &product.terms {
                out.add_term(mono.clone(), coeff, *factor);
            }
        }
        Ok(out)
    }

    /// Product with a real-coefficient polynomial over the same variables.
    pub fn mul_real(&self, other: &HomogeneousPolynomial<f64>) -> Self {
        assert_eq!(self.num_vars, other.num_vars, "variable count mismatch");
        let mut out = Self::zero(self.num_vars, self.degree + other.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.product(eb), ca, *cb);
            }
        }
        out
    }

    /// Re-expresses the polynomial over `total_vars` variables, placing the
    /// current variables at positions `offset..offset + num_vars`.
    pub fn embed(&self, total_vars: usize, offset: usize) -> Self {
        assert!(offset + self.num_vars <= total_vars);
        let mut out = Self::zero(total_vars, self.degree);
        for (exponents, coeff) in &self.terms {
            out.add_term(exponents.embed(total_vars, offset), coeff, 1.0);
        }
        out
    }

    /// Applies `f` to every coefficient.
    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> HomogeneousPolynomial<D> {
        let mut out = HomogeneousPolynomial::zero(self.num_vars, self.degree);
        for (exponents, coeff) in &self.terms {
            out.add_term(exponents.clone(), &f(coeff), 1.0);
        }
        out
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: other.num_vars,
            });
        }
        if self.degree != other.degree {
            return Err(Error::InvalidTemplate(format!(
                "cannot add polynomials of degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }
}

impl HomogeneousPolynomial<f64> {
    pub fn constant(num_vars: usize, value: f64) -> Self {
        let mut poly = Self::zero(num_vars, 0);
        poly.add_term(ExponentVector::zeros(num_vars), &value, 1.0);
        poly
    }

    /// Single monomial `coeff * y^exponents`.
    pub fn monomial(exponents: impl Into<ExponentVector>, coeff: f64) -> Self {
        let exponents = exponents.into();
        let mut poly = Self::zero(exponents.num_vars(), exponents.degree());
        poly.add_term(exponents, &coeff, 1.0);
        poly
    }

    /// `Σ coeff · Π point_i^e_i`
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        self.evaluate_generic(point)
    }

    /// Gradient evaluated at a point, without materialising the derivative polynomials.
    pub fn evaluate_gradient(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        let mut grad = vec![0.0; self.num_vars];
        for (exponents, coeff) in &self.terms {
            for (var, slot) in grad.iter_mut().enumerate() {
                if let Some(d) = exponents.evaluate_derivative(point, var) {
                    *slot += coeff * d;
                }
            }
        }
        Ok(grad)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// `(cᵀy)^degree` expanded by the multinomial theorem.
pub fn power_of_linear_form(coeffs: &[f64], degree: u32) -> HomogeneousPolynomial<f64> {
    let n = coeffs.len();
    let mut out = HomogeneousPolynomial::zero(n, degree);
    for exponents in monomial_basis(n, degree).iter() {
        let mut value = multinomial(exponents.as_slice()) as f64;
        for (c, &e) in coeffs.iter().zip(exponents.as_slice()) {
            if e > 0 {
                value *= c.powi(e as i32);
            }
        }
        if value != 0.0 {
            out.add_term(exponents.clone(), &value, 1.0);
        }
    }
    out
}

/// `(Σ k_i)! / Π k_i!` computed as a product of binomials.
fn multinomial(parts: &[u32]) -> u128 {
    let mut total = 0u64;
    let mut acc: u128 = 1;
    for &k in parts {
        total += u64::from(k);
        acc *= binomial(total, u64::from(k));
    }
    acc
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

impl<C: Coefficient> fmt::Debug for HomogeneousPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogeneousPolynomial(n={}, deg={}) {{", self.num_vars, self.degree)?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}: {c:?}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for HomogeneousPolynomial<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (var, &power) in e.as_slice().iter().enumerate() {
                match power {
                    0 => {}
                    1 => write!(f, "·y{}", var + 1)?,
                    _ => write!(f, "·y{}^{}", var + 1, power)?,
                }
            }
        }
        Ok(())
    }
}
