use std::cmp::Ordering;
use std::fmt;

/// Exponents of a monomial, one entry per variable.
///
/// Ordered graded-lexicographically: lower total degree first, then
/// `y1^2 < y1*y2 < y2^2` (larger leading exponents come first).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zeros(num_vars: usize) -> Self {
        Self(vec![0; num_vars])
    }

    /// `degree * e_var`
    pub fn axis(num_vars: usize, var: usize, degree: u32) -> Self {
        let mut exps = vec![0; num_vars];
        exps[var] = degree;
        Self(exps)
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.0.len(), other.0.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Lowers the exponent of `var` by one, returning the former exponent.
    pub fn differentiate(&self, var: usize) -> Option<(Self, u32)> {
        let power = self.0[var];
        if power == 0 {
            return None;
        }
        let mut lowered = self.0.clone();
        lowered[var] -= 1;
        Some((Self(lowered), power))
    }

    pub fn embed(&self, total_vars: usize, offset: usize) -> Self {
        let mut exps = vec![0; total_vars];
        exps[offset..offset + self.0.len()].copy_from_slice(&self.0);
        Self(exps)
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }

    /// `∂/∂y_var` of the monomial at `point`, or `None` if the monomial does not involve `var`.
    pub fn evaluate_derivative(&self, point: &[f64], var: usize) -> Option<f64> {
        let power = self.0[var];
        if power == 0 {
            return None;
        }
        let mut value = f64::from(power);
        for (i, (&e, &x)) in self.0.iter().zip(point).enumerate() {
            let e = if i == var { e - 1 } else { e };
            if e > 0 {
                value *= x.powi(e as i32);
            }
        }
        Some(value)
    }

    /// Comma-separated exponents, e.g. `"4,0,0"`.
    pub fn to_key(&self) -> String {
        self.0
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_key(key: &str) -> Option<Self> {
        key.split(',')
            .map(|part| part.trim().parse::<u32>().ok())
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(exps: Vec<u32>) -> Self {
        Self(exps)
    }
}

impl<const N: usize> From<[u32; N]> for ExponentVector {
    fn from(exps: [u32; N]) -> Self {
        Self(exps.to_vec())
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_key())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let mut monos = vec![
            ExponentVector::from([0, 2]),
            ExponentVector::from([2, 0]),
            ExponentVector::from([1, 1]),
            ExponentVector::from([1, 0]),
        ];
        monos.sort();
        assert_eq!(
            monos,
            vec![
                ExponentVector::from([1, 0]),
                ExponentVector::from([2, 0]),
                ExponentVector::from([1, 1]),
                ExponentVector::from([0, 2]),
            ]
        );
    }

    #[test]
    fn key_round_trip() {
        let e = ExponentVector::from([4, 0, 2]);
        assert_eq!(e.to_key(), "4,0,2");
        assert_eq!(ExponentVector::from_key("4,0,2"), Some(e));
        assert_eq!(ExponentVector::from_key("4,x"), None);
    }
}
