use super::{binomial, ExponentVector};

/// Every monomial of a given degree in `num_vars` variables, graded-lex ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    num_vars: usize,
    degree: u32,
    monomials: Vec<ExponentVector>,
}

impl MonomialBasis {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ExponentVector> {
        self.monomials.iter()
    }

    pub fn monomials(&self) -> &[ExponentVector] {
        &self.monomials
    }

    pub fn position(&self, exponents: &ExponentVector) -> Option<usize> {
        self.monomials.binary_search(exponents).ok()
    }

    /// Size of the basis, `C(num_vars + degree - 1, degree)`.
    pub fn expected_len(num_vars: usize, degree: u32) -> usize {
        if num_vars == 0 {
            return usize::from(degree == 0);
        }
        binomial((num_vars as u64) + u64::from(degree) - 1, u64::from(degree)) as usize
    }
}

impl<'a> IntoIterator for &'a MonomialBasis {
    type Item = &'a ExponentVector;
    type IntoIter = std::slice::Iter<'a, ExponentVector>;

    fn into_iter(self) -> Self::IntoIter {
        self.monomials.iter()
    }
}

pub fn monomial_basis(num_vars: usize, degree: u32) -> MonomialBasis {
    let mut monomials = Vec::with_capacity(MonomialBasis::expected_len(num_vars, degree));
    let mut current = vec![0u32; num_vars];
    if num_vars > 0 {
        fill(&mut current, 0, degree, &mut monomials);
    } else if degree == 0 {
        monomials.push(ExponentVector::zeros(0));
    }
    MonomialBasis {
        num_vars,
        degree,
        monomials,
    }
}

// Leading exponents descend, which yields graded-lex order directly.
fn fill(current: &mut [u32], var: usize, remaining: u32, out: &mut Vec<ExponentVector>) {
    if var + 1 == current.len() {
        current[var] = remaining;
        out.push(ExponentVector::new(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e;
        fill(current, var + 1, remaining - e, out);
    }
    current[var] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bases() {
        let b = monomial_basis(2, 2);
        assert_eq!(
            b.monomials(),
            &[
                ExponentVector::from([2, 0]),
                ExponentVector::from([1, 1]),
                ExponentVector::from([0, 2]),
            ]
        );
        let b = monomial_basis(3, 1);
        assert_eq!(
            b.monomials(),
            &[
                ExponentVector::from([1, 0, 0]),
                ExponentVector::from([0, 1, 0]),
                ExponentVector::from([0, 0, 1]),
            ]
        );
    }

    #[test]
    fn basis_sizes() {
        // stars and bars: C(12, 2)
        assert_eq!(monomial_basis(3, 10).len(), 66);
        for n in 1..5 {
            for d in 0..8 {
                assert_eq!(monomial_basis(n, d).len(), MonomialBasis::expected_len(n, d));
            }
        }
    }

    #[test]
    fn basis_is_sorted_and_searchable() {
        let b = monomial_basis(3, 4);
        assert!(b.monomials().windows(2).all(|w| w[0] < w[1]));
        for (i, m) in b.iter().enumerate() {
            assert_eq!(b.position(m), Some(i));
        }
    }
}
