//! Control systems `ẋ = Ax + Bu`, algebraic systems `Eẋ = Cx`, and sampled
//! invariance checks for sets given by support functions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::complement_projection;
use crate::linalg::{dot, mat_t_vec, mat_vec, norm, spectral_norm};
use crate::parallel::Execution;
use crate::sampling::fibonacci_directions;
use crate::templates::SetTemplate;

/// Support values at or below this are skipped as degenerate.
const SKIP_TOL: f64 = 1e-9;
/// At most this many failing directions are kept in a report.
const MAX_FAILING: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct ControlSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl ControlSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.nrows(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicSystem {
    e: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl AlgebraicSystem {
    pub fn new(e: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        if e.shape() != c.shape() {
            return Err(Error::InvalidProblem(format!(
                "E is {:?} but C is {:?}",
                e.shape(),
                c.shape()
            )));
        }
        if e.nrows() > e.ncols() {
            return Err(Error::InvalidProblem(format!(
                "E has more rows ({}) than columns ({})",
                e.nrows(),
                e.ncols()
            )));
        }
        Ok(Self { e, c })
    }

    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Number of algebraic equations `r`.
    pub fn rank(&self) -> usize {
        self.e.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.e.ncols()
    }
}

/// Projects away the input directions: `E = π` (orthonormal rows spanning
/// `ker Bᵀ`) and `C = E A`.
pub fn reduce(cs: &ControlSystem) -> AlgebraicSystem {
    let e = complement_projection(&cs.b);
    let c = &e * &cs.a;
    AlgebraicSystem { e, c }
}

/// Result of a sampled invariance check.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub samples: usize,
    pub evaluated: usize,
    /// Directions whose support value was too small to evaluate.
    pub skipped: usize,
    /// Largest normalized violation; `-∞` when nothing was evaluated.
    pub max_violation: f64,
    pub failing_directions: Vec<Vec<f64>>,
    pub tol: f64,
    pub passed: bool,
}

impl InvarianceReport {
    fn from_values(samples: usize, values: Vec<(Vec<f64>, Option<f64>)>, tol: f64) -> Self {
        let mut report = Self {
            samples,
            evaluated: 0,
            skipped: 0,
            max_violation: f64::NEG_INFINITY,
            failing_directions: Vec::new(),
            tol,
            passed: true,
        };
        for (dir, v) in values {
            match v {
                None => report.skipped += 1,
                Some(v) => {
                    report.evaluated += 1;
                    report.max_violation = report.max_violation.max(v);
                    if v > tol {
                        report.passed = false;
                        if report.failing_directions.len() < MAX_FAILING {
                            report.failing_directions.push(dir);
                        }
                    }
                }
            }
        }
        report
    }
}

/// Checks `⟨z, C ∇h(Eᵀz)⟩ ≤ tol · ‖z‖ ‖C‖ h(Eᵀz)` on `num_samples` directions.
pub fn verify_algebraic_invariance(
    sys: &AlgebraicSystem,
    t: &SetTemplate,
    num_samples: usize,
    tol: f64,
) -> Result<InvarianceReport> {
    verify_algebraic_invariance_with(sys, t, num_samples, tol, crate::sampling::seed_or(0), Execution::default())
}

pub fn verify_algebraic_invariance_with(
    sys: &AlgebraicSystem,
    t: &SetTemplate,
    num_samples: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<InvarianceReport> {
    if t.dim() != sys.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.state_dim(),
            got: t.dim(),
        });
    }
    let r = sys.rank();
    if r == 0 {
        return Ok(InvarianceReport::from_values(0, Vec::new(), tol));
    }
    let c_norm = spectral_norm(&sys.c);
    let dirs = fibonacci_directions(r, num_samples, seed);
    let values = exec.map(&dirs, |z| {
        let y = mat_t_vec(&sys.e, z);
        let v = (|| -> Result<Option<f64>> {
            let h = t.support(&y)?;
            if h <= SKIP_TOL {
                return Ok(None);
            }
            if c_norm == 0.0 {
                return Ok(Some(0.0));
            }
            let g = t.support_gradient(&y)?;
            Ok(Some(dot(z, &mat_vec(&sys.c, &g)) / (norm(z) * c_norm * h)))
        })();
        (z.clone(), v)
    });
    let values = values
        .into_iter()
        .map(|(z, v)| v.map(|v| (z, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport::from_values(num_samples, values, tol))
}

/// Checks the existential boundary condition `inf_u ⟨y, Ax + Bu⟩ ≤ 0` at
/// exposed points `x = ∇h(y)`.
///
/// Directions with `‖Bᵀy‖ > 1e-9` pass trivially, so only directions in
/// `ker Bᵀ` are sampled: `y = πᵀz` for unit `z` from the same sequence the
/// algebraic check uses. The violation is `⟨y, Ax⟩ / (‖y‖ ‖A‖ h(y))`.
pub fn verify_controlled_invariance(
    cs: &ControlSystem,
    t: &SetTemplate,
    num_samples: usize,
    tol: f64,
) -> Result<InvarianceReport> {
    verify_controlled_invariance_with(cs, t, num_samples, tol, crate::sampling::seed_or(0), Execution::default())
}

pub fn verify_controlled_invariance_with(
    cs: &ControlSystem,
    t: &SetTemplate,
    num_samples: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<InvarianceReport> {
    if t.dim() != cs.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: cs.state_dim(),
            got: t.dim(),
        });
    }
    let pi = complement_projection(&cs.b);
    let r = pi.nrows();
    if r == 0 {
        return Ok(InvarianceReport::from_values(0, Vec::new(), tol));
    }
    let a_norm = spectral_norm(&cs.a);
    let dirs = fibonacci_directions(r, num_samples, seed);
    let values = exec.map(&dirs, |z| {
        let y = mat_t_vec(&pi, z);
        let v = (|| -> Result<Option<f64>> {
            if norm(&mat_t_vec(&cs.b, &y)) > 1e-9 {
                return Ok(Some(f64::NEG_INFINITY));
            }
            let h = t.support(&y)?;
            if h <= SKIP_TOL {
                return Ok(None);
            }
            if a_norm == 0.0 {
                return Ok(Some(0.0));
            }
            let x = t.support_gradient(&y)?;
            Ok(Some(dot(&y, &mat_vec(&cs.a, &x)) / (norm(&y) * a_norm * h)))
        })();
        (y, v)
    });
    let values = values
        .into_iter()
        .map(|(y, v)| v.map(|v| (y, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport::from_values(num_samples, values, tol))
}

/// The lifted double integrator `ẋ₁ = x₂, ẋ₂ = x₃, ẋ₃ = u`.
pub fn benchmark_system() -> ControlSystem {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    let b = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
    ControlSystem { a, b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::HomogeneousPolynomial;
    use crate::templates::{EllipsoidTemplate, PolysetTemplate};

    fn ball(n: usize) -> SetTemplate {
        SetTemplate::Ellipsoid(EllipsoidTemplate::new(DMatrix::identity(n, n)).unwrap())
    }

    #[test]
    fn reduce_benchmark() {
        let sys = reduce(&benchmark_system());
        assert_eq!(sys.e(), &DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        assert_eq!(sys.c(), &DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn reduce_extremes() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let full = reduce(&ControlSystem::new(a.clone(), DMatrix::identity(2, 2)).unwrap());
        assert_eq!(full.rank(), 0);
        let none = reduce(&ControlSystem::new(a.clone(), DMatrix::zeros(2, 1)).unwrap());
        assert_eq!(none.e(), &DMatrix::identity(2, 2));
        assert_eq!(none.c(), &a);
    }

    #[test]
    fn one_dimensional_contraction_passes() {
        let sys = AlgebraicSystem::new(DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -1.0)).unwrap();
        let p = HomogeneousPolynomial::monomial([4], 1.0);
        let t = SetTemplate::Polyset(PolysetTemplate::new(p).unwrap());
        let report = verify_algebraic_invariance(&sys, &t, 10, 0.0).unwrap();
        assert!(report.passed);
        assert!((report.max_violation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn growth_fails() {
        let sys = AlgebraicSystem::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let report = verify_algebraic_invariance(&sys, &ball(2), 100, 1e-6).unwrap();
        assert!(!report.passed);
        assert!((report.max_violation - 1.0).abs() < 1e-12);
        assert!(!report.failing_directions.is_empty());
    }

    #[test]
    fn controlled_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let actuated = ControlSystem::new(a, DMatrix::identity(2, 2)).unwrap();
        assert!(verify_controlled_invariance(&actuated, &ball(2), 100, 0.0).unwrap().passed);

        let stable = ControlSystem::new(-DMatrix::identity(2, 2), DMatrix::zeros(2, 1)).unwrap();
        let r = verify_controlled_invariance(&stable, &ball(2), 100, 0.0).unwrap();
        assert!(r.passed);
        assert!((r.max_violation + 1.0).abs() < 1e-12);

        let unstable = ControlSystem::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 1)).unwrap();
        let r = verify_controlled_invariance(&unstable, &ball(2), 100, 0.0).unwrap();
        assert!(!r.passed);
        assert!((r.max_violation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(ControlSystem::new(DMatrix::zeros(2, 3), DMatrix::zeros(2, 1)).is_err());
        assert!(ControlSystem::new(DMatrix::zeros(2, 2), DMatrix::zeros(3, 1)).is_err());
        assert!(AlgebraicSystem::new(DMatrix::zeros(1, 2), DMatrix::zeros(2, 2)).is_err());
    }
}
