//! Convex sets described by their support functions.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sphere_partition_with, ConicPartition, FacetMode};
use crate::linalg::{mat_vec, min_eigenvalue, norm, quad_form, symmetrize};
use crate::polynomials::HomogeneousPolynomial;
use crate::sampling::{fibonacci_directions, random_unit_vector};

/// Negative quadratic or polynomial values below this (on unit directions)
/// make a template invalid.
pub const NEGATIVITY_TOL: f64 = 1e-9;
/// Support values at or below this have no well-defined gradient.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// `h(y) = √(yᵀQy)`, the ellipsoid `{Q^{1/2} u : ‖u‖ ≤ 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidTemplate {
    q: DMatrix<f64>,
}

impl EllipsoidTemplate {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::InvalidTemplate(format!(
                "ellipsoid matrix is {}×{}",
                q.nrows(),
                q.ncols()
            )));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) {
            return Err(Error::InvalidTemplate(format!("ellipsoid matrix asymmetric by {asym:e}")));
        }
        let q = symmetrize(&q);
        let lmin = min_eigenvalue(&q);
        if lmin < -NEGATIVITY_TOL {
            return Err(Error::InvalidTemplate(format!(
                "ellipsoid matrix has eigenvalue {lmin:e}"
            )));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// The polar ellipsoid, with matrix `Q⁻¹`.
    pub fn polar(&self) -> Result<Self> {
        let inv = self
            .q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidTemplate("singular ellipsoid has an unbounded polar".into()))?;
        Self::new(symmetrize(&inv))
    }
}

/// `h(y) = p(y)^{1/2d}` for a nonnegative form `p` of degree `2d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolysetTemplate {
    p: HomogeneousPolynomial,
    half_degree: u32,
}

impl PolysetTemplate {
    /// Validates the degree and samples nonnegativity on 10⁴ unit directions.
    pub fn new(p: HomogeneousPolynomial) -> Result<Self> {
        let deg = p.degree();
        if deg == 0 || deg % 2 == 1 {
            return Err(Error::InvalidTemplate(format!(
                "polyset degree must be even and positive, got {deg}"
            )));
        }
        let scale = p.max_abs_coefficient().max(1.0);
        for y in fibonacci_directions(p.num_vars(), 10_000, 0) {
            let v = p.evaluate(&y)?;
            if v < -NEGATIVITY_TOL * scale {
                return Err(Error::InvalidTemplate(format!(
                    "polyset form is negative ({v:e}) at {y:?}"
                )));
            }
        }
        Ok(Self {
            half_degree: deg / 2,
            p,
        })
    }

    pub fn polynomial(&self) -> &HomogeneousPolynomial {
        &self.p
    }

    /// `d` in `2d = degree`.
    pub fn half_degree(&self) -> u32 {
        self.half_degree
    }
}

/// Reproducible description of a conic partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PartitionSpec {
    WholeSpace { dim: usize },
    Sphere { m1: usize, m2: usize, triangulated: bool },
}

impl PartitionSpec {
    pub fn build(&self) -> Result<ConicPartition> {
        match *self {
            PartitionSpec::WholeSpace { dim } => Ok(ConicPartition::whole_space(dim)),
            PartitionSpec::Sphere { m1, m2, triangulated } => sphere_partition_with(
                m1,
                m2,
                if triangulated {
                    FacetMode::Triangulated
                } else {
                    FacetMode::Facets
                },
            ),
        }
    }
}

/// `h(y) = √(yᵀQᵢy)` for `y` in cone `i` of a conic partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseTemplate {
    spec: PartitionSpec,
    partition: ConicPartition,
    q: Vec<DMatrix<f64>>,
}

/// Continuity tolerance on facet-restricted forms.
pub const CONTINUITY_TOL: f64 = 1e-8;

impl PiecewiseTemplate {
    /// Validates continuity across facets and sampled nonnegativity per cone.
    pub fn new(spec: PartitionSpec, q: Vec<DMatrix<f64>>) -> Result<Self> {
        let partition = spec.build()?;
        Self::with_partition(spec, partition, q)
    }

    pub fn with_partition(spec: PartitionSpec, partition: ConicPartition, q: Vec<DMatrix<f64>>) -> Result<Self> {
        if q.len() != partition.len() {
            return Err(Error::InvalidTemplate(format!(
                "{} matrices for {} cones",
                q.len(),
                partition.len()
            )));
        }
        let n = partition.dim();
        if let Some(bad) = q.iter().find(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::InvalidTemplate(format!(
                "piece matrix is {}×{}, expected {n}×{n}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let q: Vec<DMatrix<f64>> = q.iter().map(symmetrize).collect();
        let jump = continuity_defect(&partition, &q);
        if jump > CONTINUITY_TOL {
            return Err(Error::InvalidTemplate(format!(
                "pieces disagree on a shared facet by {jump:e}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (i, cone) in partition.cones().iter().enumerate() {
            let rays = cone.rays();
            for _ in 0..200 {
                let w: Vec<f64> = (0..rays.len()).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
                let y: Vec<f64> = (0..n)
                    .map(|k| rays.iter().zip(&w).map(|(r, wi)| r[k] * wi).sum())
                    .collect();
                let ny = norm(&y);
                if ny == 0.0 {
                    continue;
                }
                let v = quad_form(&q[i], &y) / (ny * ny);
                if v < -NEGATIVITY_TOL {
                    return Err(Error::InvalidTemplate(format!(
                        "piece {i} is negative ({v:e}) inside its cone"
                    )));
                }
            }
        }
        Ok(Self { spec, partition, q })
    }

    pub fn spec(&self) -> PartitionSpec {
        self.spec
    }

    pub fn partition(&self) -> &ConicPartition {
        &self.partition
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.q
    }
}

/// Largest `|Bᵀ(Qᵢ − Qⱼ)B|` entry over adjacent pieces.
pub fn continuity_defect(partition: &ConicPartition, q: &[DMatrix<f64>]) -> f64 {
    partition
        .adjacency()
        .iter()
        .map(|adj| {
            let diff = &q[adj.first] - &q[adj.second];
            (adj.basis.transpose() * diff * &adj.basis).amax()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetTemplate {
    Ellipsoid(EllipsoidTemplate),
    Polyset(PolysetTemplate),
    Piecewise(PiecewiseTemplate),
}

/// Outcome of the sampled midpoint-convexity test.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub pairs: usize,
    /// Largest `h((y₁+y₂)/2) − (h(y₁)+h(y₂))/2`.
    pub max_violation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl SetTemplate {
    pub fn dim(&self) -> usize {
        match self {
            SetTemplate::Ellipsoid(e) => e.q.nrows(),
            SetTemplate::Polyset(p) => p.p.num_vars(),
            SetTemplate::Piecewise(pw) => pw.partition.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetTemplate::Ellipsoid(_) => "ellipsoid",
            SetTemplate::Polyset(_) => "polyset",
            SetTemplate::Piecewise(_) => "piecewise",
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Quadratic form of the piece used at `y` (ellipsoid and piecewise).
    fn piece(&self, y: &[f64]) -> Result<&DMatrix<f64>> {
        match self {
            SetTemplate::Ellipsoid(e) => Ok(&e.q),
            SetTemplate::Piecewise(pw) => Ok(&pw.q[pw.partition.find_cone(y)?]),
            SetTemplate::Polyset(_) => unreachable!("polysets have no quadratic pieces"),
        }
    }

    /// `h(y)`
    pub fn support(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y)?;
        let ny = norm(y);
        match self {
            SetTemplate::Polyset(ps) => {
                let v = ps.p.evaluate(y)?;
                let tol = NEGATIVITY_TOL * ny.powi(ps.p.degree() as i32) * ps.p.max_abs_coefficient().max(1.0);
                if v < -tol {
                    return Err(Error::InvalidTemplate(format!("polyset value {v:e} at {y:?}")));
                }
                Ok(v.max(0.0).powf(1.0 / f64::from(ps.p.degree())))
            }
            _ => {
                if ny == 0.0 {
                    return Ok(0.0);
                }
                let v = quad_form(self.piece(y)?, y);
                if v < -NEGATIVITY_TOL * ny * ny {
                    return Err(Error::InvalidTemplate(format!("quadratic value {v:e} at {y:?}")));
                }
                Ok(v.max(0.0).sqrt())
            }
        }
    }

    /// `∇h(y)`, the exposed point of the set in direction `y`.
    pub fn support_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let h = self.support(y)?;
        if h <= DEGENERATE_TOL * norm(y).max(1.0) {
            return Err(Error::DegenerateDirection(h));
        }
        match self {
            SetTemplate::Polyset(ps) => {
                let two_d = f64::from(ps.p.degree());
                let p = h.powf(two_d);
                let scale = 1.0 / (two_d * p / h);
                Ok(ps.p.evaluate_gradient(y)?.into_iter().map(|g| g * scale).collect())
            }
            _ => Ok(mat_vec(self.piece(y)?, y).into_iter().map(|g| g / h).collect()),
        }
    }

    /// Radial boundary points `y / h(y)` of the polar set.
    pub fn polar_boundary(&self, directions: &[Vec<f64>]) -> Vec<Result<Vec<f64>>> {
        directions
            .iter()
            .map(|y| {
                let h = self.support(y)?;
                if h <= DEGENERATE_TOL {
                    return Err(Error::DegenerateDirection(h));
                }
                Ok(y.iter().map(|v| v / h).collect())
            })
            .collect()
    }

    /// Boundary of the projection onto coordinates `dims`, one point per planar direction.
    pub fn projection_boundary(&self, planar_directions: &[[f64; 2]], dims: [usize; 2]) -> Result<Vec<[f64; 2]>> {
        let n = self.dim();
        if dims[0] >= n || dims[1] >= n || dims[0] == dims[1] {
            return Err(Error::InvalidProblem(format!("bad projection dimensions {dims:?}")));
        }
        planar_directions
            .iter()
            .map(|w| {
                let y = lift(w, dims, n);
                let g = self.support_gradient(&y)?;
                Ok([g[dims[0]], g[dims[1]]])
            })
            .collect()
    }

    /// Sampled midpoint convexity of `h` over `pairs` random pairs of unit vectors.
    pub fn check_convexity(&self, pairs: usize, seed: u64, tol: f64) -> Result<ConvexityReport> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..pairs {
            let a = random_unit_vector(&mut rng, n);
            let b = random_unit_vector(&mut rng, n);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            if norm(&mid) < 1e-9 {
                continue;
            }
            let gap = self.support(&mid)? - 0.5 * (self.support(&a)? + self.support(&b)?);
            worst = worst.max(gap);
        }
        Ok(ConvexityReport {
            pairs,
            max_violation: worst,
            tol,
            passed: worst <= tol,
        })
    }
}

/// Embeds a planar vector at coordinates `dims` of ℝⁿ.
pub fn lift(w: &[f64; 2], dims: [usize; 2], n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    y[dims[0]] = w[0];
    y[dims[1]] = w[1];
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::circle_directions;

    fn ellipsoid(diag: &[f64]) -> SetTemplate {
        SetTemplate::Ellipsoid(EllipsoidTemplate::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag))).unwrap())
    }

    fn poly(n: usize, terms: &[(Vec<u32>, f64)]) -> HomogeneousPolynomial {
        let deg = terms[0].0.iter().sum();
        HomogeneousPolynomial::from_terms(n, deg, terms.iter().map(|(e, c)| (e.clone().into(), *c))).unwrap()
    }

    #[test]
    fn support_examples() {
        assert!((ellipsoid(&[1.0, 1.0]).support(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
        let p = SetTemplate::Polyset(PolysetTemplate::new(poly(1, &[(vec![4], 1.0)])).unwrap());
        assert!((p.support(&[-2.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn piecewise_with_equal_pieces_matches_ellipsoid() {
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5]);
        let spec = PartitionSpec::Sphere { m1: 4, m2: 3, triangulated: true };
        let pw = SetTemplate::Piecewise(PiecewiseTemplate::new(spec, vec![q.clone(); 8]).unwrap());
        let el = SetTemplate::Ellipsoid(EllipsoidTemplate::new(q).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let y = random_unit_vector(&mut rng, 3);
            assert!((pw.support(&y).unwrap() - el.support(&y).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_examples() {
        let g = ellipsoid(&[1.0, 1.0]).support_gradient(&[0.0, 1.0]).unwrap();
        assert!((g[0]).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
        let p = SetTemplate::Polyset(PolysetTemplate::new(poly(2, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)])).unwrap());
        let g = p.support_gradient(&[1.0, 0.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        assert!(matches!(ellipsoid(&[1.0, 0.0]).support_gradient(&[0.0, 1.0]), Err(Error::DegenerateDirection(_))));
    }

    #[test]
    fn polar_examples() {
        let pts = ellipsoid(&[4.0, 1.0]).polar_boundary(&[vec![1.0, 0.0]]);
        assert!((pts[0].as_ref().unwrap()[0] - 0.5).abs() < 1e-15);
        let p = SetTemplate::Polyset(PolysetTemplate::new(poly(1, &[(vec![4], 1.0)])).unwrap());
        assert!((p.polar_boundary(&[vec![1.0]])[0].as_ref().unwrap()[0] - 1.0).abs() < 1e-15);
        let unit = ellipsoid(&[1.0, 1.0]);
        for pt in unit.polar_boundary(&fibonacci_directions(2, 16, 0)) {
            assert!((norm(&pt.unwrap()) - 1.0).abs() < 1e-12);
        }
        let bad = ellipsoid(&[1.0, 0.0]).polar_boundary(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(bad[0].is_err() && bad[1].is_ok());
    }

    #[test]
    fn projection_examples() {
        for diag in [[1.0, 1.0, 1.0], [1.0, 1.0, 100.0]] {
            let pts = ellipsoid(&diag).projection_boundary(&circle_directions(36), [0, 1]).unwrap();
            for p in pts {
                assert!((norm(&p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_templates() {
        assert!(EllipsoidTemplate::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(EllipsoidTemplate::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        assert!(PolysetTemplate::new(poly(2, &[(vec![3, 0], 1.0)])).is_err());
        assert!(PolysetTemplate::new(poly(2, &[(vec![2, 0], 1.0), (vec![0, 2], -1.0)])).is_err());
        let spec = PartitionSpec::Sphere { m1: 4, m2: 3, triangulated: true };
        let mut qs = vec![DMatrix::identity(3, 3); 8];
        qs[0][(0, 0)] = 2.0;
        assert!(PiecewiseTemplate::new(spec, qs).is_err());
    }

    #[test]
    fn ellipsoid_bipolar() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let e = SetTemplate::Ellipsoid(EllipsoidTemplate::new(q.clone()).unwrap());
        let polar = SetTemplate::Ellipsoid(EllipsoidTemplate::new(q).unwrap().polar().unwrap());
        for y in fibonacci_directions(2, 64, 0) {
            // boundary points of the polar set have unit support in the original
            let x = polar.support_gradient(&y).unwrap();
            assert!((e.support(&x).unwrap() - 1.0).abs() < 1e-9);
        }
        for pt in polar.polar_boundary(&fibonacci_directions(2, 64, 1)) {
            let pt = pt.unwrap();
            let SetTemplate::Ellipsoid(inner) = &e else { unreachable!() };
            // y / h°(y) lies on the boundary of the original set
            let q_inv = inner.q().clone().try_inverse().unwrap();
            assert!((quad_form(&q_inv, &pt) - 1.0).abs() < 1e-9);
        }
    }
}
