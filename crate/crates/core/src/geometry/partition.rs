use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cone::{PolyhedralCone, CONTAINMENT_TOL};
use super::hull::convex_hull_facets;
use crate::error::{Error, Result};
use crate::linalg::{cross, dot, norm, normalized};
use crate::sampling::random_unit_vector;

/// Facet shared by two adjacent cones of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency {
    pub first: usize,
    pub second: usize,
    /// `n × (n-1)` basis of the hyperplane containing the shared facet.
    pub basis: DMatrix<f64>,
    /// Unit normal of the shared hyperplane, pointing from `first` into `second`.
    pub normal: Vec<f64>,
    /// Generators of the shared facet cone.
    pub facet_rays: Vec<Vec<f64>>,
}

/// Finite family of solid polyhedral cones covering ℝⁿ with pairwise
/// intersections of lower dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicPartition {
    dim: usize,
    cones: Vec<PolyhedralCone>,
    adjacency: Vec<Adjacency>,
}

/// How non-triangular facets of the sphere polytope become cones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum FacetMode {
    /// One cone per hull facet (quadrilaterals stay whole).
    #[default]
    Facets,
    /// Facets fanned into triangles from their lexicographically smallest vertex.
    Triangulated,
}

impl ConicPartition {
    pub fn new(dim: usize, cones: Vec<PolyhedralCone>, adjacency: Vec<Adjacency>) -> Self {
        Self {
            dim,
            cones,
            adjacency,
        }
    }

    /// The trivial partition with a single cone equal to ℝⁿ.
    pub fn whole_space(dim: usize) -> Self {
        let mut rays = Vec::new();
        for k in 0..dim {
            for s in [1.0, -1.0] {
                let mut r = vec![0.0; dim];
                r[k] = s;
                rays.push(r);
            }
        }
        Self::new(dim, vec![PolyhedralCone::from_parts(rays, Vec::new())], Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn cones(&self) -> &[PolyhedralCone] {
        &self.cones
    }

    pub fn adjacency(&self) -> &[Adjacency] {
        &self.adjacency
    }

    /// Lowest index of a cone containing `y` (tolerance `1e-9` on unit `y`).
    pub fn find_cone(&self, y: &[f64]) -> Result<usize> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        if norm(y) == 0.0 {
            return Err(Error::Geometry("find_cone needs a nonzero direction".into()));
        }
        let mut best = f64::NEG_INFINITY;
        for (i, cone) in self.cones.iter().enumerate() {
            let margin = cone.min_margin(y);
            if margin >= -CONTAINMENT_TOL {
                return Ok(i);
            }
            best = best.max(margin);
        }
        Err(Error::NotCovered(-best))
    }

    /// Sampled covering and interior-disjointness check on `samples` random unit vectors.
    pub fn check_sampled(&self, samples: usize, seed: u64) -> PartitionReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = PartitionReport::default();
        for _ in 0..samples {
            let y = random_unit_vector(&mut rng, self.dim);
            let containing = self.cones.iter().filter(|c| c.contains(&y)).count();
            let interior = self
                .cones
                .iter()
                .filter(|c| c.min_margin(&y) > 1e-6)
                .count();
            if containing == 0 {
                report.uncovered += 1;
            }
            if interior > 1 {
                report.overlapping += 1;
            }
        }
        report.samples = samples;
        report
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PartitionReport {
    pub samples: usize,
    pub uncovered: usize,
    pub overlapping: usize,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.uncovered == 0 && self.overlapping == 0
    }
}

/// Distinct points `(cos α cos β, sin α cos β, sin β)` on the α/β grid, α-major.
pub fn sphere_grid_points(m1: usize, m2: usize) -> Vec<[f64; 3]> {
    let mut points: Vec<[f64; 3]> = Vec::new();
    for k in 0..m1 {
        let alpha = 2.0 * PI * k as f64 / m1 as f64;
        for j in 0..m2 {
            let beta = -PI / 2.0 + j as f64 * PI / (m2 - 1) as f64;
            let p = [
                alpha.cos() * beta.cos(),
                alpha.sin() * beta.cos(),
                beta.sin(),
            ];
            let duplicate = points.iter().any(|q| {
                let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
                norm(&d) < 1e-9
            });
            if !duplicate {
                points.push(p);
            }
        }
    }
    points
}

/// Partition of ℝ³ into the simplicial cones over the triangulated facets of
/// the polytope with vertices on the α/β sphere grid.
pub fn sphere_partition(m1: usize, m2: usize) -> Result<ConicPartition> {
    sphere_partition_with(m1, m2, FacetMode::Triangulated)
}

/// Partition of ℝ³ into the cones over the hull facets of the sphere grid.
pub fn sphere_partition_with(m1: usize, m2: usize, mode: FacetMode) -> Result<ConicPartition> {
    if m1 < 3 || m2 < 2 {
        return Err(Error::Geometry(format!(
            "sphere partition needs m1 >= 3 and m2 >= 2, got ({m1}, {m2})"
        )));
    }
    let points = sphere_grid_points(m1, m2);
    if points.len() < 4 {
        return Err(Error::Geometry(format!(
            "only {} distinct grid points; the hull is degenerate",
            points.len()
        )));
    }
    let facets = convex_hull_facets(&points)?;

    let mut polygons: Vec<Vec<usize>> = Vec::new();
    for facet in &facets {
        let verts = &facet.vertices;
        match mode {
            FacetMode::Facets => polygons.push(verts.clone()),
            FacetMode::Triangulated => {
                let start = (0..verts.len())
                    .min_by(|&a, &b| lex_cmp(&points[verts[a]], &points[verts[b]]))
                    .expect("facet has vertices");
                let k = verts.len();
                let rotated: Vec<usize> = (0..k).map(|i| verts[(start + i) % k]).collect();
                for i in 1..k - 1 {
                    polygons.push(vec![rotated[0], rotated[i], rotated[i + 1]]);
                }
            }
        }
    }
    build_partition(&points, &polygons)
}

fn lex_cmp(a: &[f64; 3], b: &[f64; 3]) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

fn build_partition(points: &[[f64; 3]], polygons: &[Vec<usize>]) -> Result<ConicPartition> {
    let cones = polygons
        .iter()
        .map(|poly| PolyhedralCone::polygonal(poly.iter().map(|&v| points[v].to_vec()).collect()))
        .collect::<Result<Vec<_>>>()?;

    // edge (sorted vertex pair) -> cones having it as a boundary edge
    let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ci, poly) in polygons.iter().enumerate() {
        let k = poly.len();
        for i in 0..k {
            let (a, b) = (poly[i], poly[(i + 1) % k]);
            edges.entry((a.min(b), a.max(b))).or_default().push(ci);
        }
    }
    let mut adjacency = Vec::new();
    for ((a, b), owners) in edges {
        if owners.len() != 2 {
            return Err(Error::Geometry(format!(
                "hull edge ({a}, {b}) is shared by {} cones",
                owners.len()
            )));
        }
        let (first, second) = (owners[0].min(owners[1]), owners[0].max(owners[1]));
        let ra = points[a].to_vec();
        let rb = points[b].to_vec();
        let mut normal = normalized(&cross(&ra, &rb));
        let centre: Vec<f64> = (0..3)
            .map(|k| cones[second].rays().iter().map(|r| r[k]).sum())
            .collect();
        if dot(&normal, &centre) < 0.0 {
            normal.iter_mut().for_each(|x| *x = -*x);
        }
        let basis = DMatrix::from_fn(3, 2, |i, j| if j == 0 { ra[i] } else { rb[i] });
        adjacency.push(Adjacency {
            first,
            second,
            basis,
            normal,
            facet_rays: vec![ra, rb],
        });
    }
    Ok(ConicPartition::new(3, cones, adjacency))
}
