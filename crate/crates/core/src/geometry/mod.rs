//! Polyhedral cones, conic partitions of ℝ³ from sphere grids, polytopes and
//! orthogonal-complement projections.

mod cone;
mod generators;
mod hull;
mod partition;
mod polytope;
mod projection;

pub use cone::{facet_normals_from_rays, PolyhedralCone, CONTAINMENT_TOL};
pub use generators::{cone_generators, ConeGenerators};
pub use hull::{convex_hull_facets, HullFacet};
pub use partition::{
    sphere_grid_points, sphere_partition, sphere_partition_with, Adjacency, ConicPartition,
    FacetMode, PartitionReport,
};
pub use polytope::{polytope_d, Polytope};
pub use projection::{complement_projection, numerical_rank};
