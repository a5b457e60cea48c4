//! Generator enumeration for cones `{ z : H z ≥ 0 }` of dimension at most three.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, full_right_svd, norm, normalized};

const FEAS_TOL: f64 = 1e-10;

/// Generators of `{ z ∈ ℝᵈ : ⟨h, z⟩ ≥ 0 for every h }`.
///
/// Lines in the lineality space are returned as `±` ray pairs. `dim` is the
/// dimension of the cone; `0` means the cone is `{0}` and `rays` is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeGenerators {
    pub rays: Vec<Vec<f64>>,
    pub dim: usize,
}

impl ConeGenerators {
    pub fn is_trivial(&self) -> bool {
        self.rays.is_empty()
    }

    /// Generators as the columns of a `d × k` matrix.
    pub fn ray_matrix(&self, ambient: usize) -> DMatrix<f64> {
        DMatrix::from_fn(ambient, self.rays.len(), |i, j| self.rays[j][i])
    }
}

pub fn cone_generators(normals: &[Vec<f64>], ambient: usize) -> Result<ConeGenerators> {
    let normals: Vec<Vec<f64>> = normals
        .iter()
        .filter(|h| norm(h) > 1e-12)
        .map(|h| normalized(h))
        .collect();
    if normals.iter().any(|h| h.len() != ambient) {
        return Err(Error::DimensionMismatch {
            expected: ambient,
            got: normals.iter().map(Vec::len).find(|&l| l != ambient).unwrap_or(0),
        });
    }
    if ambient == 0 {
        return Ok(ConeGenerators {
            rays: Vec::new(),
            dim: 0,
        });
    }
    if normals.is_empty() {
        return Ok(ConeGenerators {
            rays: signed_axes(ambient),
            dim: ambient,
        });
    }

    let h = DMatrix::from_fn(normals.len(), ambient, |i, j| normals[i][j]);
    let (sv, v_t) = full_right_svd(&h);
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax).count();
    let row_space: Vec<Vec<f64>> = (0..rank).map(|k| v_t.row(k).iter().copied().collect()).collect();
    let lineality: Vec<Vec<f64>> = (rank..ambient)
        .map(|k| v_t.row(k).iter().copied().collect())
        .collect();

    // normals expressed in row-space coordinates
    let reduced: Vec<Vec<f64>> = normals
        .iter()
        .map(|n| row_space.iter().map(|b| dot(b, n)).collect())
        .collect();
    let pointed = pointed_extreme_rays(&reduced, rank)?;

    let mut rays: Vec<Vec<f64>> = pointed
        .iter()
        .map(|c| {
            let mut z = vec![0.0; ambient];
            for (coef, basis) in c.iter().zip(&row_space) {
                for (zi, bi) in z.iter_mut().zip(basis) {
                    *zi += coef * bi;
                }
            }
            normalized(&z)
        })
        .collect();
    let pointed_dim = span_dim(&rays, ambient);
    if rays.is_empty() && lineality.is_empty() {
        return Ok(ConeGenerators {
            rays,
            dim: 0,
        });
    }
    for l in &lineality {
        rays.push(l.clone());
        rays.push(l.iter().map(|x| -x).collect());
    }
    Ok(ConeGenerators {
        rays,
        dim: pointed_dim + lineality.len(),
    })
}

/// Extreme rays of a pointed cone `{ c ∈ ℝʳ : ⟨h, c⟩ ≥ 0 }` whose normals span ℝʳ.
fn pointed_extreme_rays(normals: &[Vec<f64>], rank: usize) -> Result<Vec<Vec<f64>>> {
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    match rank {
        0 => return Ok(Vec::new()),
        1 => {
            candidates.push(vec![1.0]);
            candidates.push(vec![-1.0]);
        }
        2 => {
            for h in normals {
                let perp = normalized(&[-h[1], h[0]]);
                candidates.push(perp.clone());
                candidates.push(perp.iter().map(|x| -x).collect());
            }
        }
        3 => {
            for (i, a) in normals.iter().enumerate() {
                for b in &normals[i + 1..] {
                    let c = cross(a, b);
                    if norm(&c) > 1e-9 {
                        let c = normalized(&c);
                        candidates.push(c.clone());
                        candidates.push(c.iter().map(|x| -x).collect());
                    }
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "generator enumeration in dimension {rank} (at most 3 supported)"
            )))
        }
    }
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        let feasible = normals.iter().all(|h| dot(h, &c) >= -FEAS_TOL);
        let fresh = rays
            .iter()
            .all(|r| r.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > 1e-9);
        if feasible && fresh {
            rays.push(c);
        }
    }
    Ok(rays)
}

fn span_dim(rays: &[Vec<f64>], ambient: usize) -> usize {
    if rays.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(ambient, rays.len(), |i, j| rays[j][i]);
    super::projection::numerical_rank(&m)
}

fn signed_axes(dim: usize) -> Vec<Vec<f64>> {
    let mut rays = Vec::with_capacity(2 * dim);
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; dim];
            r[k] = s;
            rays.push(r);
        }
    }
    rays
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(rays: &[Vec<f64>], v: &[f64]) -> bool {
        rays.iter()
            .any(|r| r.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-9))
    }

    #[test]
    fn positive_quadrant() {
        let g = cone_generators(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        assert_eq!(g.dim, 2);
        assert_eq!(g.rays.len(), 2);
        assert!(contains(&g.rays, &[1.0, 0.0]));
        assert!(contains(&g.rays, &[0.0, 1.0]));
    }

    #[test]
    fn half_plane_has_line_and_inward_ray() {
        let g = cone_generators(&[vec![0.0, 2.0]], 2).unwrap();
        assert_eq!(g.dim, 2);
        assert!(contains(&g.rays, &[1.0, 0.0]));
        assert!(contains(&g.rays, &[-1.0, 0.0]));
        assert!(g.rays.iter().any(|r| r[1] > 0.5));
    }

    #[test]
    fn full_space_and_trivial_cases() {
        let g = cone_generators(&[vec![0.0, 0.0]], 2).unwrap();
        assert_eq!(g.rays.len(), 4);
        assert_eq!(g.dim, 2);

        let opposite = cone_generators(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]], 2)
            .unwrap();
        assert!(opposite.is_trivial());
        assert_eq!(opposite.dim, 0);

        let ray = cone_generators(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        assert_eq!(ray.dim, 1);
        assert_eq!(ray.rays, vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn orthant_in_three_dimensions() {
        let g = cone_generators(
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            3,
        )
        .unwrap();
        assert_eq!(g.dim, 3);
        assert_eq!(g.rays.len(), 3);
        for k in 0..3 {
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            assert!(contains(&g.rays, &e));
        }
    }

    #[test]
    fn wedge_in_three_dimensions() {
        // {x ≥ 0, y ≥ 0}: the z axis is a line
        let g = cone_generators(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 3).unwrap();
        assert_eq!(g.dim, 3);
        assert!(contains(&g.rays, &[0.0, 0.0, 1.0]) || contains(&g.rays, &[0.0, 0.0, -1.0]));
        assert_eq!(g.rays.len(), 4);
    }
}
