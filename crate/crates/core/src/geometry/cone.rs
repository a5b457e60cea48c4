use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, norm, normalized};

/// Containment tolerance on `G y ≥ 0` for unit-norm `y`.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// Solid polyhedral cone given both by generators and by inward facet normals,
/// `cone(rays) = { y : G y ≥ 0 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedralCone {
    rays: Vec<Vec<f64>>,
    facet_normals: Vec<Vec<f64>>,
}

impl PolyhedralCone {
    /// Simplicial cone generated by `dim` linearly independent rays.
    pub fn simplicial(rays: Vec<Vec<f64>>) -> Result<Self> {
        let facet_normals = facet_normals_from_rays(&rays)?;
        Ok(Self {
            rays: rays.iter().map(|r| normalized(r)).collect(),
            facet_normals,
        })
    }

    /// Pointed cone in ℝ³ over a convex polygon of rays listed in cyclic order.
    pub fn polygonal(rays: Vec<Vec<f64>>) -> Result<Self> {
        if rays.len() == 3 {
            return Self::simplicial(rays);
        }
        if rays.len() < 3 || rays.iter().any(|r| r.len() != 3) {
            return Err(Error::Geometry(
                "polygonal cones need at least three rays in R^3".into(),
            ));
        }
        let rays: Vec<Vec<f64>> = rays.iter().map(|r| normalized(r)).collect();
        let centre: Vec<f64> = (0..3).map(|k| rays.iter().map(|r| r[k]).sum()).collect();
        let k = rays.len();
        let mut normals = Vec::with_capacity(k);
        for i in 0..k {
            let n = cross(&rays[i], &rays[(i + 1) % k]);
            let len = norm(&n);
            if len < 1e-12 {
                return Err(Error::Geometry("consecutive rays are parallel".into()));
            }
            let sign = if dot(&n, &centre) < 0.0 { -1.0 } else { 1.0 };
            normals.push(n.iter().map(|x| sign * x / len).collect());
        }
        let cone = Self {
            rays,
            facet_normals: normals,
        };
        if let Some(worst) = cone
            .rays
            .iter()
            .map(|r| cone.min_margin(r))
            .find(|&m| m < -CONTAINMENT_TOL)
        {
            return Err(Error::Geometry(format!(
                "ray list is not convex in cyclic order (margin {worst:e})"
            )));
        }
        Ok(cone)
    }

    /// Cone with explicitly supplied generators and normals (e.g. half-spaces).
    pub fn from_parts(rays: Vec<Vec<f64>>, facet_normals: Vec<Vec<f64>>) -> Self {
        Self {
            rays: rays.iter().map(|r| normalized(r)).collect(),
            facet_normals: facet_normals.iter().map(|g| normalized(g)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rays.first().map_or(0, Vec::len)
    }

    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    pub fn facet_normals(&self) -> &[Vec<f64>] {
        &self.facet_normals
    }

    /// Ray matrix with generators as columns.
    pub fn ray_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, self.rays.len(), |i, j| self.rays[j][i])
    }

    /// `min_k ⟨g_k, y⟩ / ‖y‖`; nonnegative iff `y` lies in the cone.
    pub fn min_margin(&self, y: &[f64]) -> f64 {
        let len = norm(y);
        self.facet_normals
            .iter()
            .map(|g| dot(g, y) / len)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.min_margin(y) >= -CONTAINMENT_TOL
    }
}

/// Inward unit facet normals of the simplicial cone spanned by `rays`: the rows
/// of the inverse ray matrix, normalised.
pub fn facet_normals_from_rays(rays: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = rays.len();
    if n == 0 || rays.iter().any(|r| r.len() != n) {
        return Err(Error::Geometry(format!(
            "a simplicial cone in R^{} needs exactly that many rays",
            rays.first().map_or(0, Vec::len)
        )));
    }
    let m = DMatrix::from_fn(n, n, |i, j| rays[j][i]);
    let scale = m.amax();
    let inv = m
        .clone()
        .try_inverse()
        .filter(|_| m.determinant().abs() > 1e-12 * scale.powi(n as i32))
        .ok_or_else(|| Error::Geometry("ray matrix is singular".into()))?;
    Ok((0..n)
        .map(|i| {
            let row: Vec<f64> = inv.row(i).iter().copied().collect();
            normalized(&row)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; 3];
        v[i] = 1.0;
        v
    }

    #[test]
    fn orthant_is_self_dual() {
        let g = facet_normals_from_rays(&[e(0), e(1), e(2)]).unwrap();
        assert_eq!(g, vec![e(0), e(1), e(2)]);
    }

    #[test]
    fn skewed_simplicial_cone() {
        let rays = vec![e(0), e(1), vec![1.0, 1.0, 1.0]];
        let g = facet_normals_from_rays(&rays).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expected = [vec![s, 0.0, -s], vec![0.0, s, -s], vec![0.0, 0.0, 1.0]];
        for (got, want) in g.iter().zip(&expected) {
            for (a, b) in got.iter().zip(want) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        for r in &rays {
            assert!(g.iter().all(|gk| dot(gk, r) >= -1e-15));
        }
    }

    #[test]
    fn normals_are_scale_invariant() {
        let scaled = facet_normals_from_rays(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ])
        .unwrap();
        assert_eq!(scaled, vec![e(0), e(1), e(2)]);
    }

    #[test]
    fn singular_rays_rejected() {
        assert!(facet_normals_from_rays(&[e(0), e(1), vec![1.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn polygonal_square_cone() {
        let rays = vec![
            vec![1.0, 1.0, 1.0],
            vec![-1.0, 1.0, 1.0],
            vec![-1.0, -1.0, 1.0],
            vec![1.0, -1.0, 1.0],
        ];
        let cone = PolyhedralCone::polygonal(rays).unwrap();
        assert_eq!(cone.facet_normals().len(), 4);
        assert!(cone.contains(&[0.0, 0.0, 1.0]));
        assert!(cone.contains(&[1.0, 1.0, 1.0]));
        assert!(!cone.contains(&[0.0, 0.0, -1.0]));
        assert!(!cone.contains(&[2.0, 0.0, 1.0]));
    }
}
