//! Incremental convex hull of a small point set in ℝ³.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, norm};

const PLANE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
struct Face {
    v: [usize; 3],
    normal: [f64; 3],
    offset: f64,
    alive: bool,
}

impl Face {
    fn new(points: &[[f64; 3]], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let ab = sub(&b, &a);
        let ac = sub(&c, &a);
        let n = cross(&ab, &ac);
        let len = norm(&n);
        let normal = [n[0] / len, n[1] / len, n[2] / len];
        Self {
            v,
            normal,
            offset: dot(&normal, &a),
            alive: true,
        }
    }

    fn distance(&self, p: &[f64; 3]) -> f64 {
        dot(&self.normal, p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [
            (self.v[0], self.v[1]),
            (self.v[1], self.v[2]),
            (self.v[2], self.v[0]),
        ]
    }
}

/// Planar facet of the hull: vertex indices in counter-clockwise order seen
/// from outside, plus the outward unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HullFacet {
    pub vertices: Vec<usize>,
    pub normal: [f64; 3],
}

/// Convex hull facets of `points`, with coplanar triangles merged into polygons.
///
/// Points are inserted in the given order, so the output is deterministic.
pub fn convex_hull_facets(points: &[[f64; 3]]) -> Result<Vec<HullFacet>> {
    let faces = hull_triangles(points)?;
    Ok(merge_coplanar(points, &faces))
}

fn hull_triangles(points: &[[f64; 3]]) -> Result<Vec<Face>> {
    let degenerate = || Error::Geometry("point set does not span R^3".into());
    if points.len() < 4 {
        return Err(degenerate());
    }
    let scale = points.iter().map(|p| norm(p)).fold(0.0, f64::max).max(1.0);
    let tol = PLANE_TOL * scale;

    let i0 = 0;
    let i1 = (1..points.len())
        .find(|&i| norm(&sub(&points[i], &points[i0])) > tol)
        .ok_or_else(degenerate)?;
    let i2 = (1..points.len())
        .find(|&i| {
            norm(&cross(
                &sub(&points[i1], &points[i0]),
                &sub(&points[i], &points[i0]),
            )) > tol
        })
        .ok_or_else(degenerate)?;
    let base = Face::new(points, [i0, i1, i2]);
    let i3 = (1..points.len())
        .find(|&i| base.distance(&points[i]).abs() > tol)
        .ok_or_else(degenerate)?;

    let mut faces: Vec<Face> = Vec::new();
    let centroid: [f64; 3] = std::array::from_fn(|k| {
        (points[i0][k] + points[i1][k] + points[i2][k] + points[i3][k]) / 4.0
    });
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut face = Face::new(points, tri);
        if face.distance(&centroid) > 0.0 {
            face = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(face);
    }

    for (p_idx, p) in points.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&p_idx) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.distance(p) > tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, f) in faces.iter().enumerate().filter(|(_, f)| f.alive) {
            for e in f.edges() {
                owner.insert(e, i);
            }
        }
        let mut horizon = Vec::new();
        for &fi in &visible {
            for (a, b) in faces[fi].edges() {
                let across = owner.get(&(b, a)).copied();
                if across.is_some_and(|j| !visible.contains(&j)) {
                    horizon.push((a, b));
                }
            }
        }
        for &fi in &visible {
            faces[fi].alive = false;
        }
        for (a, b) in horizon {
            faces.push(Face::new(points, [a, b, p_idx]));
        }
    }
    Ok(faces.into_iter().filter(|f| f.alive).collect())
}

fn merge_coplanar(points: &[[f64; 3]], faces: &[Face]) -> Vec<HullFacet> {
    let n = faces.len();
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for e in f.edges() {
            owner.insert(e, i);
        }
    }
    let coplanar = |a: &Face, b: &Face| {
        dot(&a.normal, &b.normal) > 1.0 - PLANE_TOL && (a.offset - b.offset).abs() < PLANE_TOL
    };

    let mut group = vec![usize::MAX; n];
    let mut facets = Vec::new();
    for start in 0..n {
        if group[start] != usize::MAX {
            continue;
        }
        let id = facets.len();
        let mut stack = vec![start];
        group[start] = id;
        let mut members = Vec::new();
        while let Some(fi) = stack.pop() {
            members.push(fi);
            for (a, b) in faces[fi].edges() {
                if let Some(&j) = owner.get(&(b, a)) {
                    if group[j] == usize::MAX && coplanar(&faces[fi], &faces[j]) {
                        group[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        let mut verts: Vec<usize> = members.iter().flat_map(|&fi| faces[fi].v).collect();
        verts.sort_unstable();
        verts.dedup();
        let normal = faces[start].normal;
        order_ccw(points, &mut verts, &normal);
        facets.push(HullFacet {
            vertices: verts,
            normal,
        });
    }
    facets
}

/// Sorts polygon vertices counter-clockwise around `normal`.
fn order_ccw(points: &[[f64; 3]], verts: &mut [usize], normal: &[f64; 3]) {
    let k = verts.len() as f64;
    let centre: [f64; 3] = std::array::from_fn(|c| verts.iter().map(|&v| points[v][c]).sum::<f64>() / k);
    let u = sub(&points[verts[0]], &centre);
    let ulen = norm(&u);
    let u = [u[0] / ulen, u[1] / ulen, u[2] / ulen];
    let w = cross(normal, &u);
    let angle = |v: usize| {
        let d = sub(&points[v], &centre);
        dot(&d, &w).atan2(dot(&d, &u)).rem_euclid(std::f64::consts::TAU)
    };
    verts.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
