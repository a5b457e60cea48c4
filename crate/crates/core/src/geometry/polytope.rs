use crate::error::{Error, Result};

/// Convex hull of a finite vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Geometry("polytope needs at least one vertex".into()))?;
        if let Some(bad) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// `max_k ⟨w, v_k⟩`
    pub fn support(&self, w: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }
}

/// The inner quadrilateral used as the benchmark's scaling target.
pub fn polytope_d() -> Polytope {
    let s = 3f64.sqrt();
    Polytope {
        vertices: vec![
            vec![-1.0 + s, -1.0 + s],
            vec![-1.0, 1.0],
            vec![1.0 - s, 1.0 - s],
            vec![1.0, -1.0],
        ],
    }
}
