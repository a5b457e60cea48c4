//! JSON problem configuration.

use std::path::Path;

use invset::geometry::{polytope_d, Polytope};
use invset::synthesis::{SynthesisProblem, TemplateSpec};
use invset::systems::ControlSystem;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Problem file as written by the user. Matrices are row-major and the
/// projection indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "box")]
    pub safe_box: Vec<[f64; 2]>,
    #[serde(deserialize_with = "strict_template")]
    pub template: TemplateSpec,
    #[serde(rename = "D_vertices", default, skip_serializing_if = "Option::is_none")]
    pub d_vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<usize>>,
    /// Sampling seed for verification; `INVSET_SEED` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemConfig {
    /// The lifted triple integrator on `[−1, 1]³` with the given template.
    pub fn benchmark(template: TemplateSpec) -> Self {
        Self {
            a: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]],
            b: vec![vec![0.0], vec![0.0], vec![1.0]],
            safe_box: vec![[-1.0, 1.0]; 3],
            template,
            d_vertices: None,
            projection: None,
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Input(format!("config key `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed(&self) -> u64 {
        invset::sampling::seed_or(self.seed.unwrap_or(0))
    }

    /// Validated synthesis problem.
    pub fn problem(&self) -> Result<SynthesisProblem, CliError> {
        let n = self.a.len();
        let a = matrix("A", &self.a, Some(n))?;
        if self.b.len() != n {
            return Err(key_error("B", format!("has {} rows, A has {n}", self.b.len())));
        }
        let b = matrix("B", &self.b, None)?;
        let system = ControlSystem::new(a, b).map_err(|e| key_error("A", e.to_string()))?;

        if self.safe_box.len() != n {
            return Err(key_error("box", format!("has {} axes, the state has {n}", self.safe_box.len())));
        }
        let inner_polytope = match &self.d_vertices {
            None => polytope_d(),
            Some(v) => Polytope::new(v.iter().map(|p| p.to_vec()).collect()).map_err(|e| key_error("D_vertices", e.to_string()))?,
        };
        let projection_dims = match self.projection.as_deref() {
            None => [0, 1],
            Some(&[i, j]) if i >= 1 && j >= 1 => [i - 1, j - 1],
            Some(other) => {
                return Err(key_error(
                    "projection",
                    format!("expected two 1-based indices, got {other:?}"),
                ))
            }
        };
        let problem = SynthesisProblem {
            system,
            safe_box: self.safe_box.clone(),
            template: self.template,
            inner_polytope,
            projection_dims,
        };
        problem.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(problem)
    }
}

/// Template object with only the keys its kind uses.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    kind: String,
    degree: Option<u32>,
    m1: Option<usize>,
    m2: Option<usize>,
}

fn strict_template<'de, D: serde::Deserializer<'de>>(de: D) -> Result<TemplateSpec, D::Error> {
    use serde::de::Error;
    let raw = RawTemplate::deserialize(de)?;
    let spec = match (raw.kind.as_str(), raw.degree, raw.m1, raw.m2) {
        ("ellipsoid", None, None, None) => TemplateSpec::Ellipsoid,
        ("baseline", None, None, None) => TemplateSpec::Baseline,
        ("polyset", Some(degree), None, None) => TemplateSpec::Polyset { degree },
        ("piecewise", None, Some(m1), Some(m2)) => TemplateSpec::Piecewise { m1, m2 },
        ("ellipsoid" | "baseline", ..) => return Err(D::Error::custom(format!("`{}` takes no parameters", raw.kind))),
        ("polyset", ..) => return Err(D::Error::custom("`polyset` takes exactly `degree`")),
        ("piecewise", ..) => return Err(D::Error::custom("`piecewise` takes exactly `m1` and `m2`")),
        (other, ..) => {
            return Err(D::Error::custom(format!(
                "unknown kind `{other}`, expected ellipsoid, polyset, piecewise or baseline"
            )))
        }
    };
    Ok(spec)
}

fn key_error(key: &str, message: String) -> CliError {
    CliError::Input(format!("config key `{key}`: {message}"))
}

fn matrix(key: &str, rows: &[Vec<f64>], cols: Option<usize>) -> Result<DMatrix<f64>, CliError> {
    let width = cols.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(key_error(
                key,
                format!("row {} has {} entries, expected {width}", i + 1, row.len()),
            ));
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(key_error(key, format!("row {} has non-finite entry {x}", i + 1)));
        }
    }
    if rows.is_empty() && key == "A" {
        return Err(key_error(key, "is empty".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_config_builds_benchmark_problem() {
        let problem = ProblemConfig::benchmark(TemplateSpec::Ellipsoid).problem().unwrap();
        assert_eq!(problem, SynthesisProblem::benchmark(TemplateSpec::Ellipsoid));
        assert_eq!(problem.oracle_scale(), Some(1.0));
    }

    #[test]
    fn round_trip_is_identity() {
        let mut cfg = ProblemConfig::benchmark(TemplateSpec::Polyset { degree: 4 });
        cfg.projection = Some(vec![1, 3]);
        cfg.d_vertices = Some(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]);
        cfg.seed = Some(7);
        let back = ProblemConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), cfg.to_json());
    }

    #[test]
    fn rejections_name_the_key() {
        let ragged = r#"{"A": [[0,1,0],[0,0],[0,0,0]], "B": [[0],[0],[1]],
            "box": [[-1,1],[-1,1],[-1,1]], "template": {"kind": "ellipsoid"}}"#;
        let err = ProblemConfig::from_json(ragged).unwrap().problem().unwrap_err();
        assert!(err.to_string().contains("`A`"), "{err}");

        let unknown = r#"{"A": [[0]], "B": [[1]], "box": [[-1,1]], "template": {"kind": "ellipsoid"}, "Q": 1}"#;
        let err = ProblemConfig::from_json(unknown).unwrap_err();
        assert!(err.to_string().contains("unknown field `Q`"), "{err}");

        let bad_degree = r#"{"A": [[0]], "B": [[1]], "box": [[-1,1]], "template": {"kind": "polyset", "degree": "four"}}"#;
        let err = ProblemConfig::from_json(bad_degree).unwrap_err();
        assert!(err.to_string().contains("template"), "{err}");

        let extra = r#"{"A": [[0]], "B": [[1]], "box": [[-1,1]], "template": {"kind": "ellipsoid", "degree": 2}}"#;
        assert!(ProblemConfig::from_json(extra).is_err());

        let mut cfg = ProblemConfig::benchmark(TemplateSpec::Ellipsoid);
        cfg.projection = Some(vec![0, 1]);
        assert!(cfg.problem().unwrap_err().to_string().contains("`projection`"));
        cfg.projection = Some(vec![1, 2]);
        cfg.safe_box[1] = [-0.5, 1.0];
        assert!(cfg.problem().is_err());
    }
}
