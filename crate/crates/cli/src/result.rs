//! JSON result file: recovered template, solver outcome and verification summary.

use std::collections::BTreeMap;
use std::path::Path;

use invset::polynomials::{ExponentVector, HomogeneousPolynomial};
use invset::synthesis::{SynthesisResult, Verification};
use invset::templates::{EllipsoidTemplate, PartitionSpec, PiecewiseTemplate, PolysetTemplate, SetTemplate};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub version: String,
    pub config: ProblemConfig,
    pub gamma: f64,
    pub template: Option<TemplatePayload>,
    pub solver: SolverSummary,
    pub verification: Option<VerificationSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TemplatePayload {
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    Polyset {
        num_vars: usize,
        degree: u32,
        /// Exponent key `"e1,e2,…"` to coefficient.
        coefficients: BTreeMap<String, f64>,
    },
    Piecewise {
        partition: PartitionSpec,
        #[serde(rename = "Q")]
        q: Vec<Vec<Vec<f64>>>,
    },
}

/// Non-finite values are written as `null` (JSON has no NaN) and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSummary {
    pub backend: String,
    pub status: String,
    pub iterations: usize,
    #[serde(with = "nullable")]
    pub objective: f64,
    #[serde(with = "nullable")]
    pub primal_residual: f64,
    #[serde(with = "nullable")]
    pub dual_residual: f64,
    #[serde(with = "nullable")]
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSummary {
    pub passed: bool,
    pub failures: Vec<String>,
    #[serde(with = "nullable")]
    pub invariance_max_violation: f64,
    pub invariance_samples: usize,
    #[serde(with = "nullable")]
    pub convexity_max_violation: f64,
    #[serde(with = "nullable")]
    pub box_max_excess: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_outside: Option<usize>,
    pub tol: f64,
}

impl VerificationSummary {
    pub fn new(v: &Verification) -> Self {
        Self {
            passed: v.passed,
            failures: v.failures().iter().map(|s| s.to_string()).collect(),
            invariance_max_violation: finite_or_zero(v.invariance.max_violation),
            invariance_samples: v.invariance.samples,
            convexity_max_violation: finite_or_zero(v.convexity.max_violation),
            box_max_excess: v.containment.max_excess,
            oracle_outside: v.oracle.as_ref().map(|o| o.outside),
            tol: v.invariance.tol,
        }
    }
}

/// JSON has no infinities; an empty sample reports zero.
fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(key: &str, r: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) {
        return Err(CliError::Input(format!("template `{key}` is not a square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

impl TemplatePayload {
    pub fn new(t: &SetTemplate) -> Self {
        match t {
            SetTemplate::Ellipsoid(e) => TemplatePayload::Ellipsoid { q: rows(e.q()) },
            SetTemplate::Polyset(p) => {
                let poly = p.polynomial();
                TemplatePayload::Polyset {
                    num_vars: poly.num_vars(),
                    degree: poly.degree(),
                    coefficients: poly.terms().map(|(m, c)| (m.to_key(), *c)).collect(),
                }
            }
            SetTemplate::Piecewise(p) => TemplatePayload::Piecewise {
                partition: p.spec(),
                q: p.matrices().iter().map(rows).collect(),
            },
        }
    }

    /// Rebuilds the template, re-checking its type invariants.
    pub fn template(&self) -> Result<SetTemplate, CliError> {
        let invalid = |e: invset::Error| CliError::Input(format!("template payload: {e}"));
        match self {
            TemplatePayload::Ellipsoid { q } => Ok(SetTemplate::Ellipsoid(
                EllipsoidTemplate::new(from_rows("Q", q)?).map_err(invalid)?,
            )),
            TemplatePayload::Polyset {
                num_vars,
                degree,
                coefficients,
            } => {
                let terms = coefficients
                    .iter()
                    .map(|(k, c)| {
                        ExponentVector::from_key(k)
                            .map(|e| (e, *c))
                            .ok_or_else(|| CliError::Input(format!("template coefficient key `{k}` is not an exponent list")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let p = HomogeneousPolynomial::from_terms(*num_vars, *degree, terms).map_err(invalid)?;
                Ok(SetTemplate::Polyset(PolysetTemplate::new(p).map_err(invalid)?))
            }
            TemplatePayload::Piecewise { partition, q } => {
                let q = q.iter().map(|m| from_rows("Q", m)).collect::<Result<Vec<_>, _>>()?;
                Ok(SetTemplate::Piecewise(PiecewiseTemplate::new(*partition, q).map_err(invalid)?))
            }
        }
    }
}

impl ResultFile {
    pub fn new(config: &ProblemConfig, backend: &str, r: &SynthesisResult) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            gamma: r.gamma,
            template: r.template.as_ref().map(TemplatePayload::new),
            solver: SolverSummary {
                backend: backend.to_string(),
                status: r.solver.status.to_string(),
                iterations: r.solver.iterations,
                objective: r.solver.objective,
                primal_residual: r.solver.primal_residual,
                dual_residual: r.solver.dual_residual,
                gap: r.solver.gap,
            },
            verification: r.verification.as_ref().map(VerificationSummary::new),
            error: r.error.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Input(format!("result key `{path}`: {}", e.into_inner()))
        })?;
        if let Some(t) = &file.template {
            t.template()?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn template(&self) -> Result<SetTemplate, CliError> {
        self.template
            .as_ref()
            .ok_or_else(|| CliError::Input("result file has no template".into()))?
            .template()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_residuals_round_trip_as_null() {
        let summary = SolverSummary {
            backend: "sdpa-file".into(),
            status: "inaccurate".into(),
            iterations: 40,
            objective: -0.5,
            primal_residual: 1e-7,
            dual_residual: f64::NAN,
            gap: f64::INFINITY,
        };
        let text = serde_json::to_string(&summary).unwrap();
        assert!(text.contains("\"dual_residual\":null"), "{text}");
        let back: SolverSummary = serde_json::from_str(&text).unwrap();
        assert!(back.dual_residual.is_nan() && back.gap.is_nan());
        assert_eq!(back.primal_residual, 1e-7);
    }
}
