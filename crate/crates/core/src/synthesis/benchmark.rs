use crate::parallel::Execution;

use super::{solve, Backend, SynthesisOptions, SynthesisProblem, SynthesisResult, TemplateSpec};

/// Benchmark templates in table order.
pub fn benchmark_specs() -> Vec<TemplateSpec> {
    vec![
        TemplateSpec::Ellipsoid,
        TemplateSpec::Polyset { degree: 4 },
        TemplateSpec::Polyset { degree: 6 },
        TemplateSpec::Polyset { degree: 10 },
        TemplateSpec::Polyset { degree: 20 },
        TemplateSpec::Piecewise { m1: 4, m2: 3 },
        TemplateSpec::Piecewise { m1: 8, m2: 5 },
        TemplateSpec::Baseline,
    ]
}

/// Accepted `γ` interval for the benchmark, `None` when no value is required.
pub fn expected_range(spec: TemplateSpec) -> Option<(f64, f64)> {
    match spec {
        TemplateSpec::Ellipsoid => Some((0.79, 0.83)),
        TemplateSpec::Polyset { degree: 2 } => Some((0.79, 0.83)),
        TemplateSpec::Polyset { degree: 4 } => Some((0.89, 0.93)),
        TemplateSpec::Polyset { degree: 6 } => Some((0.91, 0.95)),
        TemplateSpec::Polyset { degree: 10 } => Some((0.93, 0.99)),
        TemplateSpec::Polyset { degree: 20 } => Some((0.95, 1.01)),
        TemplateSpec::Piecewise { m1: 4, m2: 3 } => Some((0.87, 0.91)),
        TemplateSpec::Piecewise { m1: 8, m2: 5 } => Some((0.90, 0.94)),
        _ => None,
    }
}

/// One row of the benchmark table.
#[derive(Clone, Debug)]
pub struct BenchmarkEntry {
    pub spec: TemplateSpec,
    pub outcome: Result<SynthesisResult, String>,
}

impl BenchmarkEntry {
    pub fn gamma(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.gamma)
    }

    pub fn verified(&self) -> bool {
        self.outcome.as_ref().is_ok_and(SynthesisResult::verified)
    }

    pub fn within_range(&self) -> Option<bool> {
        let (lo, hi) = expected_range(self.spec)?;
        Some(self.gamma().is_some_and(|g| g >= lo && g <= hi))
    }
}

/// Solves every spec on the benchmark problem, one solver per entry; entries
/// run in parallel when `exec` allows and come back in input order.
pub fn run_benchmark(specs: &[TemplateSpec], backend: &Backend, options: &SynthesisOptions, exec: Execution) -> Vec<BenchmarkEntry> {
    exec.map(specs, |&spec| {
        let outcome = solve(&SynthesisProblem::benchmark(spec), backend, options).map_err(|e| e.to_string());
        if let Err(e) = &outcome {
            log::warn!("{}: {e}", spec.label());
        }
        BenchmarkEntry { spec, outcome }
    })
}
