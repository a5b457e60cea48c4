use invset::synthesis::{solve, Backend, SynthesisOptions, SynthesisProblem, TemplateSpec};

fn gamma(problem: &SynthesisProblem) -> f64 {
    let r = solve(problem, &Backend::Reference, &SynthesisOptions::default()).unwrap();
    assert!(r.verified(), "{} at box scale {}", problem.template.label(), problem.box_scale());
    r.gamma
}

#[test]
fn gamma_scales_with_the_box() {
    for spec in [TemplateSpec::Ellipsoid, TemplateSpec::Polyset { degree: 4 }, TemplateSpec::Piecewise { m1: 4, m2: 3 }] {
        let one = gamma(&SynthesisProblem::benchmark(spec));
        for s in [0.5, 2.0] {
            let scaled = gamma(&SynthesisProblem::benchmark(spec).with_box_scale(s));
            assert!((scaled - s * one).abs() <= 1e-4, "{}: s = {s}, {scaled} vs {}", spec.label(), s * one);
        }
    }
}
