use invset::polynomials::{ExponentVector, HomogeneousPolynomial};
use proptest::prelude::*;

/// Random form: `terms` exponent splits of `degree` over `n` variables.
fn form() -> impl Strategy<Value = HomogeneousPolynomial> {
    (1usize..=4, 1u32..=6).prop_flat_map(|(n, degree)| {
        let term = (prop::collection::vec(0u32..=degree, n), -2.0f64..2.0);
        prop::collection::vec(term, 1..8).prop_map(move |raw| {
            let terms = raw.into_iter().map(|(weights, c)| (split(&weights, degree), c));
            HomogeneousPolynomial::from_terms(n, degree, terms).unwrap()
        })
    })
}

/// Exponents summing to `degree`, roughly proportional to `weights`.
fn split(weights: &[u32], degree: u32) -> ExponentVector {
    let mut e = vec![0u32; weights.len()];
    let total: u32 = weights.iter().sum::<u32>().max(1);
    let mut left = degree;
    for (i, w) in weights.iter().enumerate() {
        let k = (w * degree / total).min(left);
        e[i] = k;
        left -= k;
    }
    e[0] += left;
    e.into()
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn euler_identity(p in form(), seed in point(4)) {
        let x = &seed[..p.num_vars()];
        let g = p.evaluate_gradient(x).unwrap();
        let lhs: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
        let rhs = p.degree() as f64 * p.evaluate(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn gradient_matches_central_differences(p in form(), seed in point(4)) {
        let x = &seed[..p.num_vars()];
        let g = p.evaluate_gradient(x).unwrap();
        let h = 1e-5;
        for i in 0..x.len() {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            let fd = (p.evaluate(&plus).unwrap() - p.evaluate(&minus).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "axis {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn homogeneity_under_scaling(p in form(), seed in point(4), t in 0.1f64..3.0) {
        let x = &seed[..p.num_vars()];
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let lhs = p.evaluate(&tx).unwrap();
        let rhs = t.powi(p.degree() as i32) * p.evaluate(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}
