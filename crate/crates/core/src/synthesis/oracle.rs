//! Closed-form maximal controlled invariant set of the benchmark and its polar.

const EXACT: f64 = 1e-12;

/// Membership in `{x ∈ [−1,1]² : x₁x₂ ≤ 0 or |x₁| ≤ 1 − x₂²/2}`.
pub fn maximal_set_contains(x: &[f64; 2]) -> bool {
    maximal_set_contains_within(x, EXACT)
}

/// Same test with every inequality relaxed by `tol`.
pub fn maximal_set_contains_within(x: &[f64; 2], tol: f64) -> bool {
    let [x1, x2] = *x;
    if x1.abs() > 1.0 + tol || x2.abs() > 1.0 + tol {
        return false;
    }
    x1 * x2 <= tol || x1.abs() <= 1.0 - x2 * x2 / 2.0 + tol
}

/// Membership in the polar of the maximal set, as the union of three pieces.
pub fn maximal_polar_contains(y: &[f64; 2]) -> bool {
    let [x1, x2] = *y;
    let tol = EXACT;
    let sign = |v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 };
    let first = x1 * x2 <= tol && (x1 - x2).abs() <= 1.0 + tol;
    let second = x1 * (x1 - x2) <= tol && (x1 / 2.0 + x2).abs() <= 1.0 + tol;
    let third = x2 * (x2 - x1) <= tol && (2.0 * x1 - sign(x1)).powi(2) + 2.0 * x2 * x2 <= 1.0 + tol;
    first || second || third
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primal_examples() {
        assert!(maximal_set_contains(&[0.5, -0.5]));
        assert!(!maximal_set_contains(&[0.9, 0.5]));
        assert!(!maximal_set_contains(&[1.0, 1.0]));
        assert!(maximal_set_contains(&[0.875, 0.5]));
        assert!(!maximal_set_contains(&[-1.1, 0.5]));
    }

    #[test]
    fn polar_examples() {
        assert!(maximal_polar_contains(&[0.0, 0.0]));
        assert!(maximal_polar_contains(&[0.5, -0.5]));
        assert!(!maximal_polar_contains(&[2.0, 0.0]));
    }

    #[test]
    fn polar_pairs_with_primal() {
        // ⟨x, y⟩ ≤ 1 for sampled members of both sets
        let grid: Vec<f64> = (0..=40).map(|k| -1.0 + k as f64 / 20.0).collect();
        let primal: Vec<[f64; 2]> = grid
            .iter()
            .flat_map(|&a| grid.iter().map(move |&b| [a, b]))
            .filter(maximal_set_contains)
            .collect();
        let polar: Vec<[f64; 2]> = grid
            .iter()
            .flat_map(|&a| grid.iter().map(move |&b| [a, b]))
            .filter(maximal_polar_contains)
            .collect();
        assert!(!primal.is_empty() && !polar.is_empty());
        for x in &primal {
            for y in &polar {
                assert!(x[0] * y[0] + x[1] * y[1] <= 1.0 + 1e-9, "{x:?} {y:?}");
            }
        }
    }
}
