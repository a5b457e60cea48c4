//! Deterministic direction sampling.

use std::f64::consts::PI;

use rand::Rng;

/// Environment variable overriding the default sampling seed.
pub const SEED_ENV: &str = "INVSET_SEED";

/// Sampling seed: `INVSET_SEED` if set and parseable, otherwise `default`.
pub fn seed_or(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

/// `count` unit vectors in ℝᵈ from a Fibonacci-type low-discrepancy sequence.
///
/// d = 1 alternates ±1, d = 2 uses evenly spaced angles, d = 3 the golden
/// spiral. Higher dimensions fall back to seeded random directions.
pub fn fibonacci_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => (0..count)
            .map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }])
            .collect(),
        2 => {
            // offset the grid by a seed-dependent fraction of a step
            let shift = (seed as f64 * 0.618_033_988_749_895).fract();
            (0..count)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + shift) / count as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let shift = (seed as f64 * 0.618_033_988_749_895).fract() * 2.0 * PI;
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64 + shift;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| random_unit_vector(&mut rng, dim)).collect()
        }
    }
}

/// Uniformly distributed unit vector in ℝᵈ (rejection from the cube).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Evenly spaced unit vectors `(cos θ, sin θ)` with `θ = 2πk / count`.
pub fn circle_directions(count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn directions_are_unit() {
        for dim in 1..=4 {
            for v in fibonacci_directions(dim, 50, 3) {
                let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(fibonacci_directions(3, 20, 0), fibonacci_directions(3, 20, 0));
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        assert_eq!(random_unit_vector(&mut a, 3), random_unit_vector(&mut b, 3));
    }

    #[test]
    fn spiral_is_balanced() {
        let pts = fibonacci_directions(3, 1000, 0);
        for k in 0..3 {
            let mean: f64 = pts.iter().map(|p| p[k]).sum::<f64>() / 1000.0;
            assert!(mean.abs() < 0.02);
        }
    }
}
