use invset::conditions::{cone_nonpositivity, constant_matrix, sos_constraint};
use invset::conic::{solve_reference, ConicProgram, LinExpr, SolverOptions, Status};
use invset::polynomials::{ExponentVector, HomogeneousPolynomial};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn decide(prog: &ConicProgram) -> bool {
    let sol = solve_reference(prog, &SolverOptions::default()).unwrap();
    match sol.status {
        Status::Optimal => true,
        Status::InfeasibleCertified => false,
        other => panic!("undecided: {other}"),
    }
}

fn orthogonal(entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, entries).qr().q()
}

/// `UΛUᵀ` with every |λ| in [0.1, 2], so definiteness is never borderline.
fn symmetric() -> impl Strategy<Value = DMatrix<f64>> {
    (
        prop::collection::vec(-1.0f64..1.0, 9),
        prop::collection::vec((0.1f64..2.0, any::<bool>()), 3),
    )
        .prop_filter_map("singular basis", |(u, eig)| {
            let raw = DMatrix::from_row_slice(3, 3, &u);
            if raw.determinant().abs() < 1e-2 {
                return None;
            }
            let q = orthogonal(&u);
            let l = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                3,
                eig.iter().map(|&(m, neg)| if neg { -m } else { m }),
            ));
            Some(&q * l * q.transpose())
        })
}

fn quadratic_form(q: &DMatrix<f64>) -> HomogeneousPolynomial<LinExpr> {
    let mut terms = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            let mut e = vec![0u32; 3];
            e[i] += 1;
            e[j] += 1;
            let c = if i == j { q[(i, i)] } else { 2.0 * q[(i, j)] };
            terms.push((ExponentVector::from(e), LinExpr::constant(c)));
        }
    }
    HomogeneousPolynomial::from_terms(3, 2, terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn quadratic_sos_iff_psd(q in symmetric()) {
        let mut prog = ConicProgram::new();
        sos_constraint(&mut prog, &quadratic_form(&q)).unwrap();
        let psd = q.symmetric_eigenvalues().min() > 0.0;
        prop_assert_eq!(decide(&prog), psd);
    }
}

#[test]
fn cone_relaxation_is_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut certified = 0;
    for _ in 0..60 {
        let rays = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        if rays.determinant().abs() < 0.05 {
            continue;
        }
        // −R⁻ᵀ(P + N)R⁻¹ is nonpositive on the cone; the noise sometimes breaks that
        let g = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let n = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { rng.gen_range(0.0..1.0) });
        let inner = &g * g.transpose() + (&n + n.transpose()) * 0.5;
        let r_inv = rays.clone().try_inverse().unwrap();
        let noise = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-0.5..0.5));
        let m = -(r_inv.transpose() * inner * &r_inv) + (&noise + noise.transpose()) * 0.5;

        let mut prog = ConicProgram::new();
        cone_nonpositivity(&mut prog, &constant_matrix(&m), &rays).unwrap();
        if !decide(&prog) {
            continue;
        }
        certified += 1;
        let scale = m.amax();
        for _ in 0..2000 {
            let lambda = nalgebra::DVector::from_fn(3, |_, _| rng.gen_range(0.0..1.0));
            let x = &rays * lambda;
            let value = (x.transpose() * &m * &x)[(0, 0)];
            assert!(value <= 1e-5 * scale * x.norm_squared(), "certified M is positive on the cone: {value}");
        }
    }
    assert!(certified >= 10, "only {certified} certified instances");
}
