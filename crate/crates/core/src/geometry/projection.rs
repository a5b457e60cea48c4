use nalgebra::DMatrix;

use crate::linalg::full_right_svd;

const RANK_TOL: f64 = 1e-10;

/// Rank of `m` with singular-value threshold `1e-10 · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Matrix with orthonormal rows spanning `ker(Bᵀ)`, the orthogonal complement
/// of the column space of `b`.
///
/// Rows are obtained by orthonormalising the projections of `e_1, e_2, ...`
/// onto the complement, so axis-aligned kernels come out as coordinate rows and
/// the first nonzero entry of every row is positive.
pub fn complement_projection(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let rank = numerical_rank(b);
    let r = n - rank;
    if r == 0 {
        return DMatrix::zeros(0, n);
    }
    if rank == 0 {
        return DMatrix::identity(n, n);
    }

    // Orthonormal basis of Image(B) from the right singular vectors of Bᵀ.
    let (sv, v_t) = full_right_svd(&b.transpose());
    let smax = sv.iter().fold(0.0_f64, |a, &x| a.max(x));
    let range: Vec<Vec<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_TOL * smax)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(r);
    for axis in 0..n {
        if rows.len() == r {
            break;
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for basis in range.iter().chain(rows.iter()) {
                let c: f64 = basis.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, bx) in v.iter_mut().zip(basis) {
                    *x -= c * bx;
                }
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 {
            for x in &mut v {
                *x /= len;
            }
            rows.push(v);
        }
    }
    debug_assert_eq!(rows.len(), r);

    let mut out = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    for mut row in out.row_iter_mut() {
        if let Some(&first) = row.iter().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                row.neg_mut();
            }
        }
        // snap round-off to exact zeros
        for x in row.iter_mut() {
            if x.abs() < 1e-15 {
                *x = 0.0;
            }
        }
    }
    out
}
