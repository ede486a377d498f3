//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{FriError, Result};
use crate::signal_model::C64;

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// 2-norm condition number `sigma_max / sigma_min` over the smaller dimension.
pub fn condition_number(a: &DMatrix<C64>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Right singular vector of the smallest singular value together with the
/// full descending singular spectrum.
pub fn smallest_right_singular_vector(a: &DMatrix<C64>) -> (DVector<C64>, Vec<f64>) {
    let n = a.ncols();
    // pad short matrices so the SVD exposes all n right singular vectors
    let work = if a.nrows() < n {
        let mut padded = DMatrix::<C64>::zeros(n, n);
        padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    let vec = v_t.row(idx).transpose().map(|z| z.conj());
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    (vec, sv)
}

/// Least-squares solution of `A x = b` by Householder QR (no normal
/// equations). Requires a tall or square matrix with full column rank.
pub fn lstsq_qr(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    let (m, n) = a.shape();
    if m < n {
        return Err(FriError::InvalidArgument(format!(
            "least squares needs at least as many rows ({m}) as unknowns ({n})"
        )));
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let rhs = q.adjoint() * b;
    r.solve_upper_triangular(&rhs)
        .ok_or_else(|| FriError::InvalidArgument("rank-deficient least-squares system".into()))
}

/// `max_i |(A x - b)_i|`.
pub fn residual_inf(a: &DMatrix<C64>, x: &DVector<C64>, b: &DVector<C64>) -> f64 {
    (a * x - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_matches_exact_solution() {
        let a = DMatrix::from_fn(6, 3, |i, j| {
            C64::from_polar(1.0, 0.3 * (i * (j + 1)) as f64)
        });
        let x = DVector::from_vec(vec![
            C64::new(1.0, -2.0),
            C64::new(0.5, 0.0),
            C64::new(-0.25, 0.75),
        ]);
        let b = &a * &x;
        let got = lstsq_qr(&a, &b).unwrap();
        assert!((got - x).norm() < 1e-12);
    }

    #[test]
    fn null_vector_of_rank_deficient_matrix() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.5])
            .map(|v| C64::new(v, 0.0));
        let (v, s) = smallest_right_singular_vector(&a);
        assert_eq!(s.len(), 3);
        assert!((&a * &v).norm() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}
