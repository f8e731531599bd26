//! Small dense least-squares helper.
//!
//! The designs in this crate are tall and narrow (a handful of columns), so
//! least squares goes through the normal equations with a symmetric
//! eigendecomposition. Eigenvalues below a relative cutoff are truncated,
//! which yields the minimum-norm solution on rank-deficient designs.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm least-squares solution of `design * x = response`.
///
/// Returns the solution together with the numerical rank.
pub(crate) fn min_norm_least_squares(design: &DMatrix<f64>, response: &DVector<f64>) -> (DVector<f64>, usize) {
    let gram = design.transpose() * design;
    let rhs = design.transpose() * response;
    let eig = gram.symmetric_eigen();
    let max_eval = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let cutoff = 1e-12 * max_eval.max(1e-300);
    let dim = rhs.len();
    let mut solution = DVector::zeros(dim);
    let mut rank = 0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            rank += 1;
            let q = eig.eigenvectors.column(i);
            let coef = q.dot(&rhs) / lambda;
            solution += q * coef;
        }
    }
    (solution, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_rank_matches_direct_solve() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.9, 5.1, 7.0]);
        let (x, rank) = min_norm_least_squares(&a, &b);
        assert_eq!(rank, 2);
        // Closed form for simple linear regression on t = 0..3.
        assert_abs_diff_eq!(x[1], 2.02, epsilon = 1e-10);
        assert_abs_diff_eq!(x[0], 0.97, epsilon = 1e-10);
    }

    #[test]
    fn rank_deficient_returns_min_norm_with_exact_fit() {
        // Columns [1, 0.4] are collinear; fitted values must still be exact.
        let rows = 29;
        let mut a = DMatrix::zeros(rows, 2);
        let mut b = DVector::zeros(rows);
        for r in 0..rows {
            a[(r, 0)] = 1.0;
            a[(r, 1)] = 0.4;
            b[r] = 0.4;
        }
        let (x, rank) = min_norm_least_squares(&a, &b);
        assert_eq!(rank, 1);
        assert_abs_diff_eq!(x[0] + 0.4 * x[1], 0.4, epsilon = 1e-12);
        // Minimum-norm solution is proportional to [1, 0.4].
        assert_abs_diff_eq!(x[1] / x[0], 0.4, epsilon = 1e-10);
    }
}
