//! Small dense solvers: exact rational inversion and weighted minimum-norm
//! least squares backed by nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::symcore::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular (rank {rank} < {needed}); condition estimate {condition:e}")]
    Singular { rank: usize, needed: usize, condition: f64 },
    #[error("system is inconsistent: residual {residual:e}")]
    Inconsistent { residual: f64 },
}

/// Exact inverse of a square rational matrix by Gauss-Jordan elimination.
pub fn invert_rational(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
                let t = &f * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: DVector<f64>,
    pub rank: usize,
    /// Columns span the null space of the system matrix (in the original unknowns).
    pub kernel: DMatrix<f64>,
    /// `max |M x - b|`.
    pub residual: f64,
    /// Ratio of extreme nonzero singular values of the weighted matrix.
    pub condition: f64,
}

/// Minimizes `sum_j w_j x_j^2` subject to `M x = b`.
///
/// Fails when `M` does not have full row rank.
pub fn weighted_min_norm(m: &DMatrix<f64>, b: &DVector<f64>, weights: &[f64]) -> Result<MinNormSolution, LinalgError> {
    let (rows, cols) = m.shape();
    assert_eq!(weights.len(), cols);
    let scale = DVector::from_iterator(cols, weights.iter().map(|w| 1.0 / w.sqrt()));
    let mut a = m.clone();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(*s);
    }
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = (rows.max(cols) as f64) * f64::EPSILON * sigma_max.max(1.0);
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
    if rank < rows {
        return Err(LinalgError::Singular { rank, needed: rows, condition });
    }
    let z = svd.solve(b, tol).expect("u and v were computed");
    let x = z.component_mul(&scale);
    let residual = (m * &x - b).amax();

    let gram = a.transpose() * &a;
    let eig = SymmetricEigen::new(gram);
    let null: Vec<usize> = (0..cols).filter(|&j| eig.eigenvalues[j].abs() <= tol * sigma_max.max(1.0)).collect();
    let mut kernel = DMatrix::zeros(cols, null.len());
    for (c, &j) in null.iter().enumerate() {
        let v = eig.eigenvectors.column(j).component_mul(&scale);
        kernel.set_column(c, &(v.clone() / v.norm()));
    }
    Ok(MinNormSolution { x, rank, kernel, residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ratio;

    #[test]
    fn rational_inverse() {
        let m = vec![vec![ratio(2, 1), ratio(1, 1)], vec![ratio(1, 1), ratio(1, 1)]];
        let inv = invert_rational(&m).unwrap();
        assert_eq!(inv, vec![vec![ratio(1, 1), ratio(-1, 1)], vec![ratio(-1, 1), ratio(2, 1)]]);
        let singular = vec![vec![ratio(1, 1), ratio(2, 1)], vec![ratio(2, 1), ratio(4, 1)]];
        assert!(invert_rational(&singular).is_none());
    }

    #[test]
    fn single_constraint_min_norm() {
        // x + y + z = 3 with unit weights -> (1,1,1)
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![3.0]);
        let s = weighted_min_norm(&m, &b, &[1.0, 1.0, 1.0]).unwrap();
        for v in s.x.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.kernel.ncols(), 2);
        assert!((m * &s.kernel).amax() < 1e-12);
    }

    #[test]
    fn weights_shift_the_solution() {
        // x + y = 2, weights (1, 3): minimize x^2 + 3y^2 -> x = 3/2, y = 1/2
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0]);
        let s = weighted_min_norm(&m, &b, &[1.0, 3.0]).unwrap();
        assert!((s.x[0] - 1.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let m = DMatrix::zeros(1, 2);
        let b = DVector::from_vec(vec![1.0]);
        assert!(matches!(weighted_min_norm(&m, &b, &[1.0, 1.0]), Err(LinalgError::Singular { .. })));
    }
}
