//! RQ factorization `H = R·U` of a wide matrix (rows ≤ cols).
//!
//! Computed as a Householder QR of the row-reversed transpose, then flipped
//! back, so `R` comes out upper-triangular and `U` has orthonormal rows.

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Relative singular-value threshold below which a matrix is rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RqFactors {
    /// N×N upper-triangular factor with nonnegative diagonal.
    pub r: Matrix,
    /// N×M factor with orthonormal rows.
    pub u: Matrix,
}

impl RqFactors {
    pub fn reconstruct(&self) -> Matrix {
        &self.r * &self.u
    }

    /// Diagonal entries `r(n,n)`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.r.rows()).map(|n| self.r[(n, n)]).collect()
    }
}

pub fn rq_decompose(h: &Matrix) -> Result<RqFactors> {
    let (n, m) = (h.rows(), h.cols());
    if n == 0 || n > m {
        return Err(Error::DimensionMismatch(format!(
            "RQ needs 1 <= rows <= cols, got {n}x{m}"
        )));
    }
    check_full_row_rank(h)?;

    // a = Hᵀ·J, an m×n tall matrix whose column j is row n-1-j of H.
    let mut a = Matrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            a[(i, j)] = h[(n - 1 - j, i)];
        }
    }

    let reflectors = householder_in_place(&mut a);

    // Thin Q: apply reflectors in reverse to the first n columns of I_m.
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        apply_reflector(&mut q, v, k, 0);
    }

    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = a[(n - 1 - j, n - 1 - i)];
        }
    }
    let mut u = Matrix::zeros(n, m);
    for i in 0..n {
        for c in 0..m {
            u[(i, c)] = q[(c, n - 1 - i)];
        }
    }

    for d in 0..n {
        if r[(d, d)] < 0.0 {
            for i in 0..n {
                r[(i, d)] = -r[(i, d)];
            }
            for c in 0..m {
                u[(d, c)] = -u[(d, c)];
            }
        }
    }

    Ok(RqFactors { r, u })
}

fn check_full_row_rank(h: &Matrix) -> Result<()> {
    let sv = h.to_nalgebra().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= RANK_TOLERANCE * max {
        let ratio = if max == 0.0 { 0.0 } else { min / max };
        return Err(Error::RankDeficient { ratio });
    }
    Ok(())
}

/// Householder QR of a tall matrix in place. On return the upper triangle
/// holds R; the returned vectors are the unit reflectors for each column.
fn householder_in_place(a: &mut Matrix) -> Vec<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    let mut reflectors = Vec::with_capacity(n);
    for k in 0..n {
        let x: Vec<f64> = (k..m).map(|i| a[(i, k)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x;
        if norm > 0.0 {
            // Reflect onto -sign(x0)·‖x‖·e1 to avoid cancellation.
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if vnorm > 0.0 {
                v.iter_mut().for_each(|t| *t /= vnorm);
            }
        }
        apply_reflector(a, &v, k, k);
        for i in (k + 1)..m {
            a[(i, k)] = 0.0;
        }
        reflectors.push(v);
    }
    reflectors
}

/// Applies `I - 2vvᵀ` (acting on rows `offset..`) to columns `col0..` of `a`.
fn apply_reflector(a: &mut Matrix, v: &[f64], offset: usize, col0: usize) {
    for j in col0..a.cols() {
        let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * a[(offset + i, j)]).sum();
        if dot == 0.0 {
            continue;
        }
        for (i, vi) in v.iter().enumerate() {
            a[(offset + i, j)] -= 2.0 * dot * vi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_gaussian_matrix;

    /// Independent oracle: classical Gram-Schmidt on the reversed rows of H.
    /// Orthonormalizing rows N-1, N-2, ..., 0 yields U bottom-up and R as the
    /// projection coefficients.
    fn gram_schmidt_rq(h: &Matrix) -> (Matrix, Matrix) {
        let (n, m) = (h.rows(), h.cols());
        let mut u = Matrix::zeros(n, m);
        let mut r = Matrix::zeros(n, n);
        for i in (0..n).rev() {
            let mut w: Vec<f64> = h.row(i).to_vec();
            for j in (i + 1)..n {
                let coef: f64 = h.row(i).iter().zip(u.row(j)).map(|(a, b)| a * b).sum();
                r[(i, j)] = coef;
                for c in 0..m {
                    w[c] -= coef * u[(j, c)];
                }
            }
            let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
            r[(i, i)] = norm;
            for c in 0..m {
                u[(i, c)] = w[c] / norm;
            }
        }
        (r, u)
    }

    fn lu_det(a: &Matrix) -> f64 {
        a.to_nalgebra().lu().determinant()
    }

    fn assert_invariants(h: &Matrix, f: &RqFactors) {
        let n = h.rows();
        for i in 0..n {
            for j in 0..i {
                assert!(f.r[(i, j)].abs() <= 1e-10, "r not upper-triangular");
            }
            assert!(f.r[(i, i)] >= 0.0);
        }
        let uut = f.u.gram_rows();
        assert!((&uut - &Matrix::identity(n)).frobenius_norm() <= 1e-8);
        assert!((&f.reconstruct() - h).frobenius_norm() <= 1e-8 * h.frobenius_norm().max(1.0));
    }

    #[test]
    fn identity_factors_trivially() {
        let f = rq_decompose(&Matrix::identity(4)).unwrap();
        assert!((&f.r - &Matrix::identity(4)).frobenius_norm() < 1e-14);
        assert!((&f.u - &Matrix::identity(4)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn antidiagonal_matches_gram_schmidt() {
        let h = Matrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let f = rq_decompose(&h).unwrap();
        assert_invariants(&h, &f);
        assert!((f.r[(0, 0)] * f.r[(1, 1)]).abs() - 6.0 < 1e-12);
        let (r_gs, u_gs) = gram_schmidt_rq(&h);
        assert!((&f.r - &r_gs).frobenius_norm() < 1e-12);
        assert!((&f.u - &u_gs).frobenius_norm() < 1e-12);
    }

    #[test]
    fn random_wide_matches_determinant_oracle() {
        for seed in 0..20 {
            let h = sample_gaussian_matrix(4, 6, seed);
            let f = rq_decompose(&h).unwrap();
            assert_invariants(&h, &f);
            let prod: f64 = f.diagonal().iter().map(|d| d * d).product();
            let det = lu_det(&h.gram_rows());
            assert!(((prod - det) / det).abs() < 1e-8, "seed {seed}: {prod} vs {det}");
            let (r_gs, _) = gram_schmidt_rq(&h);
            assert!((&f.r - &r_gs).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let h = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(matches!(rq_decompose(&h), Err(Error::RankDeficient { .. })));
        let tall = Matrix::zeros(3, 2);
        assert!(matches!(rq_decompose(&tall), Err(Error::DimensionMismatch(_))));
    }
}
