use nalgebra::SymmetricEigen;

use super::Matrix;
use crate::error::{Error, Result};

/// Eigenvalues below this are clamped before taking logs.
pub const EIGEN_CLAMP: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

/// Base-2 log-determinant with a flag telling whether any eigenvalue was clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub value: f64,
    pub degenerate: bool,
}

fn scale_of(a: &Matrix) -> f64 {
    a.max_abs().max(1.0)
}

pub fn check_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * scale_of(a) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues and eigenvectors
/// (as columns of the returned matrix).
pub fn sym_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let mut m = a.to_nalgebra();
    // Symmetrize away round-off before handing to the solver.
    let mt = m.transpose();
    m = (m + mt) * 0.5;
    let eig = SymmetricEigen::new(m);
    (
        eig.eigenvalues.iter().cloned().collect(),
        Matrix::from_nalgebra(&eig.eigenvectors),
    )
}

/// `log₂ det(a)` for symmetric PSD `a`.
pub fn logdet_psd(a: &Matrix) -> Result<LogDet> {
    check_symmetric(a)?;
    if a.rows() == 0 {
        return Ok(LogDet {
            value: 0.0,
            degenerate: false,
        });
    }
    // Fast path: well-conditioned positive definite input.
    if let Some(chol) = a.to_nalgebra().cholesky() {
        let l = chol.l();
        let min_diag = l.diagonal().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_diag * min_diag > 1e3 * EIGEN_CLAMP {
            let value = 2.0 * l.diagonal().iter().map(|d| d.log2()).sum::<f64>();
            return Ok(LogDet {
                value,
                degenerate: false,
            });
        }
    }
    let (vals, _) = sym_eigen(a);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale_of(a) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let mut degenerate = false;
    let value = vals
        .iter()
        .map(|&v| {
            if v < EIGEN_CLAMP {
                degenerate = true;
                EIGEN_CLAMP.log2()
            } else {
                v.log2()
            }
        })
        .sum();
    Ok(LogDet { value, degenerate })
}

/// `log₂ det(I + a)` for symmetric PSD `a`.
pub fn logdet_identity_plus(a: &Matrix) -> Result<f64> {
    let shifted = a + &Matrix::identity(a.rows());
    Ok(logdet_psd(&shifted)?.value)
}

/// Verifies `q ⪰ 0` and `tr q ≤ budget` (with a relative slack).
pub fn check_covariance(q: &Matrix, budget: f64) -> Result<()> {
    check_symmetric(q)?;
    let (vals, _) = sym_eigen(q);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale_of(q) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let tr = q.trace();
    if tr > budget * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::TraceBudgetExceeded { trace: tr, budget });
    }
    Ok(())
}

/// Euclidean projection onto `{Q ⪰ 0, tr Q ≤ budget}`.
pub fn project_psd_trace_ball(q: &Matrix, budget: f64) -> Matrix {
    let (vals, vecs) = sym_eigen(q);
    let mut lam: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = lam.iter().sum();
    if total > budget {
        // Shift eigenvalues down by θ so that Σ max(λ - θ, 0) = budget.
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut prefix = 0.0;
        let mut theta = 0.0;
        for (i, s) in sorted.iter().enumerate() {
            prefix += s;
            let t = (prefix - budget) / (i + 1) as f64;
            if i + 1 == sorted.len() || sorted[i + 1] <= t {
                theta = t;
                break;
            }
        }
        lam = vals.iter().map(|v| (v - theta).max(0.0)).collect();
    }
    vecs.congruence(&Matrix::diag(&lam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_gaussian_matrix;

    #[test]
    fn trivial_log_dets() {
        assert_eq!(logdet_psd(&Matrix::identity(3)).unwrap().value, 0.0);
        let v = logdet_psd(&Matrix::diag(&[2.0, 4.0])).unwrap().value;
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gram_matches_lu_oracle() {
        for seed in 0..10 {
            let b = sample_gaussian_matrix(4, 4, 100 + seed);
            let a = b.gram_rows();
            let det_b = b.to_nalgebra().lu().determinant();
            let expected = 2.0 * det_b.abs().log2();
            let got = logdet_psd(&a).unwrap().value;
            assert!((got - expected).abs() < 1e-8, "{got} vs {expected}");
        }
    }

    #[test]
    fn singular_input_is_clamped_and_flagged() {
        let a = Matrix::diag(&[1.0, 0.0]);
        let ld = logdet_psd(&a).unwrap();
        assert!(ld.degenerate);
        assert!((ld.value - EIGEN_CLAMP.log2()).abs() < 1e-9);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(logdet_psd(&a), Err(Error::NotSymmetric { .. })));
        let b = Matrix::diag(&[1.0, -1.0]);
        assert!(matches!(logdet_psd(&b), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn scaling_shifts_log_det() {
        let b = sample_gaussian_matrix(3, 3, 7);
        let a = b.gram_rows();
        let base = logdet_psd(&a).unwrap().value;
        let scaled = logdet_psd(&a.scale(5.0)).unwrap().value;
        assert!((scaled - (base + 3.0 * 5f64.log2())).abs() < 1e-9);
    }

    #[test]
    fn projection_lands_in_trace_ball() {
        let b = sample_gaussian_matrix(3, 3, 9);
        let q = &b + &b.transpose();
        let p = project_psd_trace_ball(&q, 1.5);
        check_covariance(&p, 1.5).unwrap();
        let inside = Matrix::diag(&[0.2, 0.3]);
        let same = project_psd_trace_ball(&inside, 1.0);
        assert!((&same - &inside).frobenius_norm() < 1e-12);
        let over = project_psd_trace_ball(&Matrix::diag(&[3.0, 1.0]), 2.0);
        assert!((over[(0, 0)] - 2.0).abs() < 1e-12 && over[(1, 1)].abs() < 1e-12);
    }
}
