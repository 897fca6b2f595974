//! Sum capacity of a Gaussian MIMO multiple-access channel by iterative
//! water-filling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{logdet_identity_plus, sym_eigen, waterfill, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacSolution {
    /// Transmit covariance per user.
    pub covariances: Vec<Matrix>,
    /// `log₂det(I + (1/σ²) Σ_k H_k Q_k H_kᵀ)` at the returned covariances.
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

const MAX_SWEEPS: usize = 10_000;
const TOL: f64 = 1e-9;

/// Maximizes `log₂det(I + (1/σ²) Σ_k H_k Q_k H_kᵀ)` over `tr Q_k ≤ budgets[k]`.
///
/// Each step water-fills one user's covariance against the noise plus the
/// other users' current interference. The objective never decreases, so the
/// sweep stops once a full cycle gains less than `1e-9`.
pub fn mac_iwf(channels: &[Matrix], budgets: &[f64], sigma2: f64) -> Result<MacSolution> {
    let first = channels
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no channels".into()))?;
    if budgets.len() != channels.len() {
        return Err(Error::DimensionMismatch("one budget per channel".into()));
    }
    let rx = first.rows();
    if channels.iter().any(|h| h.rows() != rx) {
        return Err(Error::DimensionMismatch("channels must share a receiver dimension".into()));
    }
    let mut q: Vec<Matrix> = channels.iter().map(|h| Matrix::zeros(h.cols(), h.cols())).collect();
    let received = |q: &[Matrix], skip: Option<usize>| {
        let mut acc = Matrix::identity(rx).scale(sigma2);
        for (i, (h, qi)) in channels.iter().zip(q).enumerate() {
            if Some(i) != skip {
                acc = &acc + &h.congruence(qi);
            }
        }
        acc
    };
    let objective = |q: &[Matrix]| -> Result<f64> {
        let signal = &received(q, None) - &Matrix::identity(rx).scale(sigma2);
        logdet_identity_plus(&signal.scale(1.0 / sigma2))
    };

    let mut value = objective(&q)?;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        for j in 0..channels.len() {
            let z = received(&q, Some(j)).to_nalgebra();
            let z_inv = z
                .cholesky()
                .ok_or_else(|| Error::NotPsd { min_eigenvalue: f64::NAN })?
                .inverse();
            let h = channels[j].to_nalgebra();
            let eff = Matrix::from_nalgebra(&(h.transpose() * z_inv * &h));
            let eff = (&eff + &eff.transpose()).scale(0.5);
            let (gains, vectors) = sym_eigen(&eff);
            let gains: Vec<f64> = gains.iter().map(|g| g.max(0.0)).collect();
            let powers = match waterfill(&gains, budgets[j], 1.0) {
                Ok(p) => p,
                Err(Error::EmptyGains) => vec![0.0; gains.len()],
                Err(e) => return Err(e),
            };
            q[j] = vectors.congruence(&Matrix::diag(&powers));
        }
        let next = objective(&q)?;
        let gain = next - value;
        value = next;
        if gain < TOL {
            converged = true;
            break;
        }
    }
    Ok(MacSolution {
        covariances: q,
        value,
        sweeps,
        converged,
    })
}
