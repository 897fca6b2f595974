//! Dense real linear algebra: the matrix type, RQ factorization, PSD
//! log-determinants, water-filling and seeded Gaussian sampling.

mod matrix;
mod psd;
mod rq;
mod waterfill;

pub use matrix::Matrix;
pub use psd::{
    check_covariance, check_symmetric, logdet_identity_plus, logdet_psd,
    project_psd_trace_ball, sym_eigen, LogDet, EIGEN_CLAMP,
};
pub use rq::{rq_decompose, RqFactors, RANK_TOLERANCE};
pub use waterfill::{water_level, waterfill, waterfill_objective};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// The portable generator used everywhere randomness is needed.
pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. 𝒩(0,1) entries drawn from `rng`.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect::<Vec<f64>>();
    Matrix::from_row_major(rows, cols, data).expect("normal draws are finite")
}

/// Matrix with i.i.d. 𝒩(0,1) entries, deterministic in `seed`.
pub fn sample_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_matrix(rows, cols, &mut seeded_rng(seed))
}
