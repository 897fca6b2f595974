//! Asymptotic sum-rate gap bound for K ≥ 3 and its Fisher-Z expectations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Mean of a Fisher-Z variable with its Monte Carlo standard error
/// (zero for the closed form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherEstimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    /// Bound on the asymptotic average gap, bits per channel use.
    pub delta: f64,
    /// `[αNK(K-2)/(2(K-1)²), (K/(K-1))·Σ_n (...)]`
    pub terms: [f64; 2],
    /// `d_n = (K-1)M - N + n`
    pub degrees: Vec<usize>,
    /// `E[FisherZ(d_n, M-N+n)]` per sub-channel.
    pub fisher_means: Vec<FisherEstimate>,
    /// Standard error of `delta` propagated from the Monte Carlo means.
    pub std_error: f64,
}

/// `E[½·ln((X/d1)/(Y/d2))]` with `X ~ χ²_{d1}`, `Y ~ χ²_{d2}` independent.
pub fn fisher_z_mean(d1: usize, d2: usize) -> f64 {
    let part = |d: usize| {
        let h = d as f64 / 2.0;
        digamma(h) - h.ln()
    };
    0.5 * (part(d1) - part(d2))
}

/// Monte Carlo estimate of [`fisher_z_mean`] from `samples` draws. The work
/// is split into fixed chunks, each with its own generator seeded from
/// `(seed, chunk)`, so the result does not depend on the thread count.
pub fn fisher_z_mean_mc(d1: usize, d2: usize, samples: usize, seed: u64) -> FisherEstimate {
    const CHUNK: usize = 1 << 14;
    let x_dist = ChiSquared::new(d1 as f64).expect("positive degree");
    let y_dist = ChiSquared::new(d2 as f64).expect("positive degree");
    let chunks = samples.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((d1 as u64) << 48) ^ ((d2 as u64) << 40),
            );
            let count = CHUNK.min(samples - c * CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let x: f64 = x_dist.sample(&mut rng);
                let y: f64 = y_dist.sample(&mut rng);
                let z = 0.5 * ((x / d1 as f64) / (y / d2 as f64)).ln();
                s += z;
                s2 += z * z;
            }
            (s, s2)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0).max(1.0);
    FisherEstimate {
        mean,
        std_error: (var.max(0.0) / n).sqrt(),
    }
}

fn check_regime(k: usize, m: usize, n: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidRegime(format!("gap bound needs K >= 3, got {k}")));
    }
    if n > m || n == 0 {
        return Err(Error::InvalidRegime(format!("gap bound needs 1 <= N <= M, got N={n}, M={m}")));
    }
    Ok(())
}

fn compose(
    k: usize,
    m: usize,
    n: usize,
    alpha: f64,
    mut fisher: impl FnMut(usize, usize) -> FisherEstimate,
) -> GapBound {
    let (kf, nf) = (k as f64, n as f64);
    let degrees: Vec<usize> = (1..=n).map(|i| (k - 1) * m - n + i).collect();
    if alpha > 0.5 {
        return GapBound {
            delta: 0.0,
            terms: [0.0, 0.0],
            degrees,
            fisher_means: Vec::new(),
            std_error: 0.0,
        };
    }
    let scale = kf / (kf - 1.0);
    let mut fisher_means = Vec::with_capacity(n);
    let mut sum = 0.0;
    let mut var = 0.0;
    for (i, &d) in degrees.iter().enumerate() {
        // Degree of the squared RQ diagonal r_k(n,n)² of an N×M Gaussian matrix.
        let own = m - n + i + 1;
        let est = fisher(d, own);
        sum += alpha * LOG2_E * est.mean + 0.5 * alpha * (d as f64 / own as f64).log2();
        var += (alpha * LOG2_E * est.std_error).powi(2);
        fisher_means.push(est);
    }
    let first = alpha * nf * kf * (kf - 2.0) / (2.0 * (kf - 1.0).powi(2));
    let second = scale * sum;
    GapBound {
        delta: first + second,
        terms: [first, second],
        degrees,
        fisher_means,
        std_error: scale * var.sqrt(),
    }
}

/// Asymptotic gap bound with Fisher-Z means estimated by Monte Carlo.
/// Returns exactly zero for `α > 1/2`.
pub fn asymptotic_gap_bound(
    k: usize,
    m: usize,
    n: usize,
    alpha: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<GapBound> {
    check_regime(k, m, n)?;
    Ok(compose(k, m, n, alpha, |d1, d2| {
        fisher_z_mean_mc(d1, d2, mc_samples, seed)
    }))
}

/// Same bound with the closed-form digamma expectations.
pub fn asymptotic_gap_bound_exact(k: usize, m: usize, n: usize, alpha: f64) -> Result<GapBound> {
    check_regime(k, m, n)?;
    Ok(compose(k, m, n, alpha, |d1, d2| FisherEstimate {
        mean: fisher_z_mean(d1, d2),
        std_error: 0.0,
    }))
}
