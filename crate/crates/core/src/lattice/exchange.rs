//! End-to-end run of the lattice exchange over one channel instance.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::linalg::{seeded_rng, Matrix};

use super::{encode_stream, quantize, relay_combine, relay_decode_noisy, retrieve_with_offsets, sub, Codeword, NestedLatticeChain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseMode {
    Off,
    /// i.i.d. Gaussian relay noise with this standard deviation.
    Gaussian(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeReport {
    /// `success[receiver][sender]`: every sub-channel codeword of `sender`
    /// was recovered by `receiver`. The diagonal is always `true`.
    pub success: Vec<Vec<bool>>,
    /// Relay words that differ from the noiseless ones, per slot.
    pub relay_errors: usize,
}

impl ExchangeReport {
    pub fn all_success(&self) -> bool {
        self.success.iter().flatten().all(|&s| s)
    }

    pub fn failures(&self) -> usize {
        self.success.iter().flatten().filter(|&&s| !s).count()
    }
}

/// Interference seen by stream `n` of a user from its later streams:
/// `v_n = Σ_{n' > n} r(n, n')·x̃_{n'}`.
fn interference(r: &Matrix, streams: &[Option<Vec<f64>>], n: usize, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for (m, x) in streams.iter().enumerate().skip(n + 1) {
        let x = x.as_ref().expect("later streams are encoded first");
        for (vi, xi) in v.iter_mut().zip(x) {
            *vi += r[(n, m)] * xi;
        }
    }
    v
}

/// Encodes every stream of one user, last sub-channel first.
fn encode_user(
    r: &Matrix,
    messages: &[Codeword],
    dithers: &[Vec<f64>],
    chains: &[NestedLatticeChain],
    user: usize,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n_sub = chains.len();
    let dim = chains[0].dim();
    let mut streams: Vec<Option<Vec<f64>>> = vec![None; n_sub];
    let mut interferences = vec![Vec::new(); n_sub];
    for n in (0..n_sub).rev() {
        let v = interference(r, &streams, n, dim);
        streams[n] = Some(encode_stream(&messages[n], &v, &dithers[n], r[(n, n)], &chains[n], user)?);
        interferences[n] = v;
    }
    Ok((streams.into_iter().map(Option::unwrap).collect(), interferences))
}

/// Runs the whole exchange for `messages[k][n]` (user `k`, sub-channel `n`).
///
/// Every user triangularizes its uplink, encodes its streams in reverse
/// order with dirty-paper pre-subtraction and sends the same signal in the
/// two slots it takes part in (the dither is reused as well). In slot `l`
/// users `l` and `l+1` transmit through their physical channels; each relay
/// combines and decodes its sub-channel. Relay words are delivered to every
/// user without error, and each user then recovers all other messages.
///
/// A relay word equals `(c_l + c_{l+1} - λ_{l+1}) mod Λ_l` with
/// `λ_{l+1} ∈ Λ_{l+1}` the coarse quantization inside user `l+1`'s encoder.
/// The offset vanishes when both coarse scales agree; otherwise receivers
/// rebuild it from the messages they already hold, using the common
/// dithers and channel knowledge.
pub fn simulate_exchange(
    inst: &ChannelInstance,
    chains: &[NestedLatticeChain],
    messages: &[Vec<Codeword>],
    noise: NoiseMode,
    seed: u64,
) -> Result<ExchangeReport> {
    let users = inst.users();
    let n_sub = inst.relays();
    if chains.len() != n_sub {
        return Err(Error::DimensionMismatch(format!("{} chains for {n_sub} sub-channels", chains.len())));
    }
    if chains.iter().any(|c| c.users() != users) {
        return Err(Error::DimensionMismatch("each chain needs one coarse scale per user".into()));
    }
    let dim = chains[0].dim();
    if chains.iter().any(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch("chains must share a dimension".into()));
    }
    if messages.len() != users || messages.iter().any(|m| m.len() != n_sub) {
        return Err(Error::DimensionMismatch("one message per user and sub-channel".into()));
    }
    for (k, row) in messages.iter().enumerate() {
        for (n, c) in row.iter().enumerate() {
            if !chains[n].contains(k, c) {
                return Err(Error::InconsistentInputs(format!("message ({k},{n}) is not a codeword")));
            }
        }
    }

    let mut rng = seeded_rng(seed);
    let dithers: Vec<Vec<Vec<f64>>> = (0..users)
        .map(|k| (0..n_sub).map(|n| chains[n].random_dither(k, &mut rng)).collect())
        .collect();

    // Uplink signals: X_k = U_kᵀ X̃_k, with X̃_k stacking the streams as rows.
    let mut encoded = Vec::with_capacity(users);
    let mut transmit = Vec::with_capacity(users);
    for k in 0..users {
        let (streams, _) = encode_user(&inst.rq[k].r, &messages[k], &dithers[k], chains, k)?;
        let x_tilde = Matrix::from_rows(&streams)?;
        transmit.push(&inst.rq[k].u.transpose() * &x_tilde);
        encoded.push(streams);
    }

    let gauss = match noise {
        NoiseMode::Off => None,
        NoiseMode::Gaussian(s) => Some(Normal::new(0.0, s).map_err(|e| Error::InvalidConfig(e.to_string()))?),
    };
    // words[l][n]
    let mut words = vec![Vec::with_capacity(n_sub); users.saturating_sub(1)];
    let mut relay_errors = 0;
    for l in 0..users - 1 {
        let mut y = &(&inst.uplink[l] * &transmit[l]) + &(&inst.uplink[l + 1] * &transmit[l + 1]);
        if let Some(dist) = &gauss {
            for i in 0..y.rows() {
                for j in 0..y.cols() {
                    y[(i, j)] += dist.sample(&mut rng);
                }
            }
        }
        for n in 0..n_sub {
            let combined = relay_combine(y.row(n), &dithers[l][n], &dithers[l + 1][n], &chains[n], l);
            let word = relay_decode_noisy(&combined, &chains[n], l);
            if gauss.is_some() {
                let clean = noiseless_word(&messages, &encoded, &dithers, inst, &chains[n], l, n)?;
                if word.indices(chains[n].fine_scale()) != clean.indices(chains[n].fine_scale()) {
                    relay_errors += 1;
                }
            }
            words[l].push(word);
        }
    }

    let mut success = vec![vec![true; users]; users];
    for k in 0..users {
        match recover_all(inst, chains, &dithers, &words, k, &messages[k]) {
            Ok(recovered) => {
                for j in 0..users {
                    for n in 0..n_sub {
                        let g = chains[n].fine_scale();
                        if recovered[j][n].indices(g) != messages[j][n].indices(g) {
                            success[k][j] = false;
                        }
                    }
                }
            }
            Err(Error::InconsistentInputs(_)) if gauss.is_some() => {
                for (j, s) in success[k].iter_mut().enumerate() {
                    *s = j == k;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ExchangeReport { success, relay_errors })
}

/// The relay word a noiseless channel would produce, for error counting.
fn noiseless_word(
    messages: &[Vec<Codeword>],
    encoded: &[Vec<Vec<f64>>],
    dithers: &[Vec<Vec<f64>>],
    inst: &ChannelInstance,
    chain: &NestedLatticeChain,
    l: usize,
    n: usize,
) -> Result<Codeword> {
    let lambda = coarse_offset(inst, chain, &encoded[l + 1], &messages[l + 1][n], &dithers[l + 1][n], l + 1, n);
    let mut sum: Vec<f64> = messages[l][n]
        .values
        .iter()
        .zip(&messages[l + 1][n].values)
        .map(|(a, b)| a + b)
        .collect();
    sum = sub(&sum, &lambda);
    Ok(relay_decode_noisy(&sum, chain, l))
}

/// `λ = Q_{Λ_user}(c - v - d)` for stream `n` of `user`, where `v` comes
/// from the user's already-known later streams.
fn coarse_offset(
    inst: &ChannelInstance,
    chain: &NestedLatticeChain,
    streams: &[Vec<f64>],
    c: &Codeword,
    d: &[f64],
    user: usize,
    n: usize,
) -> Vec<f64> {
    let known: Vec<Option<Vec<f64>>> = streams.iter().map(|s| Some(s.clone())).collect();
    let v = interference(&inst.rq[user].r, &known, n, chain.dim());
    quantize(&sub(&sub(&c.values, &v), d), chain.coarse_scale(user))
}

/// Receiver `k`'s view: recovers `[user][n]` codewords, last sub-channel first.
fn recover_all(
    inst: &ChannelInstance,
    chains: &[NestedLatticeChain],
    dithers: &[Vec<Vec<f64>>],
    words: &[Vec<Codeword>],
    k: usize,
    own: &[Codeword],
) -> Result<Vec<Vec<Codeword>>> {
    let users = inst.users();
    let n_sub = chains.len();
    let dim = chains[0].dim();
    let mut out: Vec<Vec<Option<Codeword>>> = vec![vec![None; n_sub]; users];
    // Re-encoded streams of every user, filled from the last sub-channel down.
    let mut streams: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; n_sub]; users];
    for n in (0..n_sub).rev() {
        let slot_words: Vec<Codeword> = words.iter().map(|w| w[n].clone()).collect();
        let recovered = retrieve_with_offsets(&slot_words, k, &own[n], &chains[n], |l, next| {
            let user = l + 1;
            let v = interference(&inst.rq[user].r, &streams[user], n, dim);
            Some(quantize(
                &sub(&sub(&next.values, &v), &dithers[user][n]),
                chains[n].coarse_scale(user),
            ))
        })?;
        for (j, c) in recovered.into_iter().enumerate() {
            let v = interference(&inst.rq[j].r, &streams[j], n, dim);
            streams[j][n] = Some(encode_stream(&c, &v, &dithers[j][n], inst.rq[j].r[(n, n)], &chains[n], j)?);
            out[j][n] = Some(c);
        }
    }
    Ok(out
        .into_iter()
        .map(|row| row.into_iter().map(Option::unwrap).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_instance, ScenarioConfig};

    fn random_messages(chains: &[NestedLatticeChain], users: usize, seed: u64) -> Vec<Vec<Codeword>> {
        let mut rng = seeded_rng(seed);
        (0..users)
            .map(|k| chains.iter().map(|c| c.random_codeword(k, &mut rng)).collect())
            .collect()
    }

    #[test]
    fn noiseless_three_users_two_relays() {
        let cfg = ScenarioConfig::symmetric(3, 2, 2, 0.5);
        let chain = NestedLatticeChain::from_levels(2, 1.0, &[8, 4, 2]).unwrap();
        let chains = vec![chain.clone(), chain];
        for seed in 0..100 {
            let inst = sample_instance(&cfg, seed).unwrap();
            let msgs = random_messages(&chains, 3, seed + 1000);
            let report = simulate_exchange(&inst, &chains, &msgs, NoiseMode::Off, seed).unwrap();
            assert!(report.all_success(), "seed {seed}: {:?}", report.success);
        }
    }

    #[test]
    fn zero_messages() {
        let cfg = ScenarioConfig::symmetric(3, 3, 2, 0.5);
        let inst = sample_instance(&cfg, 2).unwrap();
        let chains = vec![NestedLatticeChain::from_levels(1, 1.0, &[4, 4, 2]).unwrap(); 2];
        let msgs = vec![vec![Codeword::zeros(1); 2]; 3];
        assert!(simulate_exchange(&inst, &chains, &msgs, NoiseMode::Off, 1).unwrap().all_success());
    }

    #[test]
    fn scalar_two_user_channel() {
        let cfg = ScenarioConfig::symmetric(2, 1, 1, 0.5);
        let inst = sample_instance(&cfg, 3).unwrap();
        let chains = vec![NestedLatticeChain::from_levels(1, 1.0, &[8, 4]).unwrap()];
        for seed in 0..20 {
            let msgs = random_messages(&chains, 2, seed);
            assert!(simulate_exchange(&inst, &chains, &msgs, NoiseMode::Off, seed).unwrap().all_success());
        }
    }

    #[test]
    fn rejects_non_codewords() {
        let cfg = ScenarioConfig::symmetric(2, 1, 1, 0.5);
        let inst = sample_instance(&cfg, 3).unwrap();
        let chains = vec![NestedLatticeChain::from_levels(1, 1.0, &[8, 4]).unwrap()];
        let msgs = vec![vec![Codeword { values: vec![0.0] }], vec![Codeword { values: vec![3.0] }]];
        assert!(simulate_exchange(&inst, &chains, &msgs, NoiseMode::Off, 0).is_err());
    }

    #[test]
    fn heavy_noise_causes_errors() {
        let cfg = ScenarioConfig::symmetric(3, 2, 2, 0.5);
        let inst = sample_instance(&cfg, 2).unwrap();
        let chains = vec![NestedLatticeChain::from_levels(1, 1.0, &[8, 4, 2]).unwrap(); 2];
        let msgs = random_messages(&chains, 3, 5);
        let mut errors = 0;
        for seed in 0..50 {
            errors += simulate_exchange(&inst, &chains, &msgs, NoiseMode::Gaussian(2.0), seed).unwrap().relay_errors;
        }
        assert!(errors > 0);
    }
}
