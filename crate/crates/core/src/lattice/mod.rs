//! Nested scaled-integer lattice chains and the exchange protocol built on
//! them: dithered mod-Λ encoding with interference pre-subtraction, relay
//! combining, relay decoding and user-side retrieval.

mod exchange;

pub use exchange::{simulate_exchange, ExchangeReport, NoiseMode};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Rng;

/// Relative slack when checking that a scale is an integer multiple of `g`.
const RATIO_TOL: f64 = 1e-9;

/// One sub-channel's chain `Λ_1 ⊆ Λ_2 ⊆ … ⊆ Λ_K ⊆ Λ_C` with
/// `Λ_C = g·ℤ^dim` and `Λ_l = q_l·ℤ^dim`.
///
/// JSON form: `{"dim": 2, "g": 1.0, "q": [8.0, 4.0, 2.0]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainSpec", into = "ChainSpec")]
pub struct NestedLatticeChain {
    dim: usize,
    g: f64,
    q: Vec<f64>,
    /// `q_l / g`, exact.
    levels: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChainSpec {
    dim: usize,
    g: f64,
    q: Vec<f64>,
}

impl TryFrom<ChainSpec> for NestedLatticeChain {
    type Error = Error;
    fn try_from(s: ChainSpec) -> Result<Self> {
        NestedLatticeChain::new(s.dim, s.g, s.q)
    }
}

impl From<NestedLatticeChain> for ChainSpec {
    fn from(c: NestedLatticeChain) -> Self {
        ChainSpec {
            dim: c.dim,
            g: c.g,
            q: c.q,
        }
    }
}

impl NestedLatticeChain {
    pub fn new(dim: usize, g: f64, q: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if dim == 0 {
            return bad("lattice dimension must be >= 1".into());
        }
        if !(g.is_finite() && g > 0.0) {
            return bad(format!("fine scale must be positive, got {g}"));
        }
        if q.is_empty() {
            return bad("chain needs at least one coarse scale".into());
        }
        let mut levels = Vec::with_capacity(q.len());
        for &s in &q {
            let ratio = s / g;
            let rounded = ratio.round();
            if !(s.is_finite() && s > 0.0) || rounded < 1.0 || (ratio - rounded).abs() > RATIO_TOL * rounded {
                return bad(format!("coarse scale {s} is not a positive multiple of {g}"));
            }
            levels.push(rounded as u64);
        }
        for w in levels.windows(2) {
            if w[0] % w[1] != 0 {
                return bad(format!(
                    "scales must nest: {} is not a multiple of {}",
                    w[0] as f64 * g,
                    w[1] as f64 * g
                ));
            }
        }
        Ok(Self { dim, g, q, levels })
    }

    /// Integer-level form: `q_l = levels[l]·g`.
    pub fn from_levels(dim: usize, g: f64, levels: &[u64]) -> Result<Self> {
        Self::new(dim, g, levels.iter().map(|&l| l as f64 * g).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fine_scale(&self) -> f64 {
        self.g
    }

    pub fn coarse_scale(&self, user: usize) -> f64 {
        self.q[user]
    }

    pub fn coarse_scales(&self) -> &[f64] {
        &self.q
    }

    pub fn users(&self) -> usize {
        self.q.len()
    }

    pub fn levels(&self, user: usize) -> u64 {
        self.levels[user]
    }

    /// `|C_k| = (q_k/g)^dim`.
    pub fn codebook_size(&self, user: usize) -> u128 {
        (self.levels[user] as u128).pow(self.dim as u32)
    }

    /// Integer range of codeword coordinates for `user`, in units of `g`.
    fn index_range(&self, user: usize) -> (i64, i64) {
        let l = self.levels[user] as i64;
        (-(l / 2), (l + 1) / 2 - 1)
    }

    /// Codeword number `index` of `user`'s codebook, in mixed-radix order.
    pub fn codeword(&self, user: usize, mut index: u128) -> Codeword {
        let l = self.levels[user] as u128;
        let (lo, _) = self.index_range(user);
        let values = (0..self.dim)
            .map(|_| {
                let digit = (index % l) as i64;
                index /= l;
                (lo + digit) as f64 * self.g
            })
            .collect();
        Codeword { values }
    }

    pub fn random_codeword(&self, user: usize, rng: &mut Rng) -> Codeword {
        let (lo, hi) = self.index_range(user);
        Codeword {
            values: (0..self.dim)
                .map(|_| rng.random_range(lo..=hi) as f64 * self.g)
                .collect(),
        }
    }

    /// Dither uniform over the cell `[-q_k/2, q_k/2)^dim`.
    pub fn random_dither(&self, user: usize, rng: &mut Rng) -> Vec<f64> {
        let q = self.q[user];
        (0..self.dim).map(|_| rng.random_range(-q / 2.0..q / 2.0)).collect()
    }

    /// Whether `c` is a fine-lattice point in `user`'s fundamental cell.
    pub fn contains(&self, user: usize, c: &Codeword) -> bool {
        let (lo, hi) = self.index_range(user);
        c.values.len() == self.dim
            && c.values.iter().all(|&v| {
                let j = (v / self.g).round();
                (v / self.g - j).abs() < RATIO_TOL * (1.0 + j.abs()) && j >= lo as f64 && j <= hi as f64
            })
    }
}

/// A codebook point: every coordinate is a multiple of `g` in `[-q_k/2, q_k/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codeword {
    pub values: Vec<f64>,
}

impl Codeword {
    pub fn zeros(dim: usize) -> Self {
        Self { values: vec![0.0; dim] }
    }

    /// Coordinates in units of `g`.
    pub fn indices(&self, g: f64) -> Vec<i64> {
        self.values.iter().map(|v| (v / g).round() as i64).collect()
    }
}

/// `x mod Λ` for `Λ = q·ℤ^dim`: `x - q·floor(x/q + 1/2)`, in `[-q/2, q/2)`.
pub fn mod_lattice(x: &[f64], q: f64) -> Vec<f64> {
    x.iter().map(|&v| mod_scalar(v, q)).collect()
}

fn mod_scalar(v: f64, q: f64) -> f64 {
    let r = v - q * quantize_index(v, q);
    // Guard the half-open cell against rounding at the upper edge.
    if r >= q / 2.0 {
        r - q
    } else {
        r
    }
}

fn quantize_index(v: f64, q: f64) -> f64 {
    (v / q + 0.5).floor()
}

/// Nearest point of `q·ℤ^dim` under the same tie rule as [`mod_lattice`].
pub fn quantize(x: &[f64], q: f64) -> Vec<f64> {
    x.iter().map(|&v| v - mod_scalar(v, q)).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Transmit vector `x̃ = ((c - v - d) mod Λ_k) / r`.
pub fn encode_stream(
    c: &Codeword,
    v: &[f64],
    d: &[f64],
    r_diag: f64,
    chain: &NestedLatticeChain,
    user: usize,
) -> Result<Vec<f64>> {
    if r_diag.abs() <= 1e-12 {
        return Err(Error::ZeroGain);
    }
    let inner = sub(&sub(&c.values, v), d);
    Ok(mod_lattice(&inner, chain.coarse_scale(user))
        .into_iter()
        .map(|x| x / r_diag)
        .collect())
}

/// Relay output for slot `l` (users `l` and `l+1`): `(y + d_l + d_{l+1}) mod Λ_l`.
pub fn relay_combine(y: &[f64], d_l: &[f64], d_next: &[f64], chain: &NestedLatticeChain, slot: usize) -> Vec<f64> {
    mod_lattice(&add(&add(y, d_l), d_next), chain.coarse_scale(slot))
}

/// Nearest fine-lattice point, reduced into the cell of `Λ_l`.
pub fn relay_decode_noisy(y_tilde: &[f64], chain: &NestedLatticeChain, slot: usize) -> Codeword {
    let g = chain.fine_scale();
    let snapped: Vec<f64> = y_tilde.iter().map(|v| g * (v / g).round()).collect();
    Codeword {
        values: mod_lattice(&snapped, chain.coarse_scale(slot)),
    }
}

/// Recovers every user's codeword on one sub-channel from the `K-1` relay
/// words `w^{(l)} = (c_l + c_{l+1}) mod Λ_l` and the receiver's own codeword.
///
/// The result has one entry per user; entry `own_user` is `own` itself.
pub fn retrieve_all(
    words: &[Codeword],
    own_user: usize,
    own: &Codeword,
    chain: &NestedLatticeChain,
) -> Result<Vec<Codeword>> {
    retrieve(words, own_user, own, chain, false, |_, _| None)
}

/// Retrieval when relay words carry a known offset:
/// `w^{(l)} = (c_l + c_{l+1} - λ_{l+1}) mod Λ_l` with `λ_{l+1} ∈ Λ_{l+1}`.
///
/// `offset(l, c_{l+1})` returns `λ_{l+1}` for the backward step, or `None`
/// for words without offset. Forward steps reduce modulo `Λ_{l+1}`, which
/// removes any such offset.
pub fn retrieve_with_offsets(
    words: &[Codeword],
    own_user: usize,
    own: &Codeword,
    chain: &NestedLatticeChain,
    offset: impl FnMut(usize, &Codeword) -> Option<Vec<f64>>,
) -> Result<Vec<Codeword>> {
    retrieve(words, own_user, own, chain, true, offset)
}

fn retrieve(
    words: &[Codeword],
    own_user: usize,
    own: &Codeword,
    chain: &NestedLatticeChain,
    forward_in_next_cell: bool,
    mut offset: impl FnMut(usize, &Codeword) -> Option<Vec<f64>>,
) -> Result<Vec<Codeword>> {
    let users = chain.users();
    if words.len() + 1 != users {
        return Err(Error::DimensionMismatch(format!(
            "{} relay words for {users} users",
            words.len()
        )));
    }
    if own_user >= users || !chain.contains(own_user, own) {
        return Err(Error::InconsistentInputs(format!("own codeword is not in user {own_user}'s codebook")));
    }
    let mut out: Vec<Option<Codeword>> = vec![None; users];
    out[own_user] = Some(own.clone());
    for l in own_user..users - 1 {
        let prev = out[l].as_ref().expect("filled by the previous step");
        let diff = sub(&words[l].values, &prev.values);
        let scale = chain.coarse_scale(if forward_in_next_cell { l + 1 } else { l });
        let next = Codeword {
            values: mod_lattice(&diff, scale),
        };
        if !chain.contains(l + 1, &next) {
            return Err(Error::InconsistentInputs(format!("recovered word of user {} lies outside its codebook", l + 1)));
        }
        out[l + 1] = Some(next);
    }
    for l in (0..own_user).rev() {
        let next = out[l + 1].as_ref().expect("filled by the previous step");
        let mut diff = sub(&words[l].values, &next.values);
        if let Some(lambda) = offset(l, next) {
            diff = add(&diff, &lambda);
        }
        let prev = Codeword {
            values: mod_lattice(&diff, chain.coarse_scale(l)),
        };
        if !chain.contains(l, &prev) {
            return Err(Error::InconsistentInputs(format!("recovered word of user {l} lies outside its codebook")));
        }
        out[l] = Some(prev);
    }
    Ok(out.into_iter().map(|c| c.expect("every slot visited")).collect())
}

/// Parses either one chain object or an array of them.
pub fn chains_from_json(text: &str) -> Result<Vec<NestedLatticeChain>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(NestedLatticeChain),
        Many(Vec<NestedLatticeChain>),
    }
    let parsed: OneOrMany = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let chains = match parsed {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(v) => v,
    };
    if chains.is_empty() {
        return Err(Error::InvalidConfig("no chains given".into()));
    }
    let users = chains[0].users();
    if chains.iter().any(|c| c.users() != users) {
        return Err(Error::InvalidConfig("all chains need the same number of coarse scales".into()));
    }
    Ok(chains)
}
