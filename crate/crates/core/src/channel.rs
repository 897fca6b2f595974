//! Scenario configuration and channel sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, rq_decompose, seeded_rng, Matrix, RqFactors};

/// A power figure given either once for every node or per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerSpec {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl PowerSpec {
    fn expand(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            PowerSpec::Uniform(v) => Ok(vec![*v; count]),
            PowerSpec::PerNode(v) if v.len() >= count => Ok(v[..count].to_vec()),
            PowerSpec::PerNode(v) => Err(Error::InvalidConfig(format!(
                "expected {count} per-node powers, got {}",
                v.len()
            ))),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            PowerSpec::Uniform(v) => vec![*v],
            PowerSpec::PerNode(v) => v.clone(),
        }
    }
}

/// Scenario description, read from JSON.
///
/// `user_power` and `relay_power` are multipliers of the reference power
/// `P = 10^(snr/10) · sigma2_relay`, so the SNR of a sweep point is
/// `P / σ_R²`. For example the usual figure setup is `user_power = 1`,
/// `relay_power = 1/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub user_power: PowerSpec,
    pub relay_power: PowerSpec,
    pub sigma2_relay: f64,
    pub sigma2_user: f64,
    #[serde(default)]
    pub snr_grid_db: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl ScenarioConfig {
    /// Reference setup: unit user power, relay power `1/N`, unit noise.
    pub fn symmetric(k: usize, m: usize, n: usize, alpha: f64) -> Self {
        Self {
            k,
            m,
            n,
            alpha,
            user_power: PowerSpec::Uniform(1.0),
            relay_power: PowerSpec::Uniform(1.0 / n as f64),
            sigma2_relay: 1.0,
            sigma2_user: 1.0,
            snr_grid_db: Vec::new(),
            seeds: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k < 2 {
            return bad(format!("K must be >= 2, got {}", self.k));
        }
        if self.m == 0 || self.n == 0 {
            return bad("M and N must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        for (name, spec) in [("user_power", &self.user_power), ("relay_power", &self.relay_power)] {
            if spec.values().iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return bad(format!("{name} entries must be positive"));
            }
        }
        self.user_power.expand(self.k)?;
        self.relay_power.expand(self.n)?;
        if !(self.sigma2_relay > 0.0 && self.sigma2_user > 0.0) {
            return bad("noise variances must be positive".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid entries must be finite".into());
        }
        Ok(())
    }

    /// Relays left active after disabling the highest-indexed ones when `M < N`.
    pub fn effective_relays(&self) -> usize {
        self.n.min(self.m)
    }

    /// Reference power `P` for an SNR in dB.
    pub fn reference_power(&self, snr_db: f64) -> f64 {
        10f64.powf(snr_db / 10.0) * self.sigma2_relay
    }

    /// Concrete powers and noise levels at one SNR point and time split.
    pub fn operating_point(&self, snr_db: f64, alpha: f64) -> Result<OperatingPoint> {
        let p = self.reference_power(snr_db);
        let user = self.user_power.expand(self.k)?;
        let relay = self.relay_power.expand(self.n)?;
        Ok(OperatingPoint {
            alpha,
            user_powers: user.iter().map(|b| b * p).collect(),
            relay_powers: relay[..self.effective_relays()].iter().map(|b| b * p).collect(),
            sigma2_relay: self.sigma2_relay,
            sigma2_user: vec![self.sigma2_user; self.k],
        })
    }
}

/// Powers, noise variances and time split for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub alpha: f64,
    /// `P_k`, one per user.
    pub user_powers: Vec<f64>,
    /// `P_{R,n}`, one per active relay.
    pub relay_powers: Vec<f64>,
    pub sigma2_relay: f64,
    /// `σ_k²`, one per user.
    pub sigma2_user: Vec<f64>,
}

impl OperatingPoint {
    pub fn total_relay_power(&self) -> f64 {
        self.relay_powers.iter().sum()
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    pub(crate) fn check_against(&self, inst: &ChannelInstance) -> Result<()> {
        if self.user_powers.len() != inst.users() || self.sigma2_user.len() != inst.users() {
            return Err(Error::DimensionMismatch("one power/noise entry per user".into()));
        }
        if self.relay_powers.len() != inst.relays() {
            return Err(Error::DimensionMismatch(format!(
                "{} relay powers for {} active relays",
                self.relay_powers.len(),
                inst.relays()
            )));
        }
        Ok(())
    }
}

/// One channel draw: uplink `H_k` (N×M), downlink `G_k` (M×N) and the RQ
/// factors of every `H_k`, after relay disablement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInstance {
    pub uplink: Vec<Matrix>,
    pub downlink: Vec<Matrix>,
    pub rq: Vec<RqFactors>,
    /// Antennas per user.
    pub antennas: usize,
    /// Relays in the scenario before disablement.
    pub configured_relays: usize,
}

impl ChannelInstance {
    /// Builds an instance from explicit matrices. All `H_k` must share a
    /// shape N×M with N ≤ M, and every `G_k` must be M×N.
    pub fn from_matrices(uplink: Vec<Matrix>, downlink: Vec<Matrix>) -> Result<Self> {
        let first = uplink
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no users".into()))?;
        let (n, m) = (first.rows(), first.cols());
        if uplink.len() != downlink.len() {
            return Err(Error::DimensionMismatch("uplink/downlink user counts differ".into()));
        }
        if uplink.iter().any(|h| h.rows() != n || h.cols() != m)
            || downlink.iter().any(|g| g.rows() != m || g.cols() != n)
        {
            return Err(Error::DimensionMismatch("inconsistent channel shapes".into()));
        }
        let rq = uplink.iter().map(rq_decompose).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            uplink,
            downlink,
            rq,
            antennas: m,
            configured_relays: n,
        })
    }

    pub fn users(&self) -> usize {
        self.uplink.len()
    }

    /// Active relays (= sub-channels).
    pub fn relays(&self) -> usize {
        self.uplink[0].rows()
    }

    /// Row `n` of `H_k`: the channel from user `k` to relay `n`.
    pub fn uplink_row(&self, k: usize, n: usize) -> &[f64] {
        self.uplink[k].row(n)
    }

    /// Column `n` of `G_k`: the channel from relay `n` to user `k`.
    pub fn downlink_col(&self, k: usize, n: usize) -> Vec<f64> {
        self.downlink[k].col(n)
    }
}

/// Draws an instance with i.i.d. 𝒩(0,1) entries. Every `H_k` is drawn at
/// full size N×M before `G_k`; when `M < N` the highest-indexed `N - M`
/// relays are then dropped.
pub fn sample_instance(cfg: &ScenarioConfig, seed: u64) -> Result<ChannelInstance> {
    cfg.validate()?;
    let mut rng = seeded_rng(seed);
    let uplink_full: Vec<Matrix> = (0..cfg.k)
        .map(|_| gaussian_matrix(cfg.n, cfg.m, &mut rng))
        .collect();
    let downlink_full: Vec<Matrix> = (0..cfg.k)
        .map(|_| gaussian_matrix(cfg.m, cfg.n, &mut rng))
        .collect();
    let active = cfg.effective_relays();
    let uplink = uplink_full.iter().map(|h| h.top_rows(active)).collect();
    let downlink = downlink_full.iter().map(|g| g.left_cols(active)).collect();
    let mut inst = ChannelInstance::from_matrices(uplink, downlink)?;
    inst.configured_relays = cfg.n;
    Ok(inst)
}

/// Squared RQ diagonals `r_k(n,n)²`, indexed `[k][n]`.
pub fn subchannel_gains(inst: &ChannelInstance) -> Vec<Vec<f64>> {
    inst.rq
        .iter()
        .map(|f| f.diagonal().iter().map(|d| d * d).collect())
        .collect()
}
