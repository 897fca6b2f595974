//! Rate constraints and closed-form bounds.
//!
//! All rates are in bits per channel use of a full exchange round and all
//! logarithms are base 2.

mod dof;
mod gap;

pub use dof::{dof_quantities, DofQuantities};
pub use gap::{
    asymptotic_gap_bound, asymptotic_gap_bound_exact, fisher_z_mean, fisher_z_mean_mc,
    FisherEstimate, GapBound,
};

use serde::{Deserialize, Serialize};

use crate::channel::{subchannel_gains, ChannelInstance, OperatingPoint};
use crate::error::{Error, Result};
use crate::linalg::{check_covariance, logdet_identity_plus, Matrix};

/// Bitmask over active relays; bit `n` set means relay `n` is in the subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelaySubset(pub u32);

impl RelaySubset {
    pub fn full(n: usize) -> Self {
        Self(((1u64 << n) - 1) as u32)
    }

    pub fn contains(self, n: usize) -> bool {
        self.0 >> n & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&n| self.contains(n))
    }

    /// Every nonempty subset of `0..n`; there are `2^n - 1` of them.
    pub fn all_nonempty(n: usize) -> impl Iterator<Item = RelaySubset> {
        (1..(1u32 << n)).map(RelaySubset)
    }
}

/// One downlink multiple-access constraint:
/// `Σ_{n∈S} Σ_{k'≠k} R_{k',n} ≤ cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolymatroidCap {
    pub user: usize,
    pub subset: RelaySubset,
    pub cap: f64,
}

/// Right-hand sides of the achievable-rate constraints.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RateConstraintSet {
    /// Per-stream caps `c_{k,n}`, indexed `[k][n]`.
    pub box_caps: Vec<Vec<f64>>,
    pub polymatroid: Vec<PolymatroidCap>,
    /// Per-user caps for the cooperative and cut-set forms.
    pub per_user_caps: Option<Vec<f64>>,
}

/// Per-stream uplink cap with the `[·]⁺` clamp:
/// `(1/(K-1)) · [ (α/2)·log₂(r² P / σ_R²) ]⁺`.
pub fn stream_uplink_cap(users: usize, alpha: f64, gain: f64, power: f64, sigma2: f64) -> f64 {
    if power <= 0.0 || gain <= 0.0 {
        return 0.0;
    }
    let raw = 0.5 * alpha * (gain * power / sigma2).log2();
    raw.max(0.0) / (users as f64 - 1.0)
}

/// Box caps of the distributed scheme for the stream powers `powers[k][n]`.
pub fn uplink_caps_dist(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    powers: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let gains = subchannel_gains(inst);
    gains
        .iter()
        .zip(powers)
        .map(|(gk, pk)| {
            gk.iter()
                .zip(pk)
                .map(|(&g, &p)| stream_uplink_cap(inst.users(), op.alpha, g, p, op.sigma2_relay))
                .collect()
        })
        .collect()
}

/// `((1-α)/2)·log₂det(I_M + (1/σ_k²) Σ_{n∈S} P_{R,n} g_{n,k} g_{n,k}ᵀ)`
pub fn downlink_subset_cap(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    user: usize,
    subset: RelaySubset,
) -> f64 {
    let q = Matrix::diag(
        &(0..inst.relays())
            .map(|n| if subset.contains(n) { op.relay_powers[n] } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    downlink_cap_with(inst, op, user, &q)
}

/// `((1-α)/2)·log₂det(I_M + G_k Q_R G_kᵀ / σ_k²)`
pub fn downlink_cap_with(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    user: usize,
    q_r: &Matrix,
) -> f64 {
    let s = inst.downlink[user].congruence(q_r).scale(1.0 / op.sigma2_user[user]);
    let ld = logdet_identity_plus(&s).expect("I + GQGᵀ is positive definite");
    (0.5 * (1.0 - op.alpha) * ld).max(0.0)
}

/// Every downlink polymatroid constraint, `K·(2^N - 1)` of them.
///
/// The enumeration is exponential in the relay count; this is meant for
/// desk-scale N (≤ 6 or so).
pub fn downlink_polymatroid(inst: &ChannelInstance, op: &OperatingPoint) -> Vec<PolymatroidCap> {
    let mut out = Vec::with_capacity(inst.users() * ((1 << inst.relays()) - 1));
    for user in 0..inst.users() {
        for subset in RelaySubset::all_nonempty(inst.relays()) {
            out.push(PolymatroidCap {
                user,
                subset,
                cap: downlink_subset_cap(inst, op, user, subset),
            });
        }
    }
    out
}

/// Full constraint set of the distributed scheme for given stream powers.
pub fn dist_constraint_set(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    powers: &[Vec<f64>],
) -> RateConstraintSet {
    RateConstraintSet {
        box_caps: uplink_caps_dist(inst, op, powers),
        polymatroid: downlink_polymatroid(inst, op),
        per_user_caps: None,
    }
}

/// Per-user caps of the cooperative-relay scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoopCaps {
    /// `R_k ≤ uplink[k]`
    pub uplink: Vec<f64>,
    /// `Σ_{k'≠k} R_{k'} ≤ downlink[k]`
    pub downlink: Vec<f64>,
}

pub fn coop_constraints(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    powers: &[Vec<f64>],
    q_r: &Matrix,
) -> Result<CoopCaps> {
    check_covariance(q_r, op.total_relay_power())?;
    let uplink = uplink_caps_dist(inst, op, powers)
        .iter()
        .map(|row| row.iter().sum())
        .collect();
    let downlink = (0..inst.users())
        .map(|k| downlink_cap_with(inst, op, k, q_r))
        .collect();
    Ok(CoopCaps { uplink, downlink })
}

/// Cut caps for every user `k`: `(uplink cut, downlink cut)`, each bounding
/// `Σ_{k'≠k} R_{k'}`.
pub fn cutset_constraints(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    q_users: &[Matrix],
    q_r: &Matrix,
) -> Result<Vec<(f64, f64)>> {
    if q_users.len() != inst.users() {
        return Err(Error::DimensionMismatch("one covariance per user".into()));
    }
    for (q, &p) in q_users.iter().zip(&op.user_powers) {
        check_covariance(q, p)?;
    }
    check_covariance(q_r, op.total_relay_power())?;
    let n = inst.relays();
    (0..inst.users())
        .map(|k| {
            let mut acc = Matrix::zeros(n, n);
            for (j, q) in q_users.iter().enumerate() {
                if j != k {
                    acc = &acc + &inst.uplink[j].congruence(q);
                }
            }
            let up = 0.5 * op.alpha * logdet_identity_plus(&acc.scale(1.0 / op.sigma2_relay))?;
            Ok((up.max(0.0), downlink_cap_with(inst, op, k, q_r)))
        })
        .collect()
}
