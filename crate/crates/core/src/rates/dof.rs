use serde::{Deserialize, Serialize};

/// High-SNR degrees of freedom (rate per unit of `log₂ P`) of every
/// constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofQuantities {
    /// Per-stream uplink DoF of the distributed scheme, `α/(2(K-1))`.
    pub dist_up_stream: f64,
    /// Per-(k,n) downlink constraint DoF of the distributed scheme, `(1-α)/2`.
    pub dist_down_user_sum: f64,
    /// Per-user uplink DoF with cooperative relays, `Nα/(2(K-1))`.
    pub coop_up_user: f64,
    /// Per-user downlink DoF with cooperative relays, `N(1-α)/2`.
    pub coop_down: f64,
    /// Cut-set uplink DoF per cut, `Nα/2`.
    pub bound_up: f64,
    /// Cut-set downlink DoF per cut, `N(1-α)/2`.
    pub bound_down: f64,
    /// Maximum downlink sum DoF of the distributed scheme, `N(1-α)K/(2(K-1))`.
    pub dist_down_sum: f64,
    /// Uplink sum DoF of the distributed scheme, `KNα/(2(K-1))`.
    pub dist_up_sum: f64,
    /// Uplink DoF region contained in the downlink one (holds for α < 1/2).
    pub dist_uplink_limited: bool,
    pub coop_uplink_limited: bool,
}

impl DofQuantities {
    /// Sum DoF achieved by the distributed scheme.
    pub fn dist_sum(&self) -> f64 {
        self.dist_up_sum.min(self.dist_down_sum)
    }
}

pub fn dof_quantities(k: usize, n: usize, m: usize, alpha: f64) -> DofQuantities {
    debug_assert!(n <= m, "DoF expressions assume N <= M");
    let (kf, nf) = (k as f64, n as f64);
    let dist_up_stream = alpha / (2.0 * (kf - 1.0));
    let dist_down_user_sum = (1.0 - alpha) / 2.0;
    let coop_up_user = nf * alpha / (2.0 * (kf - 1.0));
    let coop_down = nf * (1.0 - alpha) / 2.0;
    DofQuantities {
        dist_up_stream,
        dist_down_user_sum,
        coop_up_user,
        coop_down,
        bound_up: nf * alpha / 2.0,
        bound_down: nf * (1.0 - alpha) / 2.0,
        dist_down_sum: nf * (1.0 - alpha) * kf / (2.0 * (kf - 1.0)),
        dist_up_sum: kf * nf * dist_up_stream,
        // Every (k,n) downlink row sums K-1 streams.
        dist_uplink_limited: (kf - 1.0) * dist_up_stream < dist_down_user_sum,
        coop_uplink_limited: (kf - 1.0) * coop_up_user < coop_down,
    }
}
