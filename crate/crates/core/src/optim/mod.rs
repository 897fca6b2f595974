//! Sum-rate solvers: the LP over rates, the distributed-scheme program with
//! its deactivation loop, the cooperative scheme, MIMO MAC water-filling and
//! the cut-set bound.

mod barrier;
mod coop;
mod cutset;
mod dist;
mod lp;
mod mac;

pub use coop::{coop_uplink_cap, maximize_sumrate_coop, verify_coop};
pub(crate) use coop::optimize_relay_covariance;
pub use cutset::{cut_caps, cutset_bound, CutCaps};
pub use dist::{maximize_sumrate_dist, maximize_sumrate_dist_with, verify_dist};
pub use lp::{solve_lp, LpProblem, LpRow, LpSolution};
pub use mac::{mac_iwf, MacSolution};

use serde::{Deserialize, Serialize};

use crate::channel::OperatingPoint;
use crate::linalg::Matrix;

/// Slack allowed when verifying a returned solution.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Duality-gap target of the interior-point solve.
    pub gap_tol: f64,
    /// Newton-step budget across one inner solve.
    pub max_iterations: usize,
    /// Relaxed rates at or below this are treated as nonpositive.
    pub deactivation_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-10,
            max_iterations: 100_000,
            deactivation_tol: 1e-9,
        }
    }
}

/// Output of every sum-rate solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSolution {
    /// Per-stream rates `[k][n]`, for schemes that split rates by sub-channel.
    pub stream_rates: Option<Vec<Vec<f64>>>,
    /// Per-user rates.
    pub user_rates: Vec<f64>,
    /// Per-stream powers `[k][n]`.
    pub powers: Option<Vec<Vec<f64>>>,
    pub relay_covariance: Option<Matrix>,
    pub sum_rate: f64,
    /// Switched-off streams `(k, n)`.
    pub deactivated: Vec<(usize, usize)>,
    /// Outer iterations (deactivation rounds, refinement steps, ...).
    pub iterations: usize,
    pub inner_iterations: usize,
    /// Constraints met with equality.
    pub binding: Vec<String>,
    pub relaxed_bound: bool,
    pub converged: bool,
}

impl RateSolution {
    pub(crate) fn from_streams(
        rates: Vec<Vec<f64>>,
        powers: Option<Vec<Vec<f64>>>,
        deactivated: Vec<(usize, usize)>,
        iterations: usize,
        inner_iterations: usize,
        converged: bool,
    ) -> Self {
        let user_rates: Vec<f64> = rates.iter().map(|r| r.iter().sum()).collect();
        Self {
            sum_rate: user_rates.iter().sum(),
            stream_rates: Some(rates),
            user_rates,
            powers,
            relay_covariance: None,
            deactivated,
            iterations,
            inner_iterations,
            binding: Vec::new(),
            relaxed_bound: false,
            converged,
        }
    }

    pub(crate) fn from_users(
        rates: Vec<f64>,
        powers: Option<Vec<Vec<f64>>>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        Self {
            sum_rate: rates.iter().sum(),
            stream_rates: None,
            user_rates: rates,
            powers,
            relay_covariance: None,
            deactivated: Vec::new(),
            iterations,
            inner_iterations: 0,
            binding: Vec::new(),
            relaxed_bound: false,
            converged,
        }
    }

    pub(crate) fn with_relay_covariance(mut self, q: Matrix) -> Self {
        self.relay_covariance = Some(q);
        self
    }
}

/// Total stream power available to each user over one exchange round:
/// `(K-1)·P_k` for the two end users, who transmit in one slot, and
/// `(K-1)·P_k/2` for the others, who transmit in two.
pub fn user_power_budgets(op: &OperatingPoint) -> Vec<f64> {
    let k = op.user_powers.len();
    let scale = k as f64 - 1.0;
    op.user_powers
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i == 0 || i + 1 == k {
                scale * p
            } else {
                scale * p / 2.0
            }
        })
        .collect()
}
