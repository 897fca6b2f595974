//! Cut-set outer bound with every cut maximized on its own.

use crate::channel::{ChannelInstance, OperatingPoint};
use crate::error::Result;
use crate::linalg::{sym_eigen, waterfill, waterfill_objective, Matrix};

use super::coop::check_user_rows;
use super::lp::{solve_lp, LpProblem};
use super::mac::mac_iwf;
use super::RateSolution;

/// Per-user cut caps: `(uplink cut, downlink cut)`, each bounding the sum
/// rate of the other users, both already maximized over covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct CutCaps {
    pub uplink: Vec<f64>,
    pub downlink: Vec<f64>,
    pub converged: bool,
}

/// Maximized uplink and downlink cut values for every user.
pub fn cut_caps(inst: &ChannelInstance, op: &OperatingPoint) -> Result<CutCaps> {
    op.check_against(inst)?;
    let users = inst.users();
    let mut uplink = Vec::with_capacity(users);
    let mut downlink = Vec::with_capacity(users);
    let mut converged = true;
    for k in 0..users {
        let others: Vec<usize> = (0..users).filter(|&j| j != k).collect();
        let channels: Vec<Matrix> = others.iter().map(|&j| inst.uplink[j].clone()).collect();
        let budgets: Vec<f64> = others.iter().map(|&j| op.user_powers[j]).collect();
        let mac = mac_iwf(&channels, &budgets, op.sigma2_relay)?;
        converged &= mac.converged;
        uplink.push(0.5 * op.alpha * mac.value.max(0.0));
        downlink.push(0.5 * (1.0 - op.alpha) * downlink_cut(inst, op, k));
    }
    Ok(CutCaps {
        uplink,
        downlink,
        converged,
    })
}

/// `max_{tr Q ≤ ΣP_R} log₂det(I + G_k Q G_kᵀ/σ_k²)`, by water-filling over the
/// eigenvalues of `G_kᵀG_k`.
fn downlink_cut(inst: &ChannelInstance, op: &OperatingPoint, k: usize) -> f64 {
    let g = inst.downlink[k].to_nalgebra();
    let gram = Matrix::from_nalgebra(&(g.transpose() * g));
    let (eig, _) = sym_eigen(&gram);
    let gains: Vec<f64> = eig.iter().map(|v| v.max(0.0)).collect();
    match waterfill(&gains, op.total_relay_power(), op.sigma2_user[k]) {
        Ok(alloc) => waterfill_objective(&gains, &alloc, op.sigma2_user[k]),
        Err(_) => 0.0,
    }
}

/// Upper bound on the exchange sum-rate. The cuts are maximized separately,
/// so the value can exceed the jointly optimized bound; the solution is
/// flagged `relaxed_bound`.
pub fn cutset_bound(inst: &ChannelInstance, op: &OperatingPoint) -> Result<RateSolution> {
    let caps = cut_caps(inst, op)?;
    let users = inst.users();
    let limits: Vec<f64> = caps
        .uplink
        .iter()
        .zip(&caps.downlink)
        .map(|(u, d)| u.min(*d).max(0.0))
        .collect();
    let mut lp = LpProblem::sum_rate(users);
    for (k, &cap) in limits.iter().enumerate() {
        let vars: Vec<(usize, f64)> = (0..users).filter(|&j| j != k).map(|j| (j, 1.0)).collect();
        if vars.is_empty() {
            continue;
        }
        lp.push(vars, cap, format!("cut[{k}]"));
    }
    let sol = solve_lp(&lp)?;
    let unbounded = vec![f64::INFINITY; users];
    let binding = check_user_rows(&sol.x, &unbounded, &limits)?;
    let mut out = RateSolution::from_users(sol.x, None, 1, caps.converged);
    out.relaxed_bound = true;
    out.binding = binding;
    Ok(out)
}
