//! Sum-rate of the cooperative-relay reference scheme.

use crate::channel::{subchannel_gains, ChannelInstance, OperatingPoint};
use crate::error::{Error, Result};
use crate::linalg::{check_covariance, project_psd_trace_ball, Matrix};
use crate::rates::{coop_constraints, downlink_cap_with, stream_uplink_cap};

use super::lp::{solve_lp, LpProblem, LpSolution};
use super::{user_power_budgets, RateSolution, FEASIBILITY_TOL};

const REFINE_ITERATIONS: usize = 500;
const REFINE_STEP: f64 = 0.1;

/// Best uplink sum over the sub-channels of one user and the power split
/// that attains it.
///
/// Without the `+1` inside the log, the optimal split puts equal power on
/// the strongest `m` sub-channels for some `m`, so trying every `m` is exact.
pub fn coop_uplink_cap(
    users: usize,
    alpha: f64,
    gains: &[f64],
    budget: f64,
    sigma2: f64,
) -> (f64, Vec<f64>) {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&n| gains[n] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    let mut best = (0.0, vec![0.0; gains.len()]);
    if budget <= 0.0 {
        return best;
    }
    for m in 1..=order.len() {
        let share = budget / m as f64;
        let mut powers = vec![0.0; gains.len()];
        let mut total = 0.0;
        for &n in &order[..m] {
            let cap = stream_uplink_cap(users, alpha, gains[n], share, sigma2);
            if cap > 0.0 {
                powers[n] = share;
                total += cap;
            }
        }
        if total > best.0 {
            best = (total, powers);
        }
    }
    best
}

fn coop_lp(uplink: &[f64], downlink: &[f64]) -> Result<LpSolution> {
    let k = uplink.len();
    let mut lp = LpProblem::sum_rate(k);
    for (u, &cap) in uplink.iter().enumerate() {
        lp.push(vec![(u, 1.0)], cap.max(0.0), format!("uplink[{u}]"));
    }
    for (u, &cap) in downlink.iter().enumerate() {
        let vars: Vec<(usize, f64)> = (0..k).filter(|&j| j != u).map(|j| (j, 1.0)).collect();
        lp.push(vars, cap.max(0.0), format!("downlink[{u}]"));
    }
    solve_lp(&lp)
}

/// Maximizes `Σ R_k` with fully cooperating relays.
///
/// The relay covariance starts from the better of `(ΣP_R/N)·I` and
/// `diag(P_R)`. With `refine_qr` it is then improved by projected
/// supergradient ascent on the LP value, keeping the best iterate.
pub fn maximize_sumrate_coop(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    refine_qr: bool,
) -> Result<RateSolution> {
    op.check_against(inst)?;
    let users = inst.users();
    if users < 2 {
        return Err(Error::InvalidRegime("the exchange needs at least two users".into()));
    }
    let gains = subchannel_gains(inst);
    let budgets = user_power_budgets(op);
    let (uplink, powers): (Vec<f64>, Vec<Vec<f64>>) = (0..users)
        .map(|k| coop_uplink_cap(users, op.alpha, &gains[k], budgets[k], op.sigma2_relay))
        .unzip();

    let (best_q, lp, iterations) = optimize_relay_covariance(inst, op, refine_qr, |down| {
        let sol = coop_lp(&uplink, down)?;
        let duals = sol.duals[users..].to_vec();
        Ok((sol, duals))
    })?;
    let solution = RateSolution::from_users(lp.x.clone(), Some(powers), iterations, true)
        .with_relay_covariance(best_q);
    let binding = verify_coop(inst, op, &solution)?;
    Ok(RateSolution { binding, ..solution })
}

/// Picks the relay covariance for an LP whose downlink rows are
/// `Σ_{k'≠k} R_{k'} ≤ D_k(Q_R)`. `solve` maps the downlink caps to the LP
/// solution and the duals of those rows. Returns the covariance, its LP
/// solution and the number of evaluations.
pub(crate) fn optimize_relay_covariance(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    refine: bool,
    solve: impl Fn(&[f64]) -> Result<(LpSolution, Vec<f64>)>,
) -> Result<(Matrix, LpSolution, usize)> {
    let users = inst.users();
    let n = inst.relays();
    let total = op.total_relay_power();
    let candidates = [
        Matrix::identity(n).scale(total / n as f64),
        Matrix::diag(&op.relay_powers),
    ];
    let evaluate = |q: &Matrix| {
        let down: Vec<f64> = (0..users).map(|k| downlink_cap_with(inst, op, k, q)).collect();
        solve(&down)
    };
    let mut best_q = candidates[0].clone();
    let mut best = evaluate(&best_q)?;
    let mut evaluations = 1;
    for q in &candidates[1..] {
        let cand = evaluate(q)?;
        evaluations += 1;
        if cand.0.objective > best.0.objective {
            best = cand;
            best_q = q.clone();
        }
    }
    if refine && total > 0.0 {
        let mut q = best_q.clone();
        let mut duals = best.1.clone();
        for t in 1..=REFINE_ITERATIONS {
            let grad = supergradient(inst, op, &q, &duals);
            let norm = grad.frobenius_norm();
            if norm <= 0.0 {
                break;
            }
            let step = REFINE_STEP * total / (t as f64).sqrt() / norm;
            q = project_psd_trace_ball(&(&q + &grad.scale(step)), total);
            let current = evaluate(&q)?;
            evaluations += 1;
            duals = current.1.clone();
            if current.0.objective > best.0.objective {
                best = current;
                best_q = q.clone();
            }
        }
    }
    Ok((best_q, best.0, evaluations))
}

/// `Σ_k y_k ∇D_k(Q)` with `∇D_k = ((1-α)/(2 ln 2))·G_kᵀ(σ_k²I + G_k Q G_kᵀ)⁻¹G_k`.
fn supergradient(inst: &ChannelInstance, op: &OperatingPoint, q: &Matrix, duals: &[f64]) -> Matrix {
    let n = inst.relays();
    let mut acc = Matrix::zeros(n, n);
    for (k, &y) in duals.iter().enumerate() {
        if y <= 0.0 {
            continue;
        }
        let g = inst.downlink[k].to_nalgebra();
        let mut s = &g * q.to_nalgebra() * g.transpose();
        for i in 0..s.nrows() {
            s[(i, i)] += op.sigma2_user[k];
        }
        let Some(ch) = s.cholesky() else { continue };
        let grad = g.transpose() * ch.inverse() * &g;
        let coef = y * (1.0 - op.alpha) / (2.0 * std::f64::consts::LN_2);
        acc = &acc + &Matrix::from_nalgebra(&grad).scale(coef);
    }
    (&acc + &acc.transpose()).scale(0.5)
}

/// Checks per-user rates against the cooperative constraint set.
pub fn verify_coop(inst: &ChannelInstance, op: &OperatingPoint, sol: &RateSolution) -> Result<Vec<String>> {
    let q_r = sol
        .relay_covariance
        .as_ref()
        .ok_or_else(|| Error::InfeasibleSolution("missing relay covariance".into()))?;
    let powers = sol
        .powers
        .as_ref()
        .ok_or_else(|| Error::InfeasibleSolution("missing stream powers".into()))?;
    let budgets = user_power_budgets(op);
    for (k, p) in powers.iter().enumerate() {
        let used: f64 = p.iter().sum();
        if used > budgets[k] * (1.0 + FEASIBILITY_TOL) {
            return Err(Error::InfeasibleSolution(format!("user {k} power {used} over budget")));
        }
    }
    let caps = coop_constraints(inst, op, powers, q_r)?;
    check_covariance(q_r, op.total_relay_power())?;
    check_user_rows(&sol.user_rates, &caps.uplink, &caps.downlink)
}

/// Shared check for `R_k ≤ up_k` and `Σ_{k'≠k} R_{k'} ≤ down_k`.
pub(crate) fn check_user_rows(rates: &[f64], up: &[f64], down: &[f64]) -> Result<Vec<String>> {
    let mut binding = Vec::new();
    let total: f64 = rates.iter().sum();
    for (k, &r) in rates.iter().enumerate() {
        if r < 0.0 {
            return Err(Error::InfeasibleSolution(format!("negative rate for user {k}")));
        }
        if r > up[k] + FEASIBILITY_TOL {
            return Err(Error::InfeasibleSolution(format!("user {k} rate {r} exceeds uplink cap {}", up[k])));
        }
        if r > up[k] - 1e-6 {
            binding.push(format!("uplink[{k}]"));
        }
        let others = total - r;
        if others > down[k] + FEASIBILITY_TOL {
            return Err(Error::InfeasibleSolution(format!(
                "downlink to user {k}: load {others} exceeds {}",
                down[k]
            )));
        }
        if others > down[k] - 1e-6 {
            binding.push(format!("downlink[{k}]"));
        }
    }
    Ok(binding)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uplink_cap_matches_brute_force() {
        // Two sub-channels, grid over the split.
        let gains = [9.0, 2.0];
        let (best, powers) = coop_uplink_cap(3, 0.5, &gains, 10.0, 1.0);
        let mut grid: f64 = 0.0;
        for i in 0..=100_000 {
            let p = 10.0 * i as f64 / 100_000.0;
            let v = stream_uplink_cap(3, 0.5, 9.0, p, 1.0) + stream_uplink_cap(3, 0.5, 2.0, 10.0 - p, 1.0);
            grid = grid.max(v);
        }
        assert!((best - grid).abs() < 1e-6, "{best} vs {grid}");
        assert!(powers.iter().sum::<f64>() <= 10.0 + 1e-12);
    }

    #[test]
    fn weak_channels_get_nothing() {
        let (v, p) = coop_uplink_cap(2, 0.5, &[0.1, 0.2], 1.0, 1.0);
        assert_eq!(v, 0.0);
        assert!(p.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lp_shape_for_two_users() {
        let s = coop_lp(&[1.0, 5.0], &[2.0, 0.5]).unwrap();
        // R_0 ≤ min(1, 0.5), R_1 ≤ min(5, 2).
        assert!((s.objective - 2.5).abs() < 1e-12);
    }
}
