//! Sum-rate maximization for the distributed-relay lattice scheme.

use std::f64::consts::LN_2;

use crate::channel::{subchannel_gains, ChannelInstance, OperatingPoint};
use crate::error::{Error, Result};
use crate::rates::{downlink_polymatroid, stream_uplink_cap};

use super::barrier::{self, BarrierOptions, BarrierProblem, ExpRow, LinRow};
use super::{user_power_budgets, RateSolution, SolverOptions, FEASIBILITY_TOL};

/// Maximizes `Σ R_{k,n}` over stream rates and powers.
///
/// Powers are eliminated through `P_{k,n} = (σ_R²/r²)·2^{c·R_{k,n}}` with
/// `c = 2(K-1)/α`, which leaves a convex program in the rates once the
/// `[·]⁺` clamps are dropped. Streams whose relaxed rate comes out
/// nonpositive are switched off and the program is solved again, until no
/// new stream is switched off.
pub fn maximize_sumrate_dist(inst: &ChannelInstance, op: &OperatingPoint) -> Result<RateSolution> {
    maximize_sumrate_dist_with(inst, op, &SolverOptions::default())
}

pub fn maximize_sumrate_dist_with(
    inst: &ChannelInstance,
    op: &OperatingPoint,
    opts: &SolverOptions,
) -> Result<RateSolution> {
    op.check_against(inst)?;
    let (k_users, n_sub) = (inst.users(), inst.relays());
    if k_users < 2 {
        return Err(Error::InvalidRegime("the exchange needs at least two users".into()));
    }
    let gains = subchannel_gains(inst);
    let budgets = user_power_budgets(op);
    let slope = 2.0 * (k_users as f64 - 1.0) / op.alpha;
    let caps = downlink_polymatroid(inst, op);

    let mut off = vec![vec![false; n_sub]; k_users];
    for k in 0..k_users {
        if budgets[k] <= 0.0 {
            off[k].iter_mut().for_each(|v| *v = true);
        }
        for n in 0..n_sub {
            if gains[k][n] <= 0.0 {
                off[k][n] = true;
            }
        }
    }

    let mut rates = vec![vec![0.0; n_sub]; k_users];
    let mut outer = 0;
    let mut newton_total = 0;
    let mut converged = true;
    loop {
        outer += 1;
        let index: Vec<(usize, usize)> = (0..k_users)
            .flat_map(|k| (0..n_sub).map(move |n| (k, n)))
            .filter(|&(k, n)| !off[k][n])
            .collect();
        if index.is_empty() {
            rates.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v = 0.0));
            break;
        }
        let var_of = |k: usize, n: usize| index.iter().position(|&p| p == (k, n));

        let mut lin = Vec::new();
        for cap in &caps {
            let vars: Vec<usize> = (0..k_users)
                .filter(|&j| j != cap.user)
                .flat_map(|j| cap.subset.members().map(move |n| (j, n)))
                .filter_map(|(j, n)| var_of(j, n))
                .collect();
            if !vars.is_empty() {
                lin.push(LinRow { vars, cap: cap.cap });
            }
        }
        let mut exp = Vec::new();
        let mut start_shift: f64 = 1.0;
        for k in 0..k_users {
            let vars: Vec<usize> = (0..n_sub).filter_map(|n| var_of(k, n)).collect();
            if vars.is_empty() {
                continue;
            }
            let offsets: Vec<f64> = index
                .iter()
                .filter(|&&(kk, _)| kk == k)
                .map(|&(_, n)| (op.sigma2_relay / gains[k][n]).ln())
                .collect();
            // Smallest L with Σ a·2^{-cL} ≤ B/2.
            let total: f64 = offsets.iter().map(|w| w.exp()).sum();
            let need = ((2.0 * total / budgets[k]).log2() / slope) + 1.0;
            start_shift = start_shift.max(need);
            exp.push(ExpRow {
                vars,
                offsets,
                slope: slope * LN_2,
                log_budget: budgets[k].ln(),
            });
        }
        let problem = BarrierProblem {
            num_vars: index.len(),
            lin,
            exp,
        };
        let result = barrier::solve(
            &problem,
            vec![-start_shift; index.len()],
            &BarrierOptions {
                gap_tol: opts.gap_tol,
                max_newton: opts.max_iterations,
            },
        );
        newton_total += result.newton_steps;
        converged &= result.converged;

        let mut newly_off = false;
        for (i, &(k, n)) in index.iter().enumerate() {
            if result.x[i] <= opts.deactivation_tol {
                off[k][n] = true;
                newly_off = true;
            }
        }
        if !newly_off {
            for row in rates.iter_mut() {
                row.iter_mut().for_each(|v| *v = 0.0);
            }
            for (i, &(k, n)) in index.iter().enumerate() {
                rates[k][n] = result.x[i];
            }
            break;
        }
    }

    let powers: Vec<Vec<f64>> = (0..k_users)
        .map(|k| {
            (0..n_sub)
                .map(|n| {
                    if off[k][n] {
                        0.0
                    } else {
                        op.sigma2_relay / gains[k][n] * (slope * rates[k][n]).exp2()
                    }
                })
                .collect()
        })
        .collect();
    let deactivated = (0..k_users)
        .flat_map(|k| (0..n_sub).map(move |n| (k, n)))
        .filter(|&(k, n)| off[k][n])
        .collect();
    let solution = RateSolution::from_streams(rates, Some(powers), deactivated, outer, newton_total, converged);
    let binding = verify_dist(inst, op, &solution)?;
    Ok(RateSolution { binding, ..solution })
}

/// Checks a solution against the unrelaxed constraint set and returns the
/// labels of the constraints that hold with equality (within `1e-6`).
pub fn verify_dist(inst: &ChannelInstance, op: &OperatingPoint, sol: &RateSolution) -> Result<Vec<String>> {
    let rates = sol
        .stream_rates
        .as_ref()
        .ok_or_else(|| Error::InfeasibleSolution("missing stream rates".into()))?;
    let powers = sol
        .powers
        .as_ref()
        .ok_or_else(|| Error::InfeasibleSolution("missing stream powers".into()))?;
    let gains = subchannel_gains(inst);
    let budgets = user_power_budgets(op);
    let users = inst.users();
    let mut binding = Vec::new();
    let fail = |msg: String| Err(Error::InfeasibleSolution(msg));
    for k in 0..users {
        for n in 0..inst.relays() {
            let (r, p) = (rates[k][n], powers[k][n]);
            if r < 0.0 || p < 0.0 {
                return fail(format!("negative rate or power at ({k},{n})"));
            }
            let cap = stream_uplink_cap(users, op.alpha, gains[k][n], p, op.sigma2_relay);
            if r > cap + FEASIBILITY_TOL {
                return fail(format!("stream ({k},{n}) rate {r} exceeds uplink cap {cap}"));
            }
        }
        let used: f64 = powers[k].iter().sum();
        if used > budgets[k] * (1.0 + FEASIBILITY_TOL) {
            return fail(format!("user {k} power {used} exceeds budget {}", budgets[k]));
        }
        if used > budgets[k] * (1.0 - 1e-6) {
            binding.push(format!("power[{k}]"));
        }
    }
    for cap in downlink_polymatroid(inst, op) {
        let load: f64 = (0..users)
            .filter(|&j| j != cap.user)
            .flat_map(|j| cap.subset.members().map(move |n| (j, n)))
            .map(|(j, n)| rates[j][n])
            .sum();
        if load > cap.cap + FEASIBILITY_TOL {
            return fail(format!(
                "downlink user {} subset {:#b}: load {load} exceeds {}",
                cap.user, cap.subset.0, cap.cap
            ));
        }
        if load > cap.cap - 1e-6 {
            binding.push(format!("downlink[{}][{:#b}]", cap.user, cap.subset.0));
        }
    }
    Ok(binding)
}
