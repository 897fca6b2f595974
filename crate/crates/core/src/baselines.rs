//! Decode-and-forward and amplify-and-forward reference schemes.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelInstance, OperatingPoint};
use crate::error::{Error, Result};
use crate::linalg::{check_covariance, logdet_psd, sym_eigen, waterfill, Matrix};
use crate::optim::{solve_lp, LpProblem, RateSolution, FEASIBILITY_TOL};
use crate::optim::optimize_relay_covariance;

/// How the baselines pick user transmit covariances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UserCovariance {
    /// `Q_k = (P_k/M)·I`.
    #[default]
    Equal,
    /// Single-user water-filling on `H_kᵀH_k`.
    WaterFilling,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub user_covariance: UserCovariance,
    /// Refine the relay covariance of the DF downlink.
    pub refine_qr: bool,
}

pub fn user_covariances(inst: &ChannelInstance, op: &OperatingPoint, mode: UserCovariance) -> Vec<Matrix> {
    let m = inst.antennas;
    (0..inst.users())
        .map(|k| match mode {
            UserCovariance::Equal => Matrix::identity(m).scale(op.user_powers[k] / m as f64),
            UserCovariance::WaterFilling => {
                let h = inst.uplink[k].to_nalgebra();
                let (gains, vecs) = sym_eigen(&Matrix::from_nalgebra(&(h.transpose() * h)));
                let gains: Vec<f64> = gains.iter().map(|g| g.max(0.0)).collect();
                let p = waterfill(&gains, op.user_powers[k], op.sigma2_relay).unwrap_or_else(|_| vec![0.0; m]);
                vecs.congruence(&Matrix::diag(&p))
            }
        })
        .collect()
}

/// `h Q hᵀ` for row `n` of `H_k`.
fn row_power(inst: &ChannelInstance, q: &Matrix, k: usize, n: usize) -> f64 {
    let h = inst.uplink_row(k, n);
    let mut acc = 0.0;
    for i in 0..h.len() {
        for j in 0..h.len() {
            acc += h[i] * q[(i, j)] * h[j];
        }
    }
    acc
}

fn user_subsets(users: usize, exclude: Option<usize>) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << users)).filter_map(move |mask| {
        if exclude.is_some_and(|e| mask >> e & 1 == 1) {
            return None;
        }
        Some((0..users).filter(|&k| mask >> k & 1 == 1).collect())
    })
}

fn verified(lp: &LpProblem, x: Vec<f64>, relay_covariance: Option<Matrix>) -> Result<RateSolution> {
    let violation = lp.max_violation(&x);
    if violation > FEASIBILITY_TOL {
        return Err(Error::InfeasibleSolution(format!("constraint violated by {violation}")));
    }
    let binding = (0..lp.rows.len())
        .filter(|&i| lp.row_value(i, &x) > lp.rows[i].cap - 1e-6)
        .map(|i| lp.rows[i].label.clone())
        .collect();
    let mut sol = RateSolution::from_users(x, None, 1, true);
    sol.relay_covariance = relay_covariance;
    sol.binding = binding;
    Ok(sol)
}

/// Decode-and-forward: every relay decodes all messages, then the relays
/// cooperate on the downlink.
pub fn df_sumrate(inst: &ChannelInstance, op: &OperatingPoint) -> Result<RateSolution> {
    df_sumrate_with(inst, op, &BaselineOptions::default())
}

pub fn df_sumrate_with(inst: &ChannelInstance, op: &OperatingPoint, opts: &BaselineOptions) -> Result<RateSolution> {
    op.check_against(inst)?;
    let users = inst.users();
    let q = user_covariances(inst, op, opts.user_covariance);
    let mut uplink = LpProblem::sum_rate(users);
    for n in 0..inst.relays() {
        for s in user_subsets(users, None) {
            let snr: f64 = s.iter().map(|&k| row_power(inst, &q[k], k, n)).sum::<f64>() / op.sigma2_relay;
            let cap = 0.5 * op.alpha * (1.0 + snr).log2();
            uplink.push(s.iter().map(|&k| (k, 1.0)).collect(), cap, format!("relay[{n}]{s:?}"));
        }
    }
    let uplink_rows = uplink.rows.len();
    let build = |down: &[f64]| {
        let mut lp = uplink.clone();
        for (k, &cap) in down.iter().enumerate() {
            let vars: Vec<(usize, f64)> = (0..users).filter(|&j| j != k).map(|j| (j, 1.0)).collect();
            if !vars.is_empty() {
                lp.push(vars, cap.max(0.0), format!("downlink[{k}]"));
            }
        }
        lp
    };
    let (q_r, _, _) = optimize_relay_covariance(inst, op, opts.refine_qr, |down| {
        let sol = solve_lp(&build(down))?;
        let duals = if users > 1 { sol.duals[uplink_rows..].to_vec() } else { Vec::new() };
        Ok((sol, duals))
    })?;
    check_covariance(&q_r, op.total_relay_power())?;
    let down: Vec<f64> = (0..users)
        .map(|k| crate::rates::downlink_cap_with(inst, op, k, &q_r))
        .collect();
    let lp = build(&down);
    let sol = solve_lp(&lp)?;
    verified(&lp, sol.x, Some(q_r))
}

/// Amplification gains and user covariances of the AF relays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfConfig {
    /// `a_n`, one per relay.
    pub scaling: Vec<f64>,
    pub covariances: Vec<Matrix>,
}

impl AfConfig {
    /// Largest gains meeting every relay power constraint with equality.
    pub fn max_gain(inst: &ChannelInstance, op: &OperatingPoint, mode: UserCovariance) -> Self {
        let covariances = user_covariances(inst, op, mode);
        let scaling = (0..inst.relays())
            .map(|n| {
                let rx: f64 = (0..inst.users()).map(|k| row_power(inst, &covariances[k], k, n)).sum();
                (op.relay_powers[n] / (rx + op.sigma2_relay)).sqrt()
            })
            .collect();
        Self { scaling, covariances }
    }

    /// `a_n²·(Σ_k h_{k,n} Q_k h_{k,n}ᵀ + σ_R²) ≤ P_{R,n}` for every relay.
    pub fn check(&self, inst: &ChannelInstance, op: &OperatingPoint) -> Result<()> {
        for (n, &a) in self.scaling.iter().enumerate() {
            let rx: f64 = (0..inst.users()).map(|k| row_power(inst, &self.covariances[k], k, n)).sum();
            let used = a * a * (rx + op.sigma2_relay);
            if used > op.relay_powers[n] * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::TraceBudgetExceeded {
                    trace: used,
                    budget: op.relay_powers[n],
                });
            }
        }
        for (q, &p) in self.covariances.iter().zip(&op.user_powers) {
            check_covariance(q, p)?;
        }
        Ok(())
    }
}

/// Amplify-and-forward with the time split fixed at one half.
pub fn af_sumrate(inst: &ChannelInstance, op: &OperatingPoint) -> Result<RateSolution> {
    let cfg = AfConfig::max_gain(inst, op, UserCovariance::Equal);
    af_sumrate_with(inst, op, &cfg)
}

/// Log-det ratio cap of the AF multiple-access region seen by `receiver`
/// for the senders in `subset`, in bits per real channel use.
pub fn af_cap(inst: &ChannelInstance, op: &OperatingPoint, cfg: &AfConfig, receiver: usize, subset: &[usize]) -> Result<f64> {
    let a = Matrix::diag(&cfg.scaling);
    let ga = &inst.downlink[receiver] * &a;
    let m = inst.antennas;
    let noise = &ga.gram_rows().scale(op.sigma2_relay) + &Matrix::identity(m).scale(op.sigma2_user[receiver]);
    let mut total = noise.clone();
    for &k in subset {
        let eff = &ga * &inst.uplink[k];
        total = &total + &eff.congruence(&cfg.covariances[k]);
    }
    let num = logdet_psd(&total)?.value;
    let den = logdet_psd(&noise)?.value;
    Ok((num - den).max(0.0))
}

pub fn af_sumrate_with(inst: &ChannelInstance, op: &OperatingPoint, cfg: &AfConfig) -> Result<RateSolution> {
    op.check_against(inst)?;
    cfg.check(inst, op)?;
    let users = inst.users();
    // Two hops, each half of the round.
    let factor = 0.25;
    let mut lp = LpProblem::sum_rate(users);
    for k in 0..users {
        for s in user_subsets(users, Some(k)) {
            let cap = factor * af_cap(inst, op, cfg, k, &s)?;
            lp.push(s.iter().map(|&j| (j, 1.0)).collect(), cap, format!("af[{k}]{s:?}"));
        }
    }
    let sol = solve_lp(&lp)?;
    verified(&lp, sol.x, None)
}
