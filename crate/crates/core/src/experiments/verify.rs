use serde::{Deserialize, Serialize};

use crate::channel::{PowerSpec, ScenarioConfig};
use crate::error::Result;
use crate::rates::asymptotic_gap_bound;

use super::stats::{paired_differences, MeanEstimate};
use super::{run_points, Scheme, SweepOptions, SweepResult};

/// Slack allowed in the per-record ordering check.
const ORDER_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub std_error: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let se = c.std_error.map(|s| format!(" se={s:.4}")).unwrap_or_default();
                format!(
                    "{} {}: measured={:.6} threshold={:.6}{se} ({})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.threshold,
                    c.detail
                )
            })
            .collect()
    }
}

/// Sizes of the verification runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyPlan {
    pub seeds: Vec<u64>,
    /// SNR grid of the ordering check.
    pub ordering_snrs: Vec<f64>,
    /// Monte Carlo draws for the Fisher-Z terms of the gap bound.
    pub mc_samples: usize,
}

impl VerifyPlan {
    /// Seeds and SNR grid of `cfg`, falling back to 200 seeds and 0..40 dB.
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            seeds: if cfg.seeds.is_empty() {
                (0..200).collect()
            } else {
                cfg.seeds.clone()
            },
            ordering_snrs: if cfg.snr_grid_db.is_empty() {
                vec![0.0, 10.0, 20.0, 30.0, 40.0]
            } else {
                cfg.snr_grid_db.clone()
            },
            mc_samples: 1_000_000,
        }
    }
}

/// Mean of `upper - lower` over paired seeds.
pub fn paired_gap(res: &SweepResult, upper: Scheme, lower: Scheme, snr: f64, alpha: f64) -> Option<MeanEstimate> {
    let (u, l) = (res.values(upper, snr, alpha), res.values(lower, snr, alpha));
    MeanEstimate::from_samples(&paired_differences(&u, &l))
}

/// Per-seed change of the paired gap between two SNRs.
pub fn gap_change(res: &SweepResult, upper: Scheme, lower: Scheme, from: f64, to: f64, alpha: f64) -> Option<MeanEstimate> {
    let gap = |snr| {
        let d = paired_differences(&res.values(upper, snr, alpha), &res.values(lower, snr, alpha));
        let seeds = res.values(upper, snr, alpha).into_iter().map(|(s, _)| s);
        seeds.zip(d).collect::<Vec<(u64, f64)>>()
    };
    MeanEstimate::from_samples(&paired_differences(&gap(to), &gap(from)))
}

fn reference(k: usize, m: usize, n: usize, alpha: f64, plan: &VerifyPlan) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::symmetric(k, m, n, alpha);
    cfg.seeds = plan.seeds.clone();
    cfg
}

fn check(name: &str, passed: bool, measured: f64, threshold: f64, se: Option<f64>, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        measured,
        threshold,
        std_error: se,
        detail,
    }
}

fn missing(name: &str) -> CheckResult {
    check(name, false, f64::NAN, f64::NAN, None, "no successful records".into())
}

fn ordering_check(cfg: &ScenarioConfig, plan: &VerifyPlan) -> Result<CheckResult> {
    let mut cfg = cfg.clone();
    cfg.seeds = plan.seeds.clone();
    let res = run_points(
        &cfg,
        &[Scheme::Dist, Scheme::Coop, Scheme::Cutset],
        &[cfg.alpha],
        &plan.ordering_snrs,
        &SweepOptions::default(),
    )?;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for &snr in &plan.ordering_snrs {
        let d = res.values(Scheme::Dist, snr, cfg.alpha);
        let c = res.values(Scheme::Coop, snr, cfg.alpha);
        let b = res.values(Scheme::Cutset, snr, cfg.alpha);
        for ((d, c), b) in d.iter().zip(&c).zip(&b) {
            let excess = (d.1 - c.1).max(c.1 - b.1).max(-d.1);
            worst = worst.max(excess);
            if excess > ORDER_SLACK {
                violations += 1;
            }
        }
    }
    let failed = res.failures();
    Ok(check(
        "bound-ordering",
        violations == 0 && failed == 0,
        worst,
        ORDER_SLACK,
        None,
        format!("{} records, {violations} violations, {failed} solver failures", res.records.len()),
    ))
}

fn k2_optimality(plan: &VerifyPlan) -> Result<CheckResult> {
    let name = "two-user-asymptotic-optimality";
    let cfg = reference(2, 4, 4, 0.7, plan);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Cutset], &[0.7], &[30.0, 50.0], &SweepOptions::default())?;
    let (Some(g30), Some(g50)) = (
        paired_gap(&res, Scheme::Cutset, Scheme::Dist, 30.0, 0.7),
        paired_gap(&res, Scheme::Cutset, Scheme::Dist, 50.0, 0.7),
    ) else {
        return Ok(missing(name));
    };
    let threshold = (0.5 * g30.mean).min(0.3);
    Ok(check(
        name,
        g50.mean < threshold,
        g50.mean,
        threshold,
        Some(g50.std_error),
        format!("cutset-dist gap {:.4} at 30 dB, {:.4} at 50 dB", g30.mean, g50.mean),
    ))
}

fn coop_matches_dist(plan: &VerifyPlan, alpha: f64) -> Result<CheckResult> {
    let name = format!("coop-dist-gap-vanishes-alpha-{alpha}");
    let snrs = [30.0, 40.0, 50.0];
    let cfg = reference(3, 4, 4, alpha, plan);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Coop], &[alpha], &snrs, &SweepOptions::default())?;
    let Some(g50) = paired_gap(&res, Scheme::Coop, Scheme::Dist, 50.0, alpha) else {
        return Ok(missing(&name));
    };
    let mut monotone = true;
    let mut trend = Vec::new();
    for w in snrs.windows(2) {
        match gap_change(&res, Scheme::Coop, Scheme::Dist, w[0], w[1], alpha) {
            Some(ch) => {
                monotone &= ch.mean <= 2.0 * ch.std_error;
                trend.push(format!("{:+.4}±{:.4}", ch.mean, ch.std_error));
            }
            None => monotone = false,
        }
    }
    Ok(check(
        &name,
        g50.mean < 0.2 && monotone,
        g50.mean,
        0.2,
        Some(g50.std_error),
        format!("gap changes over 30->40->50 dB: {}", trend.join(", ")),
    ))
}

fn residual_gap(plan: &VerifyPlan) -> Result<CheckResult> {
    let name = "residual-gap-at-half";
    let cfg = reference(3, 4, 4, 0.5, plan);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Coop], &[0.5], &[40.0], &SweepOptions::default())?;
    let Some(g) = paired_gap(&res, Scheme::Coop, Scheme::Dist, 40.0, 0.5) else {
        return Ok(missing(name));
    };
    Ok(check(
        name,
        (0.02..=0.3).contains(&g.mean),
        g.mean,
        0.3,
        Some(g.std_error),
        "coop-dist at 40 dB must lie in [0.02, 0.3]".into(),
    ))
}

/// SNR shift, in dB, that the distributed curve needs to reach the cut-set
/// value at `at_db`, from linear interpolation over a 0.5 dB grid.
pub fn horizontal_shift(res: &SweepResult, at_db: f64, grid: &[f64], alpha: f64) -> Option<f64> {
    let target = res.mean(Scheme::Cutset, at_db, alpha)?.mean;
    let curve: Vec<(f64, f64)> = grid
        .iter()
        .filter_map(|&s| res.mean(Scheme::Dist, s, alpha).map(|m| (s, m.mean)))
        .collect();
    if let Some(first) = curve.first() {
        if first.1 >= target {
            return Some(first.0 - at_db);
        }
    }
    curve.windows(2).find_map(|w| {
        let ((s0, v0), (s1, v1)) = (w[0], w[1]);
        (v0 < target && v1 >= target).then(|| s0 + (target - v0) / (v1 - v0) * (s1 - s0) - at_db)
    })
}

/// Grid used for the horizontal-shift measurement.
pub fn shift_grid(at_db: f64) -> Vec<f64> {
    (0..=8).map(|i| at_db + 0.5 * i as f64).collect()
}

fn figure_reproduction(plan: &VerifyPlan) -> Result<Vec<CheckResult>> {
    let mut cfg = reference(3, 4, 4, 0.5, plan);
    cfg.relay_power = PowerSpec::Uniform(0.25);
    let baseline_snrs = [10.0, 20.0, 30.0, 40.0];
    let mut snrs = shift_grid(30.0);
    snrs.extend(baseline_snrs);
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let res = run_points(
        &cfg,
        &[Scheme::Dist, Scheme::Cutset, Scheme::Df, Scheme::Af],
        &[0.5],
        &snrs,
        &SweepOptions::default(),
    )?;
    let mut out = Vec::new();
    let shift = horizontal_shift(&res, 30.0, &shift_grid(30.0), 0.5);
    out.push(match shift {
        Some(s) => check(
            "dist-within-shift-of-cutset",
            s <= 1.5,
            s,
            1.5,
            None,
            "dB needed by dist to reach the 30 dB cut-set mean (relaxed cut-set)".into(),
        ),
        None => check("dist-within-shift-of-cutset", false, f64::INFINITY, 1.5, None, "beyond 4 dB".into()),
    });
    let mut worst = f64::INFINITY;
    let mut notes = Vec::new();
    for &snr in &baseline_snrs {
        let d = res.mean(Scheme::Dist, snr, 0.5).map(|m| m.mean).unwrap_or(f64::NAN);
        let df = res.mean(Scheme::Df, snr, 0.5).map(|m| m.mean).unwrap_or(f64::NAN);
        let af = res.mean(Scheme::Af, snr, 0.5).map(|m| m.mean).unwrap_or(f64::NAN);
        let margin = (d - df).min(d - af);
        worst = if margin.is_nan() { f64::NAN } else { worst.min(margin) };
        notes.push(format!("{snr} dB: dist {d:.3} df {df:.3} af {af:.3}"));
    }
    out.push(check("dist-beats-df-and-af", worst > 0.0, worst, 0.0, None, notes.join("; ")));
    Ok(out)
}

fn gap_bound(plan: &VerifyPlan) -> Result<Vec<CheckResult>> {
    let cfg = reference(3, 4, 4, 0.3, plan);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Cutset], &[0.3], &[60.0], &SweepOptions::default())?;
    let bound = asymptotic_gap_bound(3, 4, 4, 0.3, plan.mc_samples, 0x5eed)?;
    let mut out = Vec::new();
    out.push(match paired_gap(&res, Scheme::Cutset, Scheme::Dist, 60.0, 0.3) {
        Some(g) => {
            let se = g.std_error.hypot(bound.std_error);
            let threshold = bound.delta + 2.0 * se;
            check(
                "gap-within-asymptotic-bound",
                g.mean <= threshold,
                g.mean,
                threshold,
                Some(se),
                format!("bound {:.4}", bound.delta),
            )
        }
        None => missing("gap-within-asymptotic-bound"),
    });
    let above = asymptotic_gap_bound(3, 4, 4, 0.7, plan.mc_samples, 0x5eed)?;
    out.push(check(
        "gap-bound-zero-above-half",
        above.delta == 0.0,
        above.delta,
        0.0,
        None,
        "alpha = 0.7".into(),
    ));
    Ok(out)
}

/// Runs the ordering check on `cfg` and the fixed-scenario theorem checks
/// with the seeds of `cfg`. Solver errors become failed entries.
pub fn verify_theorems(cfg: &ScenarioConfig) -> VerificationReport {
    verify_with(cfg, &VerifyPlan::from_config(cfg))
}

pub fn verify_with(cfg: &ScenarioConfig, plan: &VerifyPlan) -> VerificationReport {
    let mut checks = Vec::new();
    let mut collect = |name: &str, r: Result<Vec<CheckResult>>| match r {
        Ok(v) => checks.extend(v),
        Err(e) => checks.push(check(name, false, f64::NAN, f64::NAN, None, e.to_string())),
    };
    collect("bound-ordering", ordering_check(cfg, plan).map(|c| vec![c]));
    collect("two-user-asymptotic-optimality", k2_optimality(plan).map(|c| vec![c]));
    for alpha in [0.3, 0.7] {
        collect("coop-dist-gap-vanishes", coop_matches_dist(plan, alpha).map(|c| vec![c]));
    }
    collect("residual-gap-at-half", residual_gap(plan).map(|c| vec![c]));
    collect("figure-reproduction", figure_reproduction(plan));
    collect("gap-bound", gap_bound(plan));
    VerificationReport { checks }
}
