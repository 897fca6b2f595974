//! Monte Carlo sweeps over channel draws, CSV output and the verification
//! report.

mod stats;
mod verify;

pub use stats::{paired_differences, MeanEstimate};
pub use verify::{
    gap_change, horizontal_shift, paired_gap, shift_grid, verify_theorems, verify_with, CheckResult,
    VerificationReport, VerifyPlan,
};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{af_sumrate, df_sumrate_with, BaselineOptions};
use crate::channel::{sample_instance, ChannelInstance, OperatingPoint, ScenarioConfig};
use crate::error::{Error, Result};
use crate::lattice::{simulate_exchange, Codeword, NestedLatticeChain, NoiseMode};
use crate::linalg::seeded_rng;
use crate::optim::{cutset_bound, maximize_sumrate_coop, maximize_sumrate_dist, RateSolution};

/// CSV header of every sweep file.
pub const CSV_HEADER: &str = "scheme,snr_db,alpha,seed,sum_rate_bits,relaxed_bound,status";

/// Time split used by the amplify-and-forward baseline.
pub const AF_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Dist,
    Coop,
    Cutset,
    Df,
    Af,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Dist, Scheme::Coop, Scheme::Cutset, Scheme::Df, Scheme::Af];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Dist => "dist",
            Scheme::Coop => "coop",
            Scheme::Cutset => "cutset",
            Scheme::Df => "df",
            Scheme::Af => "af",
        }
    }

    /// Parses a comma-separated list such as `dist,coop,cutset`.
    pub fn parse_list(text: &str) -> Result<Vec<Scheme>> {
        let mut out: Vec<Scheme> = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let s = part.parse()?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Refine the relay covariance of the cooperative scheme and of DF.
    pub refine_qr: bool,
}

/// Solver details kept alongside each record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub deactivated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub alpha: f64,
    pub seed: u64,
    /// `None` when the solver failed.
    pub sum_rate_bits: Option<f64>,
    pub relaxed_bound: bool,
    /// `ok` or `failed: <reason>`.
    pub status: String,
    pub metadata: SolverMetadata,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    /// Writes the records as CSV with [`CSV_HEADER`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidConfig(format!("csv output: {e}"));
        w.write_record(CSV_HEADER.split(',')).map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.scheme.id().to_string(),
                r.snr_db.to_string(),
                r.alpha.to_string(),
                r.seed.to_string(),
                r.sum_rate_bits.map(|v| v.to_string()).unwrap_or_default(),
                r.relaxed_bound.to_string(),
                r.status.clone(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidConfig(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Successful sum-rates for one cell, ordered by seed.
    pub fn values(&self, scheme: Scheme, snr_db: f64, alpha: f64) -> Vec<(u64, f64)> {
        self.records
            .iter()
            .filter(|r| r.scheme == scheme && r.snr_db == snr_db && r.alpha == alpha)
            .filter_map(|r| r.sum_rate_bits.map(|v| (r.seed, v)))
            .collect()
    }

    pub fn mean(&self, scheme: Scheme, snr_db: f64, alpha: f64) -> Option<MeanEstimate> {
        let v: Vec<f64> = self.values(scheme, snr_db, alpha).into_iter().map(|(_, v)| v).collect();
        MeanEstimate::from_samples(&v)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.sum_rate_bits.is_none()).count()
    }
}

/// Runs one scheme on one instance.
pub fn solve_scheme(
    scheme: Scheme,
    inst: &ChannelInstance,
    op: &OperatingPoint,
    opts: &SweepOptions,
) -> Result<RateSolution> {
    match scheme {
        Scheme::Dist => maximize_sumrate_dist(inst, op),
        Scheme::Coop => maximize_sumrate_coop(inst, op, opts.refine_qr),
        Scheme::Cutset => cutset_bound(inst, op),
        Scheme::Df => df_sumrate_with(
            inst,
            op,
            &BaselineOptions {
                refine_qr: opts.refine_qr,
                ..Default::default()
            },
        ),
        Scheme::Af => af_sumrate(inst, &op.with_alpha(AF_ALPHA)),
    }
}

fn record(scheme: Scheme, snr_db: f64, alpha: f64, seed: u64, outcome: Result<RateSolution>) -> SweepRecord {
    match outcome {
        Ok(sol) => SweepRecord {
            scheme,
            snr_db,
            alpha,
            seed,
            sum_rate_bits: Some(sol.sum_rate.max(0.0)),
            relaxed_bound: sol.relaxed_bound,
            status: "ok".into(),
            metadata: SolverMetadata {
                iterations: sol.iterations,
                inner_iterations: sol.inner_iterations,
                converged: sol.converged,
                deactivated: sol.deactivated.len(),
            },
        },
        Err(e) => SweepRecord {
            scheme,
            snr_db,
            alpha,
            seed,
            sum_rate_bits: None,
            relaxed_bound: scheme == Scheme::Cutset,
            status: format!("failed: {e}"),
            metadata: SolverMetadata::default(),
        },
    }
}

fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.seed.cmp(&b.seed))
    });
}

/// Every scheme at every `(seed, snr)` of the config, at the config's `α`.
///
/// The channel of a record depends only on its seed, so records at
/// different SNRs and for different schemes share channel draws.
pub fn run_sweep(cfg: &ScenarioConfig, schemes: &[Scheme]) -> Result<SweepResult> {
    run_sweep_with(cfg, schemes, &SweepOptions::default())
}

pub fn run_sweep_with(cfg: &ScenarioConfig, schemes: &[Scheme], opts: &SweepOptions) -> Result<SweepResult> {
    cfg.validate()?;
    run_points(cfg, schemes, &[cfg.alpha], &cfg.snr_grid_db, opts)
}

/// Every scheme at every `(seed, snr, α)`. The AF baseline runs once per
/// `(seed, snr)` at its fixed split.
pub fn run_points(
    cfg: &ScenarioConfig,
    schemes: &[Scheme],
    alphas: &[f64],
    snrs: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if schemes.is_empty() {
        return Ok(SweepResult::default());
    }
    let mut records: Vec<SweepRecord> = cfg
        .seeds
        .par_iter()
        .flat_map_iter(|&seed| {
            let inst = sample_instance(cfg, seed);
            let mut out = Vec::new();
            for &snr in snrs {
                for &alpha in alphas {
                    for &scheme in schemes {
                        let used_alpha = if scheme == Scheme::Af { AF_ALPHA } else { alpha };
                        if scheme == Scheme::Af && alphas.len() > 1 && alpha != alphas[0] {
                            continue;
                        }
                        let outcome = match &inst {
                            Ok(inst) => cfg
                                .operating_point(snr, used_alpha)
                                .and_then(|op| solve_scheme(scheme, inst, &op, opts)),
                            Err(e) => Err(e.clone()),
                        };
                        out.push(record(scheme, snr, used_alpha, seed, outcome));
                    }
                }
            }
            out
        })
        .collect();
    sort_records(&mut records);
    Ok(SweepResult { records })
}

/// Result of a sweep over the time split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub result: SweepResult,
    /// `(snr_db, scheme, α)` maximizing the mean sum-rate.
    pub argmax: Vec<(f64, Scheme, f64)>,
    /// `(snr_db, α, mean(coop - dist))` over paired seeds.
    pub gap_profile: Vec<(f64, f64, MeanEstimate)>,
}

/// Cooperative and distributed sum-rates for every `α` and SNR.
pub fn run_alpha_sweep(cfg: &ScenarioConfig, alphas: &[f64], snr_list: &[f64]) -> Result<AlphaSweep> {
    cfg.validate()?;
    if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::InvalidConfig("every alpha must lie in (0,1)".into()));
    }
    let schemes = [Scheme::Dist, Scheme::Coop];
    let result = run_points(cfg, &schemes, alphas, snr_list, &SweepOptions::default())?;
    let mut argmax = Vec::new();
    let mut gap_profile = Vec::new();
    for &snr in snr_list {
        for scheme in schemes {
            let best = alphas
                .iter()
                .filter_map(|&a| result.mean(scheme, snr, a).map(|m| (a, m.mean)))
                .max_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((a, _)) = best {
                argmax.push((snr, scheme, a));
            }
        }
        for &a in alphas {
            let diffs = paired_differences(&result.values(Scheme::Coop, snr, a), &result.values(Scheme::Dist, snr, a));
            if let Some(m) = MeanEstimate::from_samples(&diffs) {
                gap_profile.push((snr, a, m));
            }
        }
    }
    Ok(AlphaSweep {
        result,
        argmax,
        gap_profile,
    })
}

/// Outcome of [`lattice_demo`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDemoSummary {
    pub runs: usize,
    /// Runs in which every user recovered every message.
    pub successful_runs: usize,
    /// Failed `(receiver, sender)` pairs summed over runs.
    pub failed_pairs: usize,
    pub relay_errors: usize,
}

/// Noiseless exchanges with random channels and messages, one per seed.
/// The number of relays equals the number of chains, and every user has
/// that many antennas.
pub fn lattice_demo(chains: &[NestedLatticeChain], seeds: &[u64], noise: NoiseMode) -> Result<LatticeDemoSummary> {
    let first = chains
        .first()
        .ok_or_else(|| Error::InvalidConfig("no chains given".into()))?;
    let n = chains.len();
    let cfg = ScenarioConfig::symmetric(first.users(), n, n, 0.5);
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let inst = sample_instance(&cfg, seed)?;
            let mut rng = seeded_rng(seed ^ 0x6c61_7474);
            let messages: Vec<Vec<Codeword>> = (0..first.users())
                .map(|k| chains.iter().map(|c| c.random_codeword(k, &mut rng)).collect())
                .collect();
            simulate_exchange(&inst, chains, &messages, noise, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LatticeDemoSummary {
        runs: reports.len(),
        successful_runs: reports.iter().filter(|r| r.all_success()).count(),
        failed_pairs: reports.iter().map(|r| r.failures()).sum(),
        relay_errors: reports.iter().map(|r| r.relay_errors).sum(),
    })
}
