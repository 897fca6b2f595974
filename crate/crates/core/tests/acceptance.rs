//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.
//!
//! Pass a substring as the first argument to run a subset.

use std::time::Instant;

use mdrc_core::experiments::{gap_change, horizontal_shift, paired_gap, run_points, shift_grid, Scheme, SweepOptions};
use mdrc_core::lattice::{
    mod_lattice, quantize, relay_combine, relay_decode_noisy, simulate_exchange, Codeword, NestedLatticeChain,
    NoiseMode,
};
use mdrc_core::linalg::{gaussian_matrix, logdet_identity_plus, rq_decompose, seeded_rng, waterfill, waterfill_objective, Matrix, Rng};
use mdrc_core::optim::{cutset_bound, mac_iwf, maximize_sumrate_coop, maximize_sumrate_dist, solve_lp, LpProblem};
use mdrc_core::rates::{asymptotic_gap_bound, asymptotic_gap_bound_exact};
use mdrc_core::{sample_instance, PowerSpec, ScenarioConfig};
use rand::Rng as _;

mod common;
use common::vertex_enumeration;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

const SEEDS: u64 = 200;

fn reference(k: usize, mn: usize, alpha: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::symmetric(k, mn, mn, alpha);
    cfg.seeds = (0..SEEDS).collect();
    cfg
}

// ---------------------------------------------------------------- sum-rates

fn bound_ordering() -> Outcome {
    const SLACK: f64 = 1e-6;
    let alphas = [0.3, 0.5, 0.7];
    let mut instances = 0;
    let mut violations = Vec::new();
    let mut errors = 0;
    for k in [2, 3] {
        for mn in [2, 4] {
            let cfg = ScenarioConfig::symmetric(k, mn, mn, 0.5);
            for seed in 0..50u64 {
                let inst = sample_instance(&cfg, 1000 + seed).expect("full-rank draw");
                let alpha = alphas[seed as usize % alphas.len()];
                for snr in [0.0, 10.0, 20.0, 30.0, 40.0] {
                    instances += 1;
                    let op = cfg.operating_point(snr, alpha).unwrap();
                    let solved = (|| {
                        Ok::<_, mdrc_core::Error>((
                            maximize_sumrate_dist(&inst, &op)?.sum_rate,
                            maximize_sumrate_coop(&inst, &op, false)?.sum_rate,
                            cutset_bound(&inst, &op)?.sum_rate,
                        ))
                    })();
                    match solved {
                        Ok((d, c, b)) => {
                            if d < -SLACK || c < d - SLACK || b < c - SLACK {
                                violations.push(format!("K={k} N={mn} seed={seed} snr={snr}: {d} {c} {b}"));
                            }
                        }
                        Err(_) => errors += 1,
                    }
                }
            }
        }
    }
    outcome(
        instances >= 1000 && violations.is_empty() && errors == 0,
        format!(
            "{instances} instances, {} violations, {errors} solver errors{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

fn two_user_optimality() -> Outcome {
    let cfg = reference(2, 4, 0.7);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Cutset], &[0.7], &[30.0, 50.0], &SweepOptions::default()).unwrap();
    let g30 = paired_gap(&res, Scheme::Cutset, Scheme::Dist, 30.0, 0.7).unwrap();
    let g50 = paired_gap(&res, Scheme::Cutset, Scheme::Dist, 50.0, 0.7).unwrap();
    outcome(
        res.failures() == 0 && g50.mean < 0.5 * g30.mean && g50.mean < 0.3,
        format!(
            "cutset-dist {:.4} (se {:.4}) at 30 dB, {:.4} (se {:.4}) at 50 dB; need < half and < 0.3",
            g30.mean, g30.std_error, g50.mean, g50.std_error
        ),
    )
}

fn coop_dist_gap_vanishes() -> Outcome {
    let snrs = [30.0, 40.0, 50.0];
    let mut passed = true;
    let mut notes = Vec::new();
    for alpha in [0.3, 0.7] {
        let cfg = reference(3, 4, alpha);
        let res = run_points(&cfg, &[Scheme::Dist, Scheme::Coop], &[alpha], &snrs, &SweepOptions::default()).unwrap();
        passed &= res.failures() == 0;
        let g50 = paired_gap(&res, Scheme::Coop, Scheme::Dist, 50.0, alpha).unwrap();
        passed &= g50.mean < 0.2;
        let mut steps = Vec::new();
        for w in snrs.windows(2) {
            let ch = gap_change(&res, Scheme::Coop, Scheme::Dist, w[0], w[1], alpha).unwrap();
            passed &= ch.mean <= 2.0 * ch.std_error;
            steps.push(format!("{:+.4}±{:.4}", ch.mean, ch.std_error));
        }
        notes.push(format!("alpha {alpha}: gap {:.4} at 50 dB, changes {}", g50.mean, steps.join(" ")));
    }
    outcome(passed, notes.join("; "))
}

fn residual_gap_at_half() -> Outcome {
    let cfg = reference(3, 4, 0.5);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Coop], &[0.5], &[40.0], &SweepOptions::default()).unwrap();
    let g = paired_gap(&res, Scheme::Coop, Scheme::Dist, 40.0, 0.5).unwrap();
    outcome(
        res.failures() == 0 && (0.02..=0.3).contains(&g.mean),
        format!("coop-dist {:.4} (se {:.4}) at 40 dB; need [0.02, 0.3]", g.mean, g.std_error),
    )
}

fn figure_reproduction() -> Outcome {
    let mut cfg = reference(3, 4, 0.5);
    cfg.relay_power = PowerSpec::Uniform(1.0 / 4.0);
    let baseline_snrs = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
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
    )
    .unwrap();
    let shift = horizontal_shift(&res, 30.0, &shift_grid(30.0), 0.5);
    let mut passed = res.failures() == 0 && shift.is_some_and(|s| s <= 1.5);
    let flagged = res
        .records
        .iter()
        .filter(|r| r.scheme == Scheme::Cutset)
        .all(|r| r.relaxed_bound);
    passed &= flagged;
    let mut worst = f64::INFINITY;
    for snr in baseline_snrs {
        let d = res.mean(Scheme::Dist, snr, 0.5).unwrap().mean;
        let df = res.mean(Scheme::Df, snr, 0.5).unwrap().mean;
        let af = res.mean(Scheme::Af, snr, 0.5).unwrap().mean;
        worst = worst.min(d - df).min(d - af);
    }
    passed &= worst > 0.0;
    outcome(
        passed,
        format!(
            "dist needs {} dB to reach the 30 dB cut-set mean (limit 1.5); smallest mean margin over DF/AF {:.3} bits; relaxed flag {}",
            shift.map_or("> 4".to_string(), |s| format!("{s:.3}")),
            worst,
            flagged
        ),
    )
}

fn asymptotic_gap() -> Outcome {
    let cfg = reference(3, 4, 0.3);
    let res = run_points(&cfg, &[Scheme::Dist, Scheme::Cutset], &[0.3], &[60.0], &SweepOptions::default()).unwrap();
    let g = paired_gap(&res, Scheme::Cutset, Scheme::Dist, 60.0, 0.3).unwrap();
    let bound = asymptotic_gap_bound(3, 4, 4, 0.3, 1_000_000, 7).unwrap();
    let exact = asymptotic_gap_bound_exact(3, 4, 4, 0.3).unwrap();
    let se = g.std_error.hypot(bound.std_error);
    let above = asymptotic_gap_bound(3, 4, 4, 0.7, 1_000, 7).unwrap();
    outcome(
        res.failures() == 0 && g.mean <= bound.delta + 2.0 * se && above.delta == 0.0,
        format!(
            "gap {:.4} at 60 dB vs bound {:.4} + 2×{:.4} (closed form {:.4}); bound at alpha 0.7 = {}",
            g.mean, bound.delta, se, exact.delta, above.delta
        ),
    )
}

// ---------------------------------------------------------------- lattice

fn codebook(chain: &NestedLatticeChain, user: usize) -> Vec<Codeword> {
    (0..chain.codebook_size(user)).map(|i| chain.codeword(user, i)).collect()
}

/// Calls `f` with every index tuple of the given radices.
fn for_each_tuple(radices: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0; radices.len()];
    loop {
        f(&idx);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < radices[pos] {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Runs the exchange for every message tuple on the first `exhaustive`
/// sub-channels; the rest get random codewords. Returns (runs, failures).
fn exhaustive_exchange(chain: &NestedLatticeChain, subchannels: usize, exhaustive: usize) -> (usize, usize) {
    let users = chain.users();
    let cfg = ScenarioConfig::symmetric(users, subchannels, subchannels, 0.5);
    let instances: Vec<_> = (0..8).map(|s| sample_instance(&cfg, 500 + s).unwrap()).collect();
    let books: Vec<Vec<Codeword>> = (0..users).map(|k| codebook(chain, k)).collect();
    let chains = vec![chain.clone(); subchannels];
    let radices: Vec<usize> = (0..exhaustive).flat_map(|_| books.iter().map(Vec::len)).collect();
    let mut rng = seeded_rng(99);
    let (mut runs, mut failures) = (0, 0);
    for_each_tuple(&radices, |idx| {
        let messages: Vec<Vec<Codeword>> = (0..users)
            .map(|k| {
                (0..subchannels)
                    .map(|n| {
                        if n < exhaustive {
                            books[k][idx[n * users + k]].clone()
                        } else {
                            chain.random_codeword(k, &mut rng)
                        }
                    })
                    .collect()
            })
            .collect();
        let inst = &instances[runs % instances.len()];
        let report = simulate_exchange(inst, &chains, &messages, NoiseMode::Off, runs as u64).unwrap();
        failures += report.failures();
        runs += 1;
    });
    (runs, failures)
}

fn lattice_exchange() -> Outcome {
    let specs: [(&[u64], f64); 3] = [(&[8, 4, 2], 1.0), (&[4, 4, 2], 0.5), (&[9, 3, 3], 0.25)];
    let mut passed = true;
    let mut notes = Vec::new();
    for (levels, g) in specs {
        let mut row = Vec::new();
        // (dim, relays, exhaustive sub-channels)
        for (dim, relays, exhaustive) in [(1, 2, 2), (2, 1, 1), (2, 2, 1)] {
            let chain = NestedLatticeChain::from_levels(dim, g, levels).unwrap();
            let expected: u128 = (0..3).map(|k| chain.codebook_size(k)).product::<u128>().pow(exhaustive as u32);
            let (runs, failures) = exhaustive_exchange(&chain, relays, exhaustive);
            passed &= failures == 0 && runs as u128 == expected;
            row.push(format!("dim {dim} N {relays}: {runs} tuples, {failures} failed pairs"));
        }
        notes.push(format!("{levels:?}: {}", row.join(", ")));
    }
    outcome(passed, notes.join("; "))
}

// ---------------------------------------------------------------- algebra

const TRIALS: usize = 100_000;

/// Largest coordinate of `(a - b) mod q` in absolute value.
fn mod_distance(a: &[f64], b: &[f64], q: f64) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mod_lattice(&d, q).iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn uniform_vec(rng: &mut Rng, dim: usize, half: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-half..half)).collect()
}

fn random_chain(rng: &mut Rng) -> NestedLatticeChain {
    let fine = rng.random_range(1..=3u64);
    let mid = fine * rng.random_range(1..=3u64);
    let coarse = mid * rng.random_range(1..=3u64);
    let g = [1.0, 0.5, 0.25, 2.0][rng.random_range(0..4)];
    NestedLatticeChain::from_levels(rng.random_range(1..=3), g, &[coarse, mid, fine]).unwrap()
}

fn algebraic_properties() -> Outcome {
    let mut rng = seeded_rng(2024);
    let mut worst = [0.0f64; 4];

    // Mod-distributivity, plain and across nested lattices.
    for _ in 0..TRIALS {
        let dim = rng.random_range(1..=4);
        let q_fine = rng.random_range(0.1..10.0);
        let q_coarse = q_fine * rng.random_range(1..=5) as f64;
        let x = uniform_vec(&mut rng, dim, 100.0);
        let y = uniform_vec(&mut rng, dim, 100.0);
        let lhs: Vec<f64> = mod_lattice(&x, q_coarse).iter().zip(&y).map(|(a, b)| a + b).collect();
        let rhs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let e1 = mod_distance(&mod_lattice(&lhs, q_coarse), &mod_lattice(&rhs, q_coarse), q_coarse);
        let e2 = mod_distance(&mod_lattice(&mod_lattice(&x, q_coarse), q_fine), &mod_lattice(&x, q_fine), q_fine);
        worst[0] = worst[0].max(e1).max(e2);
    }

    // Quantizer identity: Q(x) + (x mod Λ) = x, Q(x) ∈ Λ, Q(x + λ) = Q(x) + λ.
    for _ in 0..TRIALS {
        let dim = rng.random_range(1..=4);
        let q = rng.random_range(0.1..10.0);
        let x = uniform_vec(&mut rng, dim, 100.0);
        let qx = quantize(&x, q);
        let m = mod_lattice(&x, q);
        let shift: Vec<f64> = (0..dim).map(|_| q * rng.random_range(-20..=20) as f64).collect();
        let moved: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let qm = quantize(&moved, q);
        for i in 0..dim {
            let recon = (qx[i] + m[i] - x[i]).abs();
            let on_lattice = (qx[i] / q - (qx[i] / q).round()).abs();
            let covariance = (qm[i] - qx[i] - shift[i]).abs();
            let in_cell = if m[i] >= -q / 2.0 && m[i] < q / 2.0 { 0.0 } else { 1.0 };
            // The shifted point can land on the other side of a cell edge
            // only through rounding; accept exactly one lattice step there.
            let covariance = if (covariance - q).abs() < 1e-9 { 0.0 } else { covariance };
            worst[1] = worst[1].max(recon).max(on_lattice).max(covariance).max(in_cell);
        }
    }

    // Dirty-paper cancellation at the relay.
    for _ in 0..TRIALS {
        let chain = random_chain(&mut rng);
        let dim = chain.dim();
        let l = rng.random_range(0..2);
        let (ql, qn) = (chain.coarse_scale(l), chain.coarse_scale(l + 1));
        let c_l = chain.random_codeword(l, &mut rng);
        let c_n = chain.random_codeword(l + 1, &mut rng);
        let d_l = chain.random_dither(l, &mut rng);
        let d_n = chain.random_dither(l + 1, &mut rng);
        let r_l = rng.random_range(0.2..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let r_n = rng.random_range(0.2..3.0);
        let relay = |v_l: &[f64], v_n: &[f64]| {
            let x_l = mdrc_core::lattice::encode_stream(&c_l, v_l, &d_l, r_l, &chain, l).unwrap();
            let x_n = mdrc_core::lattice::encode_stream(&c_n, v_n, &d_n, r_n, &chain, l + 1).unwrap();
            let y: Vec<f64> = (0..dim).map(|i| r_l * x_l[i] + v_l[i] + r_n * x_n[i] + v_n[i]).collect();
            relay_combine(&y, &d_l, &d_n, &chain, l)
        };
        let (v_l, v_n) = (uniform_vec(&mut rng, dim, 30.0), uniform_vec(&mut rng, dim, 30.0));
        let base = relay(&v_l, &v_n);
        // Exact in the user's own interference.
        let e_own = mod_distance(&base, &relay(&uniform_vec(&mut rng, dim, 30.0), &v_n), ql);
        // The partner's interference only moves the output by points of Λ_{l+1}.
        let other = relay(&v_l, &uniform_vec(&mut rng, dim, 30.0));
        let e_other = mod_distance(&base, &other, qn);
        let e_exact_equal = if ql == qn { mod_distance(&base, &other, ql) } else { 0.0 };
        // The fine-lattice point decodes to (c_l + c_{l+1} - λ) mod Λ_l.
        let sum: Vec<f64> = c_l.values.iter().zip(&c_n.values).map(|(a, b)| a + b).collect();
        let decoded = relay_decode_noisy(&base, &chain, l);
        let e_decode = mod_distance(&decoded.values, &sum, qn);
        worst[2] = worst[2].max(e_own).max(e_other).max(e_exact_equal).max(e_decode);
    }

    // RQ and log-det identities, each at its own tolerance. The log-det
    // comparison goes through the Gram matrix, whose condition number is the
    // square of h's, so it is only checked where κ(hhᵀ) ≤ 1e8.
    let mut rq_worst = [0.0f64; 4];
    let mut degenerate = 0;
    for _ in 0..TRIALS {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(n..=4);
        let h = gaussian_matrix(n, m, &mut rng);
        let Ok(f) = rq_decompose(&h) else { continue };
        let ld = mdrc_core::linalg::logdet_psd(&h.gram_rows()).unwrap();
        let sv = h.to_nalgebra().singular_values();
        let kappa = (sv.max() / sv.min()).powi(2);
        let norm = h.frobenius_norm();
        let recon = (&f.reconstruct() - &h).frobenius_norm() / norm;
        let ortho = (&(&f.u * &f.u.transpose()) - &Matrix::identity(n)).frobenius_norm();
        let lower = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .fold(0.0f64, |acc, (i, j)| acc.max(f.r[(i, j)].abs()));
        let sum: f64 = f.diagonal().iter().map(|r| (r * r).log2()).sum();
        let scale = rng.random_range(0.01..100.0);
        let left = logdet_identity_plus(&h.gram_rows().scale(scale)).unwrap();
        let right = logdet_identity_plus(&h.transpose().gram_rows().scale(scale)).unwrap();
        rq_worst[0] = rq_worst[0].max(lower);
        rq_worst[1] = rq_worst[1].max(recon.max(ortho));
        if kappa <= 1e8 && !ld.degenerate {
            rq_worst[2] = rq_worst[2].max((ld.value - sum).abs());
        } else {
            degenerate += 1;
        }
        rq_worst[3] = rq_worst[3].max((left - right).abs() / (1.0 + left.abs()));
    }
    let rq_tol = [1e-10, 1e-8, 1e-6, 1e-9];
    worst[3] = rq_worst.iter().zip(&rq_tol).map(|(w, t)| w / t).fold(0.0, f64::max);

    // RQ/log-det is reported as the worst ratio to its per-identity tolerance.
    let tol = [1e-9, 1e-9, 1e-8, 1.0];
    let names = ["mod-distributivity", "quantizer identity", "dirty-paper cancellation", "RQ/log-det (ratio)"];
    let passed = worst.iter().zip(&tol).all(|(w, t)| w <= t);
    let detail = names
        .iter()
        .zip(worst.iter().zip(&tol))
        .map(|(n, (w, t))| format!("{n} worst {w:.1e} (tol {t:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        passed,
        format!(
            "{TRIALS} trials each: {detail}; RQ zero pattern {:.1e}, factors {:.1e}, log-det {:.1e}, determinant swap {:.1e}, log-det skipped on {degenerate} ill-conditioned draws",
            rq_worst[0], rq_worst[1], rq_worst[2], rq_worst[3]
        ),
    )
}

// ---------------------------------------------------------------- oracles

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn lp_oracle(rng: &mut Rng) -> (usize, f64) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=6);
        let max_rows = (1..=30).take_while(|&m| binomial(m + n, n) <= 20_000).last().unwrap_or(1);
        let m = rng.random_range(1..=max_rows);
        let integer = rng.random_bool(0.5);
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            0.0
                        } else if integer {
                            rng.random_range(1..=3) as f64
                        } else {
                            rng.random_range(0.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        // Keep the region bounded: every variable appears in some row.
        for j in 0..n {
            if a.iter().all(|r| r[j] == 0.0) {
                let i = rng.random_range(0..m);
                a[i][j] = 1.0;
            }
        }
        for row in a.iter_mut() {
            if row.iter().all(|&v| v == 0.0) {
                row[rng.random_range(0..n)] = 1.0;
            }
        }
        let b: Vec<f64> = (0..m)
            .map(|_| if rng.random_bool(0.1) { 0.0 } else if integer { rng.random_range(0..=6) as f64 } else { rng.random_range(0.0..10.0) })
            .collect();
        let obj: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..1.0)).collect();
        let mut lp = LpProblem {
            num_vars: n,
            objective: obj.clone(),
            rows: Vec::new(),
        };
        for (i, row) in a.iter().enumerate() {
            let coeffs = row.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (j, v)).collect();
            lp.push(coeffs, b[i], format!("r{i}"));
        }
        let sol = solve_lp(&lp).unwrap();
        let oracle = vertex_enumeration(&obj, &a, &b);
        worst = worst.max((sol.objective - oracle).abs());
        count += 1;
    }
    (count, worst)
}

fn waterfill_oracle(rng: &mut Rng) -> (usize, f64) {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let gains: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..5.0f64).powi(2)).collect();
        let budget = 10f64.powf(rng.random_range(-1.0..2.0));
        let value = |p: &[f64]| waterfill_objective(&gains, p, 1.0);
        let exact = value(&waterfill(&gains, budget, 1.0).unwrap());
        let grid = match n {
            1 => value(&[budget]),
            2 => (0..=20_000)
                .map(|i| {
                    let p = budget * i as f64 / 20_000.0;
                    value(&[p, budget - p])
                })
                .fold(f64::NEG_INFINITY, f64::max),
            _ => {
                // coarse simplex grid, then a finer grid around the best point
                let steps = 400;
                let h = budget / steps as f64;
                let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
                for i in 0..=steps {
                    for j in 0..=steps - i {
                        let (p, q) = (h * i as f64, h * j as f64);
                        let v = value(&[p, q, (budget - p - q).max(0.0)]);
                        if v > best.0 {
                            best = (v, p, q);
                        }
                    }
                }
                let fine = h / 100.0;
                for i in -200..=200 {
                    for j in -200..=200 {
                        let (p, q) = (best.1 + fine * i as f64, best.2 + fine * j as f64);
                        if p < 0.0 || q < 0.0 || p + q > budget {
                            continue;
                        }
                        let v = value(&[p, q, budget - p - q]);
                        if v > best.0 {
                            best.0 = v;
                        }
                    }
                }
                best.0
            }
        };
        // The grid point is feasible, so it may not beat the optimum.
        let err = if grid > exact + 1e-9 { f64::INFINITY } else { exact - grid };
        worst = worst.max(err);
    }
    (100, worst)
}

/// `log₂det(I + Σ H_k Q_k H_kᵀ/σ²)` for 2×2 blocks, with
/// `Q = P(λvvᵀ + (1-λ)v⊥v⊥ᵀ)`, `v = (cos θ, sin θ)`.
fn mac2_value(h: &[[f64; 4]; 2], p: &[f64; 2], params: &[f64; 4]) -> f64 {
    let mut s = [1.0, 0.0, 0.0, 1.0];
    for k in 0..2 {
        let (lam, th) = (params[2 * k], params[2 * k + 1]);
        let (c, si) = (th.cos(), th.sin());
        let q = [
            p[k] * (lam * c * c + (1.0 - lam) * si * si),
            p[k] * (2.0 * lam - 1.0) * c * si,
            p[k] * (2.0 * lam - 1.0) * c * si,
            p[k] * (lam * si * si + (1.0 - lam) * c * c),
        ];
        let hk = &h[k];
        // H Q
        let hq = [
            hk[0] * q[0] + hk[1] * q[2],
            hk[0] * q[1] + hk[1] * q[3],
            hk[2] * q[0] + hk[3] * q[2],
            hk[2] * q[1] + hk[3] * q[3],
        ];
        s[0] += hq[0] * hk[0] + hq[1] * hk[1];
        s[1] += hq[0] * hk[2] + hq[1] * hk[3];
        s[2] += hq[2] * hk[0] + hq[3] * hk[1];
        s[3] += hq[2] * hk[2] + hq[3] * hk[3];
    }
    (s[0] * s[3] - s[1] * s[2]).log2()
}

fn mac_oracle(rng: &mut Rng) -> (usize, f64) {
    use std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let mats: Vec<Matrix> = (0..2).map(|_| gaussian_matrix(2, 2, rng)).collect();
        let snr_db = [0.0, 10.0, 20.0][i % 3];
        let p = [10f64.powf(snr_db / 10.0), 10f64.powf(snr_db / 10.0) * rng.random_range(0.2..1.0)];
        let sol = mac_iwf(&mats, &p, 1.0).unwrap();
        let h: [[f64; 4]; 2] = [0, 1].map(|k| {
            let m = &mats[k];
            [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
        });
        // grid over (λ, θ) per user at resolution 0.05 and π/36
        let lams: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let thetas: Vec<f64> = (0..36).map(|i| i as f64 * PI / 36.0).collect();
        let mut best = (f64::NEG_INFINITY, [0.0; 4]);
        for &l1 in &lams {
            for &t1 in &thetas {
                for &l2 in &lams {
                    for &t2 in &thetas {
                        let x = [l1, t1, l2, t2];
                        let v = mac2_value(&h, &p, &x);
                        if v > best.0 {
                            best = (v, x);
                        }
                    }
                }
            }
        }
        // pattern search from the best grid point
        let mut step = [0.025, PI / 72.0, 0.025, PI / 72.0];
        while step[0] > 1e-9 {
            let mut improved = false;
            for d in 0..4 {
                for sign in [-1.0, 1.0] {
                    let mut x = best.1;
                    x[d] += sign * step[d];
                    if d % 2 == 0 {
                        x[d] = x[d].clamp(0.0, 1.0);
                    }
                    let v = mac2_value(&h, &p, &x);
                    if v > best.0 + 1e-15 {
                        best = (v, x);
                        improved = true;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s *= 0.5);
            }
        }
        worst = worst.max((sol.value - best.0).abs());
    }
    (50, worst)
}

fn solver_oracles() -> Outcome {
    let mut rng = seeded_rng(77);
    let (lp_n, lp_err) = lp_oracle(&mut rng);
    let (wf_n, wf_err) = waterfill_oracle(&mut rng);
    let (mac_n, mac_err) = mac_oracle(&mut rng);
    outcome(
        lp_err <= 1e-9 && wf_err <= 1e-4 && mac_err <= 1e-3,
        format!(
            "LP {lp_n} instances worst {lp_err:.1e} (tol 1e-9); water-filling {wf_n} worst {wf_err:.1e} (tol 1e-4); MAC {mac_n} worst {mac_err:.1e} (tol 1e-3)"
        ),
    )
}

fn main() {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("bound-ordering", bound_ordering),
        ("two-user-asymptotic-optimality", two_user_optimality),
        ("coop-dist-gap-vanishes-off-half", coop_dist_gap_vanishes),
        ("residual-gap-at-half", residual_gap_at_half),
        ("figure-reproduction", figure_reproduction),
        ("asymptotic-gap-bound", asymptotic_gap),
        ("lattice-exchange-exhaustive", lattice_exchange),
        ("algebraic-properties", algebraic_properties),
        ("solver-oracles", solver_oracles),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, run) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        ran += 1;
        if !o.passed {
            failed += 1;
        }
        println!(
            "{} {name} [{:.1}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
