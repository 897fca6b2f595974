use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdrc_core::experiments::{
    lattice_demo, run_alpha_sweep, run_sweep_with, verify_theorems, SweepOptions, SweepResult,
};
use mdrc_core::lattice::{chains_from_json, NoiseMode};
use mdrc_core::{Error, ScenarioConfig, Scheme};

#[derive(Parser)]
#[command(name = "mdrc", version, about = "Sum-rate sweeps and protocol checks for the multiway distributed-relay channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sum-rates over the config's seeds and SNR grid.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "dist,coop,cutset,df,af")]
        schemes: String,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Refine the relay covariance of the cooperative and DF schemes.
        #[arg(long)]
        refine_qr: bool,
    },
    /// Cooperative and distributed sum-rates against the time split.
    AlphaSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        alphas: Vec<f64>,
        /// Defaults to the config's SNR grid.
        #[arg(long, value_delimiter = ',')]
        snrs: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ordering, asymptotic-gap and reference-curve checks; exit code 1 if any fails.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Noiseless lattice exchanges over random channels.
    LatticeDemo {
        /// One chain object, or an array with one chain per relay.
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Relay noise standard deviation; noiseless when omitted.
        #[arg(long)]
        noise: Option<f64>,
    },
}

enum Failure {
    Config(String),
    Verification,
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidRegime(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    Ok(ScenarioConfig::from_json(&read(path)?)?)
}

fn write_csv(res: &SweepResult, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
            res.write_csv(io::BufWriter::new(file))?;
        }
        None => res.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            schemes,
            out,
            refine_qr,
        } => {
            let cfg = load_config(&config)?;
            let schemes = Scheme::parse_list(&schemes)?;
            let res = run_sweep_with(&cfg, &schemes, &SweepOptions { refine_qr })?;
            write_csv(&res, out.as_deref())?;
            if res.failures() > 0 {
                eprintln!("{} records failed", res.failures());
            }
        }
        Command::AlphaSweep {
            config,
            alphas,
            snrs,
            out,
        } => {
            let cfg = load_config(&config)?;
            let snrs = if snrs.is_empty() { cfg.snr_grid_db.clone() } else { snrs };
            let sweep = run_alpha_sweep(&cfg, &alphas, &snrs)?;
            write_csv(&sweep.result, out.as_deref())?;
            for (snr, scheme, alpha) in &sweep.argmax {
                eprintln!("{snr} dB {scheme}: best alpha {alpha}");
            }
            for (snr, alpha, gap) in &sweep.gap_profile {
                eprintln!("{snr} dB alpha {alpha}: coop-dist {:.4} (se {:.4})", gap.mean, gap.std_error);
            }
        }
        Command::Verify { config, json } => {
            let cfg = load_config(&config)?;
            let report = verify_theorems(&cfg);
            let mut stdout = io::stdout().lock();
            if json {
                let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
                let _ = writeln!(stdout, "{text}");
            } else {
                for line in report.lines() {
                    let _ = writeln!(stdout, "{line}");
                }
            }
            if !report.all_passed() {
                return Err(Failure::Verification);
            }
        }
        Command::LatticeDemo { chain, seeds, noise } => {
            let chains = chains_from_json(&read(&chain)?)?;
            let noise = noise.map_or(NoiseMode::Off, NoiseMode::Gaussian);
            let seeds: Vec<u64> = (0..seeds).collect();
            let s = lattice_demo(&chains, &seeds, noise)?;
            println!(
                "runs={} successful={} failed_pairs={} relay_errors={}",
                s.runs, s.successful_runs, s.failed_pairs, s.relay_errors
            );
            if noise == NoiseMode::Off && s.successful_runs != s.runs {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
