//! Command-line front end: each subcommand runs one analysis stage (or the
//! whole pipeline) and prints a JSON block to stdout; artifact CSVs go to
//! the output directory.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use streamkin::cosine::{fit_cosine_model, FitOptions};
use streamkin::io::{describe, save_csv};
use streamkin::pipeline::{
    load_records, prepare_sample, run_calibration, run_intervals, run_pipeline, run_splitpoint,
    run_tests, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "streamkin",
    version,
    about = "Shape-restricted inference for streaming motion in stellar kinematics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand; each overrides the matching config
/// key.
#[derive(Args, Clone)]
struct Common {
    /// flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// input CSV (header r,theta,y,sigma[,p_member]); omit to synthesize
    #[arg(long)]
    input: Option<PathBuf>,
    /// master seed
    #[arg(long)]
    seed: Option<u64>,
    /// permutation replicates (0 skips permutation tests)
    #[arg(long)]
    n_perm: Option<usize>,
    /// bootstrap replicates (0 skips bootstrap stages)
    #[arg(long)]
    n_boot: Option<usize>,
    /// smoothing bandwidth in log-radius units
    #[arg(long)]
    bandwidth: Option<f64>,
    /// trailing-window length for the boundary truncation
    #[arg(long)]
    spike_window: Option<usize>,
    /// membership-probability cutoff
    #[arg(long)]
    cutoff: Option<f64>,
    /// artifact directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// recompute the SSE-difference quantiles by Monte Carlo
    #[arg(long)]
    calibrate_quantiles: bool,
}

impl Common {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                RunConfig::from_kv(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.input {
            cfg.input = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.n_perm {
            cfg.n_perm = v;
        }
        if let Some(v) = self.n_boot {
            cfg.n_boot = v;
        }
        if let Some(v) = self.bandwidth {
            cfg.bandwidth = v;
        }
        if let Some(v) = self.spike_window {
            cfg.spike_window = v;
        }
        if let Some(v) = self.cutoff {
            cfg.cutoff = v;
        }
        if let Some(v) = self.out_dir {
            cfg.out_dir = v;
        }
        if self.calibrate_quantiles {
            cfg.calibrate_quantiles = true;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: fit, tests, intervals, thresholds, report
    Run(Common),
    /// Fit the monotone cosine model and print the estimates
    Fit(Common),
    /// Permutation tests for streaming (bisector and F statistics)
    Test(Common),
    /// Confidence sets for the amplitude at chosen radii
    Ci {
        #[command(flatten)]
        common: Common,
        /// radii (comma-separated); default: data quartiles
        #[arg(long, value_delimiter = ',')]
        r0: Vec<f64>,
    },
    /// Segmented-regression threshold profile and confidence set
    Changepoint(Common),
    /// Best two-level split of the amplitude with bootstrap set
    Splitpoint(Common),
    /// Monte Carlo quantiles of the SSE-difference limit
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Generate a synthetic sample and write it as CSV
    Synth {
        #[command(flatten)]
        common: Common,
        /// sample size
        #[arg(long, default_value_t = 300)]
        n: usize,
        /// amplitude: zero, step:BETA,RHO, or hinge:BETA,RHO
        #[arg(long, default_value = "zero")]
        lambda: String,
        /// output CSV path
        #[arg(long, default_value = "synth.csv")]
        out: PathBuf,
    },
    /// Descriptive statistics of the (trimmed) sample
    Describe(Common),
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions {
        spike_window: cfg.spike_window,
        ..FitOptions::default()
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(common) => {
            let cfg = common.into_config()?;
            let report = run_pipeline(&cfg)?;
            print_json(&report)?;
            eprintln!("report written to {}", cfg.out_dir.join("report.json").display());
        }
        Command::Fit(common) => {
            let cfg = common.into_config()?;
            let sample = prepare_sample(&cfg)?;
            let fit = fit_cosine_model(&sample, &fit_options(&cfg))?;
            print_json(&fit)?;
        }
        Command::Test(common) => {
            let cfg = common.into_config()?;
            let sample = prepare_sample(&cfg)?;
            let tests = run_tests(&cfg, &sample)?;
            print_json(&tests)?;
        }
        Command::Ci { common, r0 } => {
            let mut cfg = common.into_config()?;
            if !r0.is_empty() {
                cfg.ci_r0 = r0;
            }
            std::fs::create_dir_all(&cfg.out_dir)?;
            let sample = prepare_sample(&cfg)?;
            let fit = fit_cosine_model(&sample, &fit_options(&cfg))?;
            let block = run_intervals(&cfg, &sample, &fit)?;
            print_json(&block)?;
        }
        Command::Changepoint(common) => {
            let cfg = common.into_config()?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let sample = prepare_sample(&cfg)?;
            let fit = fit_cosine_model(&sample, &fit_options(&cfg))?;
            let grid = streamkin::changepoint::default_rho_grid(&sample);
            let mut blocks = Vec::new();
            for psi in [
                streamkin::changepoint::PsiKind::Hinge,
                streamkin::changepoint::PsiKind::Indicator,
            ] {
                let prof = streamkin::changepoint::sse_profile(&sample, &fit, psi, &grid)?;
                let conf = if psi == streamkin::changepoint::PsiKind::Hinge {
                    Some(streamkin::changepoint::changepoint_conf_set(&prof, 2.706)?)
                } else {
                    None
                };
                blocks.push(serde_json::json!({
                    "psi_kind": psi,
                    "rho_hat": prof.rho_hat,
                    "beta_hat": prof.beta_hat,
                    "nu_hat": prof.nu_hat,
                    "conf_set_90": conf,
                }));
            }
            print_json(&blocks)?;
        }
        Command::Splitpoint(common) => {
            let cfg = common.into_config()?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let sample = prepare_sample(&cfg)?;
            let fit = fit_cosine_model(&sample, &fit_options(&cfg))?;
            let block = run_splitpoint(&cfg, &sample, &fit)?;
            print_json(&block)?;
        }
        Command::Calibrate { common, reps } => {
            let mut cfg = common.into_config()?;
            if let Some(r) = reps {
                cfg.calib_reps = r;
            }
            std::fs::create_dir_all(&cfg.out_dir)?;
            let block = run_calibration(&cfg)?;
            print_json(&block)?;
        }
        Command::Synth {
            common,
            n,
            lambda,
            out,
        } => {
            let mut cfg = common.into_config()?;
            cfg.synth_n = n;
            cfg.synth_lambda = lambda;
            cfg.input = None;
            let records = load_records(&cfg)?;
            save_csv(&records, &out)?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Describe(common) => {
            let cfg = common.into_config()?;
            let sample = prepare_sample(&cfg)?;
            print_json(&describe(&sample))?;
        }
    }
    Ok(())
}
