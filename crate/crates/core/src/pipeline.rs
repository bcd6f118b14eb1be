//! End-to-end analysis pipeline: configuration, orchestration of the fitting
//! and testing stages, and emission of the JSON report plus plot-data CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::changepoint::{
    changepoint_conf_set, default_rho_grid, split_bootstrap_ci, split_point, sse_profile,
    ChangepointFit, PsiKind, WeightFn,
};
use crate::cosine::{fit_cosine_model, CosineFit, FitOptions};
use crate::error::{Error, Result};
use crate::intervals::{
    bootstrap_band, bootstrap_pointwise_ci, ci_from_delta_sse, coverage_estimate, default_xi_max,
    delta_sse, empirical_quantile, BootstrapConfig, IntervalSet,
};
use crate::io::{describe, load_csv, DescribeBlock};
use crate::model::{
    generate_synthetic, trim_members, validate_and_order, KinematicSample, LambdaSpec, StarRecord,
    SynthConfig,
};
use crate::rng::derive_seed;
use crate::smooth::smooth_lambda;
use crate::step::StepFunction;
use crate::streaming::{
    bisector_b1, delta1_v, null_estimates, permutation_test, threshold_upper_bound, NullEstimates,
    PermutationResult, Scope, Statistic, ThresholdScan,
};

/// Pipeline configuration. Every field maps to one `key=value` line of the
/// flat config format (lists are comma-separated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// CSV input; when absent a synthetic sample is generated instead
    pub input: Option<PathBuf>,
    pub synth_n: usize,
    /// "zero", "step:BETA,RHO", or "hinge:BETA,RHO"
    pub synth_lambda: String,
    pub cutoff: f64,
    pub bisector_r0: Vec<f64>,
    pub n_perm: usize,
    pub n_boot: usize,
    pub bandwidth: f64,
    pub spike_window: usize,
    /// radii for the interval stage; empty means data quartiles
    pub ci_r0: Vec<f64>,
    pub ci_quantile_90: f64,
    pub ci_quantile_95: f64,
    /// candidate thresholds for the partial-statistic scan; empty skips it
    pub threshold_grid: Vec<f64>,
    pub calibrate_quantiles: bool,
    pub calib_reps: usize,
    pub calib_l: f64,
    pub calib_dt: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            synth_n: 300,
            synth_lambda: "zero".into(),
            cutoff: 0.5,
            bisector_r0: vec![0.0],
            n_perm: 999,
            n_boot: 200,
            bandwidth: 0.1,
            spike_window: 13,
            ci_r0: Vec::new(),
            ci_quantile_90: 1.61,
            ci_quantile_95: 2.29,
            threshold_grid: Vec::new(),
            calibrate_quantiles: false,
            calib_reps: 10_000,
            calib_l: 8.0,
            calib_dt: 0.005,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::BadConfig(format!("bad list entry `{s}`: {e}")))
        })
        .collect()
}

impl RunConfig {
    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let bad = |e: &dyn std::fmt::Display| Error::BadConfig(format!("{key}: {e}"));
        match key {
            "input" => self.input = Some(PathBuf::from(v)),
            "synth_n" => self.synth_n = v.parse().map_err(|e| bad(&e))?,
            "synth_lambda" => self.synth_lambda = v.to_string(),
            "cutoff" => self.cutoff = v.parse().map_err(|e| bad(&e))?,
            "bisector_r0" => self.bisector_r0 = parse_list(v)?,
            "n_perm" => self.n_perm = v.parse().map_err(|e| bad(&e))?,
            "n_boot" => self.n_boot = v.parse().map_err(|e| bad(&e))?,
            "bandwidth" => self.bandwidth = v.parse().map_err(|e| bad(&e))?,
            "spike_window" => self.spike_window = v.parse().map_err(|e| bad(&e))?,
            "ci_r0" => self.ci_r0 = parse_list(v)?,
            "ci_quantile_90" => self.ci_quantile_90 = v.parse().map_err(|e| bad(&e))?,
            "ci_quantile_95" => self.ci_quantile_95 = v.parse().map_err(|e| bad(&e))?,
            "threshold_grid" => self.threshold_grid = parse_list(v)?,
            "calibrate_quantiles" => {
                self.calibrate_quantiles = v.parse().map_err(|e| bad(&e))?
            }
            "calib_reps" => self.calib_reps = v.parse().map_err(|e| bad(&e))?,
            "calib_l" => self.calib_l = v.parse().map_err(|e| bad(&e))?,
            "calib_dt" => self.calib_dt = v.parse().map_err(|e| bad(&e))?,
            "seed" => self.seed = v.parse().map_err(|e| bad(&e))?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::BadConfig(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parse a flat `key=value` config text; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::BadConfig(format!("line {}: expected key=value", i + 1))
            })?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    pub fn parse_lambda(&self) -> Result<LambdaSpec> {
        let s = self.synth_lambda.trim();
        if s == "zero" {
            return Ok(LambdaSpec::Zero);
        }
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::BadConfig(format!("bad synth_lambda `{s}`")))?;
        let nums = parse_list(args)?;
        if nums.len() != 2 {
            return Err(Error::BadConfig(format!(
                "synth_lambda `{s}` needs beta,rho"
            )));
        }
        match kind {
            "step" => Ok(LambdaSpec::Step {
                beta: nums[0],
                rho: nums[1],
            }),
            "hinge" => Ok(LambdaSpec::Hinge {
                beta: nums[0],
                rho: nums[1],
            }),
            other => Err(Error::BadConfig(format!("bad synth_lambda kind `{other}`"))),
        }
    }

    /// Canonical form used for the provenance hash. The output directory is
    /// excluded: it changes where artifacts land, never what they contain.
    fn canonical(&self) -> String {
        let mut cfg = self.clone();
        cfg.out_dir = PathBuf::new();
        serde_json::to_string(&cfg).expect("config serializes")
    }
}

fn fnv1a_hex(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub nu_hat: f64,
    pub sigma2_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    pub variance_floored: bool,
    pub spike_window: usize,
    pub lambda_hat: StepFunction,
    pub lambda_raw: StepFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectorBlock {
    pub r0: f64,
    pub b1_observed: f64,
    pub omega_at_max: f64,
    pub permutation: Option<PermutationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestsBlock {
    pub skipped: bool,
    pub null: NullEstimates,
    pub bisector: Vec<BisectorBlock>,
    pub f_test: Option<PermutationResult>,
    pub threshold_scan: Option<ThresholdScan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRow {
    pub r0: f64,
    pub lambda_hat: f64,
    pub delta_sse_90: IntervalSet,
    pub delta_sse_95: IntervalSet,
    pub bootstrap_90: IntervalSet,
    pub coverage_90: f64,
    pub coverage_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalsBlock {
    pub skipped: bool,
    pub rows: Vec<CiRow>,
    pub d_star_q90: Option<f64>,
    pub d_star_q95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointBlock {
    pub psi_kind: PsiKind,
    pub rho_hat: f64,
    pub beta_hat: f64,
    pub nu_hat: f64,
    pub n_skipped_grid_points: usize,
    /// 90% sublevel set (hinge only; the indicator profile gets no set)
    pub conf_set_90: Option<IntervalSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitBlock {
    pub gamma_hat: f64,
    pub beta_hat: f64,
    pub tau: f64,
    pub bootstrap_quantile_90: Option<f64>,
    pub conf_set_90: Option<IntervalSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBlock {
    pub n_reps: usize,
    pub big_l: f64,
    pub dt: f64,
    pub q90: f64,
    pub q95: f64,
    pub n_truncation_flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub n_input: usize,
    pub n_kept: usize,
    pub n_dropped: usize,
    pub describe: DescribeBlock,
    pub fit: FitSummary,
    pub tests: TestsBlock,
    pub intervals: IntervalsBlock,
    pub changepoint: Vec<ChangepointBlock>,
    pub splitpoint: SplitBlock,
    pub calibration: Option<CalibrationBlock>,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Load the configured dataset: a CSV file when `input` is set, otherwise a
/// synthetic draw.
pub fn load_records(cfg: &RunConfig) -> Result<Vec<StarRecord>> {
    match &cfg.input {
        Some(path) => load_csv(path),
        None => {
            let lambda = cfg.parse_lambda()?;
            let synth = SynthConfig::survey_like(cfg.synth_n, lambda, derive_seed(cfg.seed, "synth-data", 0));
            Ok(generate_synthetic(&synth)?.records().to_vec())
        }
    }
}

/// Load, trim (when membership probabilities are present), and order the
/// configured dataset.
pub fn prepare_sample(cfg: &RunConfig) -> Result<KinematicSample> {
    let records = stage("load", load_records(cfg))?;
    let has_probs = records.iter().any(|r| r.p_member.is_some());
    let kept = if has_probs {
        stage("trim", trim_members(&records, cfg.cutoff))?.0
    } else {
        records
    };
    stage("order", validate_and_order(&kept))
}

/// Run the full analysis and write `report.json` plus the plot-data CSVs
/// into the output directory. Byte-deterministic given the config.
pub fn run_pipeline(cfg: &RunConfig) -> Result<AnalysisReport> {
    std::fs::create_dir_all(&cfg.out_dir)?;

    // load + trim
    let records = stage("load", load_records(cfg))?;
    let n_input = records.len();
    let has_probs = records.iter().any(|r| r.p_member.is_some());
    let kept = if has_probs {
        stage("trim", trim_members(&records, cfg.cutoff))?.0
    } else {
        records
    };
    let n_kept = kept.len();
    let sample = stage("order", validate_and_order(&kept))?;

    let describe_block = describe(&sample);

    // cosine fit
    let opts = FitOptions {
        spike_window: cfg.spike_window,
        ..FitOptions::default()
    };
    let fit = stage("fit", fit_cosine_model(&sample, &opts))?;
    write_lambda_csv(&cfg.out_dir, &fit)?;
    write_smooth_csv(&cfg.out_dir, &fit, cfg.bandwidth, &sample)?;

    // streaming tests
    let tests = stage("test", run_tests(cfg, &sample))?;
    write_delta1v_csv(&cfg.out_dir, &sample, &tests.null, &cfg.bisector_r0)?;

    // intervals + bootstrap
    let intervals = stage("ci", run_intervals(cfg, &sample, &fit))?;

    // changepoint profiles
    let grid = default_rho_grid(&sample);
    let mut changepoint = Vec::new();
    for psi in [PsiKind::Hinge, PsiKind::Indicator] {
        let prof = stage("changepoint", sse_profile(&sample, &fit, psi, &grid))?;
        write_profile_csv(&cfg.out_dir, &prof)?;
        let conf = if psi == PsiKind::Hinge {
            let mut set = stage("changepoint", changepoint_conf_set(&prof, 2.706))?;
            set.level = 0.9;
            Some(set)
        } else {
            None
        };
        changepoint.push(ChangepointBlock {
            psi_kind: psi,
            rho_hat: prof.rho_hat,
            beta_hat: prof.beta_hat,
            nu_hat: prof.nu_hat,
            n_skipped_grid_points: prof.skipped.len(),
            conf_set_90: conf,
        });
    }

    // split point
    let splitpoint = stage("splitpoint", run_splitpoint(cfg, &sample, &fit))?;

    // optional asymptotics calibration
    let calibration = if cfg.calibrate_quantiles {
        Some(stage("calibrate", run_calibration(cfg))?)
    } else {
        None
    };

    let report = AnalysisReport {
        schema_version: 1,
        provenance: Provenance {
            seed: cfg.seed,
            config_hash: fnv1a_hex(&cfg.canonical()),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        n_input,
        n_kept,
        n_dropped: n_input - n_kept,
        describe: describe_block,
        fit: FitSummary {
            nu_hat: fit.nu_hat,
            sigma2_hat: fit.sigma2_hat,
            iterations: fit.iterations,
            converged: fit.converged,
            variance_floored: fit.variance_floored,
            spike_window: fit.spike_window,
            lambda_hat: fit.lambda_hat.clone(),
            lambda_raw: fit.lambda_raw.clone(),
        },
        tests,
        intervals,
        changepoint,
        splitpoint,
        calibration,
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_artifact(&cfg.out_dir, "report.json", &json)?;
    Ok(report)
}

pub fn run_tests(cfg: &RunConfig, sample: &KinematicSample) -> Result<TestsBlock> {
    let null = null_estimates(sample)?;
    let skipped = cfg.n_perm == 0;
    let mut bisector = Vec::new();
    for (i, &r0) in cfg.bisector_r0.iter().enumerate() {
        let (b1, omega) = bisector_b1(sample, r0, &null)?;
        let permutation = if skipped {
            None
        } else {
            Some(permutation_test(
                sample,
                Statistic::B1 { r0 },
                cfg.n_perm,
                derive_seed(cfg.seed, "perm-b1", i as u64),
                Scope::All,
            )?)
        };
        bisector.push(BisectorBlock {
            r0,
            b1_observed: b1,
            omega_at_max: omega,
            permutation,
        });
    }
    let f_test = if skipped {
        None
    } else {
        Some(permutation_test(
            sample,
            Statistic::F,
            cfg.n_perm,
            derive_seed(cfg.seed, "perm-f", 0),
            Scope::All,
        )?)
    };
    let threshold_scan = if skipped || cfg.threshold_grid.is_empty() {
        None
    } else {
        Some(threshold_upper_bound(
            sample,
            0.1,
            cfg.n_perm,
            &cfg.threshold_grid,
            derive_seed(cfg.seed, "perm-threshold", 0),
        )?)
    };
    Ok(TestsBlock {
        skipped,
        null,
        bisector,
        f_test,
        threshold_scan,
    })
}

fn default_ci_r0(sample: &KinematicSample) -> Vec<f64> {
    let radii: Vec<f64> = sample.radii().collect();
    [0.25, 0.5, 0.75]
        .iter()
        .map(|&p| empirical_quantile(&radii, p))
        .collect()
}

pub fn run_intervals(
    cfg: &RunConfig,
    sample: &KinematicSample,
    fit: &CosineFit,
) -> Result<IntervalsBlock> {
    let r0_list = if cfg.ci_r0.is_empty() {
        default_ci_r0(sample)
    } else {
        cfg.ci_r0.clone()
    };
    if cfg.n_boot == 0 {
        return Ok(IntervalsBlock {
            skipped: true,
            rows: Vec::new(),
            d_star_q90: None,
            d_star_q95: None,
        });
    }
    let mut boot = BootstrapConfig::new(cfg.n_boot, derive_seed(cfg.seed, "boot", 0));
    boot.bandwidth = cfg.bandwidth;

    let xi_max = default_xi_max(fit);
    let xi_step = 0.05;
    let mut rows = Vec::new();
    let mut profile_csv = String::from("r0,xi,delta_sse\n");
    for &r0 in &r0_list {
        let mut set90 = ci_from_delta_sse(sample, fit, r0, cfg.ci_quantile_90, xi_max, xi_step)?;
        set90.level = 0.9;
        let mut set95 = ci_from_delta_sse(sample, fit, r0, cfg.ci_quantile_95, xi_max, xi_step)?;
        set95.level = 0.95;
        let boot90 = bootstrap_pointwise_ci(sample, fit, r0, &[0.9], &boot, false)?
            .pop()
            .expect("one level requested");
        let (cov, cov_se) = coverage_estimate(sample, fit, r0, cfg.ci_quantile_90, &boot)?;
        // coarse profile for plotting
        let mut xi = 0.0;
        while xi <= xi_max {
            let d = delta_sse(sample, fit, r0, xi)?;
            writeln!(profile_csv, "{r0},{xi},{d}").expect("string write");
            xi += 10.0 * xi_step;
        }
        rows.push(CiRow {
            r0,
            lambda_hat: fit.lambda_hat.eval(r0),
            delta_sse_90: set90,
            delta_sse_95: set95,
            bootstrap_90: boot90,
            coverage_90: cov,
            coverage_se: cov_se,
        });
    }
    write_artifact(&cfg.out_dir, "delta_sse_profile.csv", &profile_csv)?;

    let (d_star, _) = bootstrap_band(sample, fit, &boot, &[0.9])?;
    let mut sorted = d_star.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q90 = empirical_quantile(&sorted, 0.9);
    let q95 = empirical_quantile(&sorted, 0.95);
    let mut d_csv = String::from("replicate,d_star\n");
    for (k, d) in d_star.iter().enumerate() {
        writeln!(d_csv, "{k},{d}").expect("string write");
    }
    write_artifact(&cfg.out_dir, "d_star.csv", &d_csv)?;

    // one row per (radius, method, level) for the interval summary table
    let mut table = String::from("r0,method,level,L,U,coverage_estimate\n");
    for row in &rows {
        for (set, method, level, cov) in [
            (&row.delta_sse_90, "delta_sse", 0.9, row.coverage_90),
            (&row.delta_sse_95, "delta_sse", 0.95, f64::NAN),
            (&row.bootstrap_90, "bootstrap", 0.9, f64::NAN),
        ] {
            let (l, u) = set.hull().unwrap_or((f64::NAN, f64::NAN));
            writeln!(table, "{},{method},{level},{l},{u},{cov}", row.r0).expect("string write");
        }
    }
    write_artifact(&cfg.out_dir, "ci_table.csv", &table)?;

    Ok(IntervalsBlock {
        skipped: false,
        rows,
        d_star_q90: Some(q90),
        d_star_q95: Some(q95),
    })
}

pub fn run_splitpoint(
    cfg: &RunConfig,
    sample: &KinematicSample,
    fit: &CosineFit,
) -> Result<SplitBlock> {
    let tau = sample.max_r();
    let h = WeightFn::Constant(1.0);
    let split = split_point(&fit.lambda_hat, &h, tau, 200);
    let split = match split {
        Ok(s) => s,
        Err(Error::FlatKappa) => {
            return Ok(SplitBlock {
                gamma_hat: 0.0,
                beta_hat: 0.0,
                tau,
                bootstrap_quantile_90: None,
                conf_set_90: None,
            })
        }
        Err(e) => return Err(e),
    };
    let mut kappa_csv = String::from("r,kappa00\n");
    for (r, k) in split.curve.r.iter().zip(&split.kappa00) {
        writeln!(kappa_csv, "{r},{k}").expect("string write");
    }
    write_artifact(&cfg.out_dir, "kappa00.csv", &kappa_csv)?;

    let (quantile, conf_set) = if cfg.n_boot == 0 {
        (None, None)
    } else {
        let mut boot = BootstrapConfig::new(cfg.n_boot, derive_seed(cfg.seed, "boot-split", 0));
        boot.bandwidth = cfg.bandwidth;
        match split_bootstrap_ci(sample, fit, &boot, &h, tau, 0.9) {
            Ok((set, q)) => (Some(q), Some(set)),
            Err(Error::FlatKappa) => (None, None),
            Err(e) => return Err(e),
        }
    };
    Ok(SplitBlock {
        gamma_hat: split.gamma_hat,
        beta_hat: split.beta_hat,
        tau,
        bootstrap_quantile_90: quantile,
        conf_set_90: conf_set,
    })
}

pub fn run_calibration(cfg: &RunConfig) -> Result<CalibrationBlock> {
    let samples = crate::asymp::sample_d(
        1.0,
        1.0,
        cfg.calib_reps,
        cfg.calib_l,
        cfg.calib_dt,
        derive_seed(cfg.seed, "calibrate", 0),
    )?;
    let mut sorted = samples.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q90 = empirical_quantile(&sorted, 0.9);
    let q95 = empirical_quantile(&sorted, 0.95);
    let mut csv = String::from("replicate,d,truncation_flag\n");
    for (k, (v, f)) in samples
        .values
        .iter()
        .zip(&samples.truncation_flags)
        .enumerate()
    {
        writeln!(csv, "{k},{v},{f}").expect("string write");
    }
    write_artifact(&cfg.out_dir, "calibration_d.csv", &csv)?;
    Ok(CalibrationBlock {
        n_reps: cfg.calib_reps,
        big_l: cfg.calib_l,
        dt: cfg.calib_dt,
        q90,
        q95,
        n_truncation_flagged: samples.n_flagged(),
    })
}

fn write_lambda_csv(dir: &Path, fit: &CosineFit) -> Result<()> {
    let mut csv = String::from("r,lambda_raw,lambda_truncated\n");
    for ((k, raw), trunc) in fit
        .lambda_raw
        .knots()
        .iter()
        .zip(fit.lambda_raw.values())
        .zip(fit.lambda_hat.values())
    {
        writeln!(csv, "{k},{raw},{trunc}").expect("string write");
    }
    write_artifact(dir, "lambda_hat.csv", &csv)
}

fn write_smooth_csv(
    dir: &Path,
    fit: &CosineFit,
    bandwidth: f64,
    sample: &KinematicSample,
) -> Result<()> {
    let ls = smooth_lambda(&fit.lambda_hat, bandwidth)?;
    let (lo, hi) = (sample.min_r().max(1e-6), sample.max_r());
    let mut csv = String::from("r,lambda_smooth,derivative\n");
    let n = 200;
    for j in 0..=n {
        let r = lo + (hi - lo) * j as f64 / n as f64;
        writeln!(csv, "{r},{},{}", ls.eval(r), ls.deriv(r)).expect("string write");
    }
    write_artifact(dir, "lambda_smooth.csv", &csv)
}

fn write_delta1v_csv(
    dir: &Path,
    sample: &KinematicSample,
    null: &NullEstimates,
    r0_list: &[f64],
) -> Result<()> {
    let mut csv = String::from("r0,omega,delta1v\n");
    for &r0 in r0_list {
        let mut omega = -180.0;
        while omega < 180.0 {
            match delta1_v(sample, omega, r0, null) {
                Ok(v) => writeln!(csv, "{r0},{omega},{v}").expect("string write"),
                Err(Error::EmptySide) => {}
                Err(e) => return Err(e),
            }
            omega += 1.0;
        }
    }
    write_artifact(dir, "delta1v.csv", &csv)
}

fn write_profile_csv(dir: &Path, prof: &ChangepointFit) -> Result<()> {
    let name = match prof.psi_kind {
        PsiKind::Hinge => "sse_profile_hinge.csv",
        PsiKind::Indicator => "sse_profile_indicator.csv",
    };
    let mut csv = String::from("rho,sse\n");
    for (r, s) in prof.grid.iter().zip(&prof.sse) {
        writeln!(csv, "{r},{s}").expect("string write");
    }
    write_artifact(dir, name, &csv)
}
