//! SSE-difference confidence sets for the monotone amplitude at a fixed
//! radius, and the smoothed residual bootstrap: pointwise intervals,
//! simultaneous bands, and coverage estimates.

use serde::{Deserialize, Serialize};

use crate::cosine::{
    fit_cosine_model, fit_cosine_model_frozen, fit_pinned, free_sse, CosineFit, FitOptions,
};
use crate::error::{Error, Result};
use crate::model::{cos_deg, KinematicSample};
use crate::rng::substream;
use crate::smooth::{smooth_lambda, SmoothFn};
use crate::step::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    /// kernel bandwidth on the log-radius scale
    pub bandwidth: f64,
    pub seed: u64,
    /// shift residuals to weighted mean zero before resampling
    pub center_residuals: bool,
    /// reuse the original dispersion estimate in replicate refits instead of
    /// re-estimating it
    pub freeze_sigma2: bool,
}

impl BootstrapConfig {
    pub fn new(n_boot: usize, seed: u64) -> Self {
        BootstrapConfig {
            n_boot,
            bandwidth: 0.1,
            seed,
            center_residuals: false,
            freeze_sigma2: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_boot == 0 {
            return Err(Error::BadConfig("n_boot must be at least 1".into()));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::BadConfig("bandwidth must be positive".into()));
        }
        Ok(())
    }
}

/// Union of disjoint closed intervals with a nominal coverage level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
    pub level: f64,
}

impl IntervalSet {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(l, u)| l <= x && x <= u)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Hull [min L, max U], if nonempty.
    pub fn hull(&self) -> Option<(f64, f64)> {
        if self.intervals.is_empty() {
            None
        } else {
            Some((
                self.intervals[0].0,
                self.intervals[self.intervals.len() - 1].1,
            ))
        }
    }
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Constrained-minus-unconstrained weighted SSE at the pin `u(r0) = xi0`,
/// with the dispersion fixed at the fitted value; clamped to be nonnegative.
pub fn delta_sse(sample: &KinematicSample, fit: &CosineFit, r0: f64, xi0: f64) -> Result<f64> {
    let (_, _, sse_pin) = fit_pinned(sample, r0, xi0, fit.sigma2_hat)?;
    let (_, _, sse_free) = free_sse(sample, fit.sigma2_hat);
    let d = sse_pin - sse_free;
    if d < -1e-10 {
        return Err(Error::BadStatistic(format!(
            "constrained SSE fell below the unconstrained one by {}",
            -d
        )));
    }
    Ok(d.max(0.0))
}

/// Default upper end of the pin-value scan.
pub fn default_xi_max(fit: &CosineFit) -> f64 {
    let max_lambda = fit
        .lambda_hat
        .values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    2.0 * max_lambda + 5.0
}

/// Sublevel set `{xi in [0, xi_max] : delta_sse(r0, xi) <= quantile}`,
/// located on a grid of spacing `xi_step` and refined at each boundary by
/// bisection to 1e-3. Disconnected sets are reported as-is.
pub fn ci_from_delta_sse(
    sample: &KinematicSample,
    fit: &CosineFit,
    r0: f64,
    quantile: f64,
    xi_max: f64,
    xi_step: f64,
) -> Result<IntervalSet> {
    if !(quantile > 0.0) {
        return Err(Error::BadConfig("quantile must be positive".into()));
    }
    if !(xi_max > 0.0 && xi_step > 0.0) {
        return Err(Error::BadConfig("scan bounds must be positive".into()));
    }
    let inside = |xi: f64| -> Result<bool> { Ok(delta_sse(sample, fit, r0, xi)? <= quantile) };
    // bisection for the boundary between an inside and an outside point
    let refine = |mut a: f64, mut b: f64, a_inside: bool| -> Result<f64> {
        while (b - a).abs() > 1e-3 {
            let mid = 0.5 * (a + b);
            if inside(mid)? == a_inside {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };

    let n_steps = (xi_max / xi_step).ceil() as usize;
    let grid: Vec<f64> = (0..=n_steps)
        .map(|i| (i as f64 * xi_step).min(xi_max))
        .collect();
    let flags: Vec<bool> = grid
        .iter()
        .map(|&xi| inside(xi))
        .collect::<Result<Vec<_>>>()?;

    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..grid.len() {
        if flags[i] && start.is_none() {
            let lo = if i == 0 {
                0.0
            } else {
                refine(grid[i], grid[i - 1], true)?
            };
            start = Some(lo);
        }
        if !flags[i] {
            if let Some(lo) = start.take() {
                let hi = refine(grid[i - 1], grid[i], true)?;
                intervals.push((lo, hi));
            }
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, xi_max));
    }
    Ok(IntervalSet {
        intervals,
        level: f64::NAN,
    })
}

/// Smoothed-model residuals `e_i = y_i - nu_hat - lambda_s(r_i) cos theta_i`
/// paired with the reported measurement errors.
fn residual_pairs(
    sample: &KinematicSample,
    fit: &CosineFit,
    ls: &SmoothFn,
    center: bool,
) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = sample
        .records()
        .iter()
        .map(|s| {
            (
                s.sigma,
                s.y - fit.nu_hat - ls.eval(s.r) * cos_deg(s.theta),
            )
        })
        .collect();
    if center {
        let mut num = 0.0;
        let mut den = 0.0;
        for (sig, e) in &pairs {
            let w = fit.weight(*sig);
            num += w * e;
            den += w;
        }
        let mean = num / den;
        for p in pairs.iter_mut() {
            p.1 -= mean;
        }
    }
    pairs
}

/// One bootstrap replicate: positions held fixed, residual pairs
/// `(sigma_i, e_i)` resampled i.i.d. with replacement, responses rebuilt
/// around the smoothed fitted surface. Replicate `k` uses the substream
/// `(seed, "boot", k)`.
pub fn bootstrap_resample(
    sample: &KinematicSample,
    fit: &CosineFit,
    cfg: &BootstrapConfig,
    replicate: usize,
) -> Result<KinematicSample> {
    cfg.validate()?;
    let ls = smooth_lambda(&fit.lambda_hat, cfg.bandwidth)?;
    let pairs = residual_pairs(sample, fit, &ls, cfg.center_residuals);
    Ok(resample_with(sample, fit, &ls, &pairs, cfg.seed, replicate))
}

fn resample_with(
    sample: &KinematicSample,
    fit: &CosineFit,
    ls: &SmoothFn,
    pairs: &[(f64, f64)],
    seed: u64,
    replicate: usize,
) -> KinematicSample {
    let mut rng = substream(seed, "boot", replicate as u64);
    let n = sample.len();
    let new_pairs: Vec<(f64, f64)> = sample
        .records()
        .iter()
        .map(|s| {
            let j = rand::Rng::random_range(&mut rng, 0..n);
            let (sig, e) = pairs[j];
            (fit.nu_hat + ls.eval(s.r) * cos_deg(s.theta) + e, sig)
        })
        .collect();
    sample.with_pairs(&new_pairs)
}

fn refit(sample: &KinematicSample, fit: &CosineFit, cfg: &BootstrapConfig) -> Result<CosineFit> {
    let opts = FitOptions {
        spike_window: fit.spike_window,
        ..FitOptions::default()
    };
    if cfg.freeze_sigma2 {
        fit_cosine_model_frozen(sample, fit.sigma2_hat, &opts)
    } else {
        fit_cosine_model(sample, &opts)
    }
}

/// Pointwise intervals for the amplitude at `r0`, from the conditional
/// distribution of `lambda*(r0) - lambda_s(r0)`. The default construction
/// reflects the replicate quantiles around the point estimate; the
/// percentile flag shifts by them instead. Lower edges are clamped at 0.
pub fn bootstrap_pointwise_ci(
    sample: &KinematicSample,
    fit: &CosineFit,
    r0: f64,
    levels: &[f64],
    cfg: &BootstrapConfig,
    percentile: bool,
) -> Result<Vec<IntervalSet>> {
    cfg.validate()?;
    let ls = smooth_lambda(&fit.lambda_hat, cfg.bandwidth)?;
    let pairs = residual_pairs(sample, fit, &ls, cfg.center_residuals);
    let anchor = ls.eval(r0);
    let mut deltas = Vec::with_capacity(cfg.n_boot);
    for k in 0..cfg.n_boot {
        let rep = resample_with(sample, fit, &ls, &pairs, cfg.seed, k);
        let refit = refit(&rep, fit, cfg)?;
        deltas.push(refit.lambda_hat.eval(r0) - anchor);
    }
    let deltas = sorted(deltas);
    let point = fit.lambda_hat.eval(r0);
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        if !(0.0..1.0).contains(&level) || level <= 0.0 {
            return Err(Error::BadConfig(format!("bad confidence level {level}")));
        }
        let alpha = 1.0 - level;
        let q_lo = empirical_quantile(&deltas, alpha / 2.0);
        let q_hi = empirical_quantile(&deltas, 1.0 - alpha / 2.0);
        let (l, u) = if percentile {
            (point + q_lo, point + q_hi)
        } else {
            (point - q_hi, point - q_lo)
        };
        let l = l.max(0.0);
        let u = u.max(l);
        out.push(IntervalSet {
            intervals: vec![(l, u)],
            level,
        });
    }
    Ok(out)
}

/// A simultaneous band around the truncated estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub level: f64,
    pub half_width: f64,
    pub lower: StepFunction,
    pub upper: StepFunction,
}

/// Simultaneous bands from the sup-distance `D* = max_r |lambda* - lambda_s|`,
/// maximized over the union of the replicate's knots and the anchor's knots.
/// Returns the D* sample alongside one band per level.
pub fn bootstrap_band(
    sample: &KinematicSample,
    fit: &CosineFit,
    cfg: &BootstrapConfig,
    levels: &[f64],
) -> Result<(Vec<f64>, Vec<Band>)> {
    cfg.validate()?;
    let ls = smooth_lambda(&fit.lambda_hat, cfg.bandwidth)?;
    let pairs = residual_pairs(sample, fit, &ls, cfg.center_residuals);
    let mut d_star = Vec::with_capacity(cfg.n_boot);
    for k in 0..cfg.n_boot {
        let rep = resample_with(sample, fit, &ls, &pairs, cfg.seed, k);
        let refit = refit(&rep, fit, cfg)?;
        let mut d = 0.0_f64;
        for &r in refit
            .lambda_hat
            .knots()
            .iter()
            .chain(fit.lambda_hat.knots())
        {
            d = d.max((refit.lambda_hat.eval(r) - ls.eval(r)).abs());
        }
        d_star.push(d);
    }
    let sorted_d = sorted(d_star.clone());
    let mut bands = Vec::with_capacity(levels.len());
    for &level in levels {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::BadConfig(format!("bad confidence level {level}")));
        }
        let q = empirical_quantile(&sorted_d, level);
        let knots = fit.lambda_hat.knots().to_vec();
        let lower: Vec<f64> = fit
            .lambda_hat
            .values()
            .iter()
            .map(|v| (v - q).max(0.0))
            .collect();
        let upper: Vec<f64> = fit.lambda_hat.values().iter().map(|v| v + q).collect();
        bands.push(Band {
            level,
            half_width: q,
            lower: StepFunction::new(knots.clone(), lower)?,
            upper: StepFunction::new(knots, upper)?,
        });
    }
    Ok((d_star, bands))
}

/// Bootstrap estimate of the SSE-difference method's coverage at `r0`:
/// the fraction of replicates whose SSE difference, pinned at the smoothed
/// anchor value, stays at or below the quantile. Returns the estimate and
/// its Monte Carlo standard error.
pub fn coverage_estimate(
    sample: &KinematicSample,
    fit: &CosineFit,
    r0: f64,
    quantile: f64,
    cfg: &BootstrapConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let ls = smooth_lambda(&fit.lambda_hat, cfg.bandwidth)?;
    let pairs = residual_pairs(sample, fit, &ls, cfg.center_residuals);
    let anchor = ls.eval(r0);
    let mut covered = 0usize;
    for k in 0..cfg.n_boot {
        let rep = resample_with(sample, fit, &ls, &pairs, cfg.seed, k);
        let refit = refit(&rep, fit, cfg)?;
        if delta_sse(&rep, &refit, r0, anchor.max(0.0))? <= quantile {
            covered += 1;
        }
    }
    let p = covered as f64 / cfg.n_boot as f64;
    let se = (p * (1.0 - p) / cfg.n_boot as f64).sqrt();
    Ok((p, se))
}
