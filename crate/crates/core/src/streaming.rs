//! Bisector statistics, the F-like statistics, and the permutation
//! machinery that calibrates them.

use serde::{Deserialize, Serialize};

use crate::cosine::{fit_cosine_model, CosineFit, FitOptions};
use crate::error::{Error, Result};
use crate::model::{cos_deg, reduce_angle, KinematicSample};
use crate::rng::substream;

/// Precision-weighted location/dispersion estimates under the no-streaming
/// null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullEstimates {
    pub nu0: f64,
    pub sigma0_sq: f64,
}

/// Fixed point of the precision-weighted mean and the moment estimator of
/// the dispersion (floored at 0), iterated to 1e-8.
pub fn null_estimates(sample: &KinematicSample) -> Result<NullEstimates> {
    let n = sample.len() as f64;
    let ys: Vec<f64> = sample.records().iter().map(|s| s.y).collect();
    let s2: Vec<f64> = sample.records().iter().map(|s| s.sigma * s.sigma).collect();
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut nu0 = mean_y;
    let mut sigma0_sq = ys.iter().map(|y| (y - mean_y).powi(2)).sum::<f64>() / n;
    let max_iter = 500;
    for _ in 0..max_iter {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..ys.len() {
            let w = 1.0 / (sigma0_sq + s2[i]);
            num += w * ys[i];
            den += w;
        }
        let nu_next = num / den;
        let raw: f64 = (0..ys.len())
            .map(|i| (ys[i] - nu_next).powi(2) - s2[i])
            .sum::<f64>()
            / n;
        let sig_next = raw.max(0.0);
        let delta = (nu_next - nu0).abs().max((sig_next - sigma0_sq).abs());
        nu0 = nu_next;
        sigma0_sq = sig_next;
        if delta < 1e-8 {
            return Ok(NullEstimates { nu0, sigma0_sq });
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Difference of precision-weighted mean velocities across the bisector
/// `cos(theta - omega) = 0`, restricted to stars with `r > r0`. Weights are
/// `1/(sigma0_sq + sigma_i^2)`.
pub fn delta1_v(
    sample: &KinematicSample,
    omega_deg: f64,
    r0: f64,
    null: &NullEstimates,
) -> Result<f64> {
    let mut pos = (0.0, 0.0); // (weighted y, weight)
    let mut neg = (0.0, 0.0);
    for s in sample.records() {
        if s.r <= r0 {
            continue;
        }
        let w = 1.0 / (null.sigma0_sq + s.sigma * s.sigma);
        if cos_deg(s.theta - omega_deg) > 0.0 {
            pos.0 += w * s.y;
            pos.1 += w;
        } else {
            neg.0 += w * s.y;
            neg.1 += w;
        }
    }
    if pos.1 == 0.0 || neg.1 == 0.0 {
        return Err(Error::EmptySide);
    }
    Ok(pos.0 / pos.1 - neg.0 / neg.1)
}

/// Exact maximization of `delta1_v` over omega. The statistic is piecewise
/// constant in omega with breakpoints at `theta_i +/- 90` (mod 360) over the
/// stars with `r > r0`, so one midpoint per arc suffices. Ties go to the
/// smallest midpoint in [-180, 180).
pub fn bisector_b1(sample: &KinematicSample, r0: f64, null: &NullEstimates) -> Result<(f64, f64)> {
    let mut breaks: Vec<f64> = Vec::new();
    for s in sample.records() {
        if s.r > r0 {
            breaks.push(reduce_angle(s.theta + 90.0));
            breaks.push(reduce_angle(s.theta - 90.0));
        }
    }
    if breaks.is_empty() {
        return Err(Error::EmptySide);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut midpoints = Vec::with_capacity(breaks.len());
    for i in 0..breaks.len() {
        if i + 1 < breaks.len() {
            midpoints.push(0.5 * (breaks[i] + breaks[i + 1]));
        } else {
            // wrap-around arc
            midpoints.push(reduce_angle(0.5 * (breaks[i] + breaks[0] + 360.0)));
        }
    }
    midpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(f64, f64)> = None;
    for &omega in &midpoints {
        match delta1_v(sample, omega, r0, null) {
            Ok(v) => {
                if best.map_or(true, |(bv, _)| v > bv) {
                    best = Some((v, omega));
                }
            }
            Err(Error::EmptySide) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::EmptySide)
}

/// F-like statistic: weighted sum of cos^2 times the squared (truncated)
/// monotone estimate.
pub fn f_statistic(sample: &KinematicSample, fit: &CosineFit) -> f64 {
    f_rho(sample, fit, f64::INFINITY)
}

/// Same statistic with the untruncated estimate.
pub fn f_statistic_untruncated(sample: &KinematicSample, fit: &CosineFit) -> f64 {
    sample
        .records()
        .iter()
        .map(|s| {
            let c = cos_deg(s.theta);
            let lam = fit.lambda_raw.eval(s.r);
            fit.weight(s.sigma) * c * c * lam * lam
        })
        .sum()
}

/// Partial F statistic over stars with `r <= rho0`.
pub fn f_rho(sample: &KinematicSample, fit: &CosineFit, rho0: f64) -> f64 {
    sample
        .records()
        .iter()
        .filter(|s| s.r <= rho0)
        .map(|s| {
            let c = cos_deg(s.theta);
            let lam = fit.lambda_hat.eval(s.r);
            fit.weight(s.sigma) * c * c * lam * lam
        })
        .sum()
}

/// Test statistics available to the permutation machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    /// max over omega of the bisector contrast beyond `r0`
    B1 { r0: f64 },
    /// absolute major-axis contrast beyond `r0`
    AbsDelta1V0 { r0: f64 },
    /// F-like statistic over the full sample
    F,
    /// partial F statistic up to `rho0`
    FRho { rho0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scope {
    /// permute all (y, sigma) pairs
    All,
    /// permute only the pairs with r <= rho0
    FirstM { rho0: f64 },
}

/// Outcome of a sampled permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub statistic: Statistic,
    pub stat_observed: f64,
    pub n_perm: usize,
    /// count of permuted statistics strictly above the observed one
    pub n_exceed_strict: usize,
    /// count of permuted statistics at or above the observed one
    pub n_geq: usize,
    pub p_strict: f64,
    pub p_conservative: f64,
    pub seed: u64,
}

fn eval_statistic(sample: &KinematicSample, stat: Statistic, opts: &FitOptions) -> Result<f64> {
    match stat {
        Statistic::B1 { r0 } => {
            let null = null_estimates(sample)?;
            bisector_b1(sample, r0, &null).map(|(b1, _)| b1)
        }
        Statistic::AbsDelta1V0 { r0 } => {
            let null = null_estimates(sample)?;
            delta1_v(sample, 0.0, r0, &null).map(f64::abs)
        }
        Statistic::F => {
            let fit = fit_cosine_model(sample, opts)?;
            Ok(f_statistic(sample, &fit))
        }
        Statistic::FRho { rho0 } => {
            let fit = fit_cosine_model(sample, opts)?;
            Ok(f_rho(sample, &fit, rho0))
        }
    }
}

/// Sampled permutation test. Each replicate permutes the (y, sigma) pairs
/// uniformly at random over the scope indices (positions stay fixed) and
/// recomputes the statistic from scratch, including every data-dependent
/// plug-in. Replicate `k` uses the substream `(seed, "perm", k)`, so results
/// are independent of evaluation order.
pub fn permutation_test(
    sample: &KinematicSample,
    statistic: Statistic,
    n_perm: usize,
    seed: u64,
    scope: Scope,
) -> Result<PermutationResult> {
    permutation_test_with(sample, statistic, n_perm, seed, scope, &FitOptions::default())
}

pub fn permutation_test_with(
    sample: &KinematicSample,
    statistic: Statistic,
    n_perm: usize,
    seed: u64,
    scope: Scope,
    opts: &FitOptions,
) -> Result<PermutationResult> {
    if n_perm == 0 {
        return Err(Error::BadStatistic("n_perm must be at least 1".into()));
    }
    let scope_indices: Vec<usize> = match scope {
        Scope::All => (0..sample.len()).collect(),
        Scope::FirstM { rho0 } => sample
            .records()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.r <= rho0)
            .map(|(i, _)| i)
            .collect(),
    };
    let observed = eval_statistic(sample, statistic, opts)?;
    let base_pairs = sample.pairs();
    let mut n_exceed_strict = 0usize;
    let mut n_geq = 0usize;
    for k in 0..n_perm {
        let permuted = if scope_indices.len() < 2 {
            // nothing to permute; the statistic is unchanged
            observed
        } else {
            let mut rng = substream(seed, "perm", k as u64);
            let mut pairs = base_pairs.clone();
            // Fisher-Yates over the scope positions
            for i in (1..scope_indices.len()).rev() {
                let j = rand::Rng::random_range(&mut rng, 0..=i);
                pairs.swap(scope_indices[i], scope_indices[j]);
            }
            eval_statistic(&sample.with_pairs(&pairs), statistic, opts)?
        };
        if permuted > observed {
            n_exceed_strict += 1;
        }
        if permuted >= observed {
            n_geq += 1;
        }
    }
    Ok(PermutationResult {
        statistic,
        stat_observed: observed,
        n_perm,
        n_exceed_strict,
        n_geq,
        p_strict: n_exceed_strict as f64 / n_perm as f64,
        p_conservative: (1 + n_geq) as f64 / (1 + n_perm) as f64,
        seed,
    })
}

/// One scanned threshold hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub rho0: f64,
    pub result: PermutationResult,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub points: Vec<ThresholdPoint>,
    pub acceptance_set: Vec<f64>,
    /// smallest rejected grid point, when any rejection occurs
    pub upper_bound: Option<f64>,
}

/// Scan `rho0` over the grid, testing `rho >= rho0` by the partial F
/// statistic with permutations restricted to the stars at or below `rho0`.
pub fn threshold_upper_bound(
    sample: &KinematicSample,
    alpha: f64,
    n_perm: usize,
    grid: &[f64],
    seed: u64,
) -> Result<ThresholdScan> {
    if grid.is_empty() {
        return Err(Error::BadGrid("threshold grid must be nonempty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (gi, &rho0) in grid.iter().enumerate() {
        let result = permutation_test(
            sample,
            Statistic::FRho { rho0 },
            n_perm,
            crate::rng::derive_seed(seed, "threshold", gi as u64),
            Scope::FirstM { rho0 },
        )?;
        let accepted = result.p_conservative > alpha;
        points.push(ThresholdPoint {
            rho0,
            result,
            accepted,
        });
    }
    let acceptance_set: Vec<f64> = points.iter().filter(|p| p.accepted).map(|p| p.rho0).collect();
    let upper_bound = points
        .iter()
        .filter(|p| !p.accepted)
        .map(|p| p.rho0)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });
    Ok(ThresholdScan {
        points,
        acceptance_set,
        upper_bound,
    })
}
