//! Monte Carlo laboratory for the limit distributions: drifted two-sided
//! Brownian paths, slopes of their greatest convex minorants, the
//! squared-slope integral statistic, the Chernoff argmin, and the
//! split-point limit process.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::{gcm_values, slopes_from_points};
use crate::rng::{derive_seed, substream};

/// One realization of `c W(t) + d t^2` on a symmetric uniform grid.
#[derive(Debug, Clone)]
pub struct MCPath {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub c: f64,
    pub d: f64,
    pub seed: u64,
    /// index of t = 0
    pub origin: usize,
}

/// Simulate the drifted path: two independent Brownian halves glued at 0,
/// Gaussian increments of variance dt, plus the parabolic drift.
pub fn simulate_path(c: f64, d: f64, big_l: f64, dt: f64, seed: u64) -> Result<MCPath> {
    if !(big_l > 0.0 && dt > 0.0 && big_l.is_finite() && dt.is_finite()) {
        return Err(Error::BadGrid("L and dt must be positive".into()));
    }
    if !(c > 0.0 && d > 0.0) {
        return Err(Error::BadGrid("c and d must be positive".into()));
    }
    let m = (big_l / dt).round() as usize;
    if m == 0 {
        return Err(Error::BadGrid("dt larger than L".into()));
    }
    let sd = dt.sqrt();
    let mut rng = substream(seed, "path", 0);
    // right half first, then the independent left half
    let mut right = Vec::with_capacity(m);
    let mut w = 0.0;
    for _ in 0..m {
        w += sd * rng.sample::<f64, _>(StandardNormal);
        right.push(w);
    }
    let mut left = Vec::with_capacity(m);
    w = 0.0;
    for _ in 0..m {
        w += sd * rng.sample::<f64, _>(StandardNormal);
        left.push(w);
    }
    let npts = 2 * m + 1;
    let mut grid = Vec::with_capacity(npts);
    let mut values = Vec::with_capacity(npts);
    for j in 0..npts {
        let t = (j as f64 - m as f64) * dt;
        let wt = if j < m {
            left[m - 1 - j]
        } else if j == m {
            0.0
        } else {
            right[j - m - 1]
        };
        grid.push(t);
        values.push(c * wt + d * t * t);
    }
    Ok(MCPath {
        grid,
        values,
        c,
        d,
        seed,
        origin: m,
    })
}

/// Left-hand GCM slopes of the path restricted to `[lo, hi]`, one slope per
/// grid increment inside the interval.
pub fn slogcm_path(path: &MCPath, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let eps = 1e-9;
    let i0 = path.grid.partition_point(|&t| t < lo - eps);
    let i1 = path.grid.partition_point(|&t| t <= hi + eps);
    if i1 < i0 + 2 || i0 >= path.grid.len() {
        return Err(Error::BadGrid(format!(
            "interval [{lo}, {hi}] covers fewer than two grid points"
        )));
    }
    Ok(slopes_from_points(
        &path.grid[i0..i1],
        &path.values[i0..i1],
    ))
}

/// The constrained slope process: left-half slopes capped at 0, right-half
/// slopes floored at 0, each half computed on its own restriction. Output
/// has one value per grid increment.
pub fn slogcm0_path(path: &MCPath) -> Vec<f64> {
    let m = path.origin;
    let mut out = Vec::with_capacity(path.grid.len() - 1);
    let left = slopes_from_points(&path.grid[..=m], &path.values[..=m]);
    out.extend(left.into_iter().map(|v| v.min(0.0)));
    let right = slopes_from_points(&path.grid[m..], &path.values[m..]);
    out.extend(right.into_iter().map(|v| v.max(0.0)));
    out
}

/// Monte Carlo samples with per-replicate boundary-truncation flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSamples {
    pub values: Vec<f64>,
    /// the path behavior near +/- L suggests the truncation was too small
    pub truncation_flags: Vec<bool>,
}

impl FlaggedSamples {
    pub fn n_flagged(&self) -> usize {
        self.truncation_flags.iter().filter(|f| **f).count()
    }
}

/// Sample the squared-slope integral statistic: per replicate, integrate
/// `g^2 - g0^2` (trapezoid rule over the grid) where g and g0 are the
/// unconstrained and constrained slope processes of the same path.
/// Replicate k uses the derived seed (seed, "dd", k).
pub fn sample_d(
    c: f64,
    d: f64,
    n_reps: usize,
    big_l: f64,
    dt: f64,
    seed: u64,
) -> Result<FlaggedSamples> {
    let mut values = Vec::with_capacity(n_reps);
    let mut flags = Vec::with_capacity(n_reps);
    for k in 0..n_reps {
        let path = simulate_path(c, d, big_l, dt, derive_seed(seed, "dd", k as u64))?;
        let g = slopes_from_points(&path.grid, &path.values);
        let g0 = slogcm0_path(&path);
        let integrand: Vec<f64> = g
            .iter()
            .zip(&g0)
            .map(|(a, b)| a * a - b * b)
            .collect();
        let n = integrand.len();
        let sum: f64 = integrand.iter().sum();
        let value = dt * (sum - 0.5 * (integrand[0] + integrand[n - 1]));
        // slope disagreement close to the ends means the window clipped it
        let margin = 50.0 * dt;
        let flagged = g.iter().zip(&g0).zip(&path.grid[1..]).any(|((a, b), &t)| {
            (a - b).abs() > 1e-12 && (t <= -big_l + margin || t >= big_l - margin)
        });
        values.push(if value > -1e-9 { value.max(0.0) } else { value });
        flags.push(flagged);
    }
    Ok(FlaggedSamples {
        values,
        truncation_flags: flags,
    })
}

/// Sample `argmin_t W(t) + t^2` on the grid (smallest t on ties).
pub fn sample_chernoff(n_reps: usize, big_l: f64, dt: f64, seed: u64) -> Result<FlaggedSamples> {
    let mut values = Vec::with_capacity(n_reps);
    let mut flags = Vec::with_capacity(n_reps);
    for k in 0..n_reps {
        let path = simulate_path(1.0, 1.0, big_l, dt, derive_seed(seed, "chernoff", k as u64))?;
        let mut best = 0usize;
        for j in 1..path.values.len() {
            if path.values[j] < path.values[best] {
                best = j;
            }
        }
        let t = path.grid[best];
        values.push(t);
        flags.push(t.abs() >= big_l - 50.0 * dt);
    }
    Ok(FlaggedSamples {
        values,
        truncation_flags: flags,
    })
}

/// Standardizing constant for the cube-root-rate pivot:
/// `2 |lambda'(r) / (2 C I)|^{1/3}` where C is the mean precision and I the
/// design-density cosine-squared integral at r.
pub fn chernoff_pivot_constant(
    lambda_prime_r: f64,
    c_precision: f64,
    fcos2_integral: f64,
) -> Result<f64> {
    if !(lambda_prime_r > 0.0) {
        return Err(Error::NonPositiveArg("lambda_prime_r"));
    }
    if !(c_precision > 0.0) {
        return Err(Error::NonPositiveArg("c_precision"));
    }
    if !(fcos2_integral > 0.0) {
        return Err(Error::NonPositiveArg("fcos2_integral"));
    }
    Ok(2.0 * (lambda_prime_r / (2.0 * c_precision * fcos2_integral)).abs().cbrt())
}

/// Parameters of the split-point limit process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    /// diffusion scale of the driving path
    pub a: f64,
    /// drift curvature of the driving path
    pub b: f64,
    /// best stump level
    pub beta: f64,
    /// split radius
    pub gamma: f64,
    /// amplitude at the split
    pub lambda_g: f64,
    /// amplitude slope at the split
    pub lambda_g_prime: f64,
    /// weight at the split
    pub h_g: f64,
    /// residual weight mass beyond the split
    pub h_tau_minus_h_gamma: f64,
}

impl LimitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::NonPositiveArg("a"));
        }
        if !(self.b > 0.0) {
            return Err(Error::NonPositiveArg("b"));
        }
        if !(self.h_tau_minus_h_gamma > 0.0) {
            return Err(Error::NonPositiveArg("h_tau_minus_h_gamma"));
        }
        Ok(())
    }

    pub fn v11(&self) -> f64 {
        2.0 * self.h_tau_minus_h_gamma
    }

    pub fn v12(&self) -> f64 {
        -2.0 * self.lambda_g * self.h_g
    }

    pub fn v22(&self) -> f64 {
        4.0 * self.lambda_g * self.lambda_g_prime * self.h_g
    }

    /// Scalar curvature of the simplified one-dimensional form.
    pub fn c_simplified(&self) -> f64 {
        0.5 * (self.lambda_g_prime
            - 0.5 * self.lambda_g * self.h_g / self.h_tau_minus_h_gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitForm {
    Joint,
    Simplified,
}

/// Argmin samples of the split-point limit. For the joint form `t1` holds
/// the closed-form minimizing first coordinate; for the simplified form it
/// is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitLimitSamples {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub truncation_flags: Vec<bool>,
}

/// Sample the limit's argmin coordinates. Joint form: the criterion is
/// quadratic in t1, so t1 is minimized in closed form (t1* = -(V12/V11) t2)
/// and the profiled objective
/// `2 beta h(gamma) [G(t2) - G(0) - b t2^2] + (V22 - V12^2/V11) t2^2 / 2`
/// is scanned over the grid; G is the GCM of the driving path. Simplified
/// form: scan `G(t2) - G(0) - b t2^2 + c t2^2` with the scalar c; requires
/// c > 0.
pub fn sample_split_limit(
    params: &LimitParams,
    n_reps: usize,
    big_l: f64,
    dt: f64,
    seed: u64,
    form: LimitForm,
) -> Result<SplitLimitSamples> {
    params.validate()?;
    let c_simp = params.c_simplified();
    if form == LimitForm::Simplified && c_simp <= 0.0 {
        return Err(Error::NonPositiveCurvature);
    }
    let (scale, curvature) = match form {
        LimitForm::Joint => (
            2.0 * params.beta * params.h_g,
            0.5 * (params.v22() - params.v12() * params.v12() / params.v11()),
        ),
        LimitForm::Simplified => (1.0, c_simp),
    };
    if scale <= 0.0 {
        return Err(Error::NonPositiveArg("beta * h_g"));
    }
    let mut t1 = Vec::new();
    let mut t2 = Vec::with_capacity(n_reps);
    let mut flags = Vec::with_capacity(n_reps);
    for k in 0..n_reps {
        let path = simulate_path(
            params.a,
            params.b,
            big_l,
            dt,
            derive_seed(seed, "split-limit", k as u64),
        )?;
        let g = gcm_values(&path.grid, &path.values);
        let g0 = g[path.origin];
        let mut best = 0usize;
        let mut best_val = f64::INFINITY;
        for j in 0..path.grid.len() {
            let t = path.grid[j];
            let val = scale * (g[j] - g0 - params.b * t * t) + curvature * t * t;
            if val < best_val {
                best_val = val;
                best = j;
            }
        }
        let t = path.grid[best];
        t2.push(t);
        if form == LimitForm::Joint {
            t1.push(-(params.v12() / params.v11()) * t);
        }
        flags.push(t.abs() >= big_l - 50.0 * dt);
    }
    Ok(SplitLimitSamples {
        t1,
        t2,
        truncation_flags: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn sd(v: &[f64]) -> f64 {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    }

    #[test]
    fn path_basics() {
        let p = simulate_path(1.0, 1.0, 2.0, 0.01, 42).unwrap();
        assert_eq!(p.values[p.origin], 0.0);
        assert_eq!(p.grid[p.origin], 0.0);
        assert_eq!(p.grid.len(), 401);
        assert!((p.grid[0] + 2.0).abs() < 1e-12 && (p.grid[400] - 2.0).abs() < 1e-12);
        let q = simulate_path(1.0, 1.0, 2.0, 0.01, 42).unwrap();
        assert_eq!(p.values, q.values);
        let r = simulate_path(1.0, 1.0, 2.0, 0.01, 43).unwrap();
        assert_ne!(p.values, r.values);
    }

    #[test]
    fn tiny_diffusion_is_parabola() {
        let dt = 0.01;
        let p = simulate_path(1e-9, 1.0, 2.0, dt, 7).unwrap();
        // argmin at 0
        let best = p
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(p.grid[best].abs() < 2.0 * dt);
        // left slope at t = 1 approaches 2t
        let slopes = slogcm_path(&p, -2.0, 2.0).unwrap();
        let j = p.grid.partition_point(|&t| t < 1.0 - 1e-12);
        assert!((slopes[j - 1] - 2.0).abs() < 3.0 * dt);
    }

    #[test]
    fn increment_variance_matches_dt() {
        let dt = 0.005;
        let p = simulate_path(1.0, 0.0000001, 4.0, dt, 3).unwrap();
        // strip (negligible) drift and difference the right half
        let m = p.origin;
        let incs: Vec<f64> = (m..p.values.len() - 1)
            .map(|j| p.values[j + 1] - p.values[j])
            .collect();
        let v = incs.iter().map(|x| x * x).sum::<f64>() / incs.len() as f64;
        let se = dt * (2.0 / incs.len() as f64).sqrt();
        assert!((v - dt).abs() < 5.0 * se, "var {v} vs dt {dt}");
    }

    #[test]
    fn slogcm_convex_input_is_discrete_derivative() {
        let mut p = simulate_path(1.0, 1.0, 1.0, 0.25, 1).unwrap();
        // overwrite with a convex sequence
        p.values = p.grid.iter().map(|t| t * t).collect();
        let slopes = slogcm_path(&p, -1.0, 1.0).unwrap();
        for j in 1..p.grid.len() {
            let expect = (p.values[j] - p.values[j - 1]) / (p.grid[j] - p.grid[j - 1]);
            assert!((slopes[j - 1] - expect).abs() < 1e-12);
        }
        assert!(slopes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn slogcm0_signs_and_parabola_inactive() {
        let p = simulate_path(1.0, 1.0, 4.0, 0.01, 11).unwrap();
        let g0 = slogcm0_path(&p);
        let m = p.origin;
        assert!(g0[..m].iter().all(|&v| v <= 0.0));
        assert!(g0[m..].iter().all(|&v| v >= 0.0));
        assert!(g0.windows(2).all(|w| w[0] <= w[1] + 1e-12));

        // deterministic symmetric parabola: constraint never binds
        let mut q = p.clone();
        q.values = q.grid.iter().map(|t| t * t).collect();
        let g = slopes_from_points(&q.grid, &q.values);
        let g0 = slogcm0_path(&q);
        for (a, b) in g.iter().zip(&g0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn slogcm0_caps_tilted_path() {
        // strictly increasing line: left slopes are +1 everywhere, capped to 0
        let mut p = simulate_path(1.0, 1.0, 1.0, 0.25, 1).unwrap();
        p.values = p.grid.clone();
        let g0 = slogcm0_path(&p);
        let m = p.origin;
        assert!(g0[..m].iter().all(|&v| v == 0.0));
        assert!(g0[m..].iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn d_samples_nonnegative_and_deterministic() {
        let a = sample_d(1.0, 1.0, 40, 4.0, 0.02, 5).unwrap();
        let b = sample_d(1.0, 1.0, 40, 4.0, 0.02, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().all(|&v| v >= 0.0));
        assert_eq!(a.values.len(), 40);
        // with L = 4 the boundary flag should be rare
        assert!(a.n_flagged() <= 2);
    }

    #[test]
    fn chernoff_small_sample_sanity() {
        let s = sample_chernoff(400, 4.0, 0.02, 9).unwrap();
        assert!(s.values.iter().all(|&t| t.abs() <= 4.0));
        // symmetric distribution with SD well below 1
        assert!(mean(&s.values).abs() < 0.2);
        assert!(sd(&s.values) < 1.0);
        assert_eq!(s.n_flagged(), 0);
    }

    #[test]
    fn pivot_constant_arithmetic() {
        // numerator 2, denominator 2*1*1: ratio 1, constant 2
        let g = chernoff_pivot_constant(2.0, 1.0, 1.0).unwrap();
        assert!((g - 2.0).abs() < 1e-12);
        // cube-root homogeneity in the slope
        let g8 = chernoff_pivot_constant(16.0, 1.0, 1.0).unwrap();
        assert!((g8 - 2.0 * g).abs() < 1e-12);
        assert!(chernoff_pivot_constant(0.0, 1.0, 1.0).is_err());
        assert!(chernoff_pivot_constant(1.0, 0.0, 1.0).is_err());
        assert!(chernoff_pivot_constant(1.0, 1.0, 0.0).is_err());
    }

    fn example_params() -> LimitParams {
        let lambda_g = 1.0;
        LimitParams {
            a: 1.0,
            b: 0.5,
            beta: 2.0 * lambda_g,
            gamma: 0.5,
            lambda_g,
            lambda_g_prime: 1.5,
            h_g: 1.0,
            h_tau_minus_h_gamma: 2.0,
        }
    }

    #[test]
    fn joint_and_simplified_agree_when_level_is_twice_amplitude() {
        // with beta = 2 lambda(gamma) the profiled joint objective is a
        // positive multiple of the simplified one, so argmins coincide
        let p = example_params();
        let joint = sample_split_limit(&p, 50, 4.0, 0.02, 3, LimitForm::Joint).unwrap();
        let simp = sample_split_limit(&p, 50, 4.0, 0.02, 3, LimitForm::Simplified).unwrap();
        assert_eq!(joint.t2, simp.t2);
        assert!(simp.t1.is_empty());
        assert_eq!(joint.t1.len(), 50);
        for (t1, t2) in joint.t1.iter().zip(&joint.t2) {
            assert!((t1 - (-(p.v12() / p.v11()) * t2)).abs() < 1e-12);
        }
    }

    #[test]
    fn stronger_curvature_concentrates_argmin() {
        // b is half the amplitude slope at the split, so a coherent sweep
        // scales lambda_g_prime along with it; the argmin then concentrates
        // near 0 at rate b^(-2/3)
        let mut sds = Vec::new();
        for b in [1.0, 4.0, 16.0] {
            let mut p = example_params();
            p.b = b;
            p.lambda_g_prime = 2.0 * b;
            let s = sample_split_limit(&p, 200, 6.0, 0.02, 8, LimitForm::Simplified).unwrap();
            sds.push(sd(&s.t2));
        }
        assert!(sds[0] > sds[1] && sds[1] > sds[2], "sds {sds:?}");
    }

    #[test]
    fn nonpositive_curvature_rejected() {
        let mut p = example_params();
        // make the subtraction dominate
        p.lambda_g_prime = 0.01;
        p.h_tau_minus_h_gamma = 0.1;
        assert!(p.c_simplified() <= 0.0);
        assert!(matches!(
            sample_split_limit(&p, 5, 2.0, 0.1, 1, LimitForm::Simplified),
            Err(Error::NonPositiveCurvature)
        ));
    }

    #[test]
    fn bad_grid_rejected() {
        assert!(simulate_path(1.0, 1.0, -1.0, 0.01, 1).is_err());
        assert!(simulate_path(0.0, 1.0, 1.0, 0.01, 1).is_err());
        assert!(simulate_path(1.0, 1.0, 1.0, 0.0, 1).is_err());
    }
}
