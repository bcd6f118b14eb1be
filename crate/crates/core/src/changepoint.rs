//! Threshold estimation: segmented-regression change-point fits with SSE
//! profiling, and split-point (best two-level) approximation of the
//! amplitude with its bootstrap confidence set.

use serde::{Deserialize, Serialize};

use crate::cosine::{fit_cosine_model, CosineFit, FitOptions};
use crate::error::{Error, Result};
use crate::intervals::{bootstrap_resample, empirical_quantile, BootstrapConfig, IntervalSet};
use crate::model::{cos_deg, KinematicSample};
use crate::smooth::{smooth_lambda, SmoothFn};
use crate::step::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiKind {
    /// psi(x) = 1 for x > 0, else 0
    Indicator,
    /// psi(x) = max(0, x)
    Hinge,
}

impl PsiKind {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            PsiKind::Indicator => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PsiKind::Hinge => x.max(0.0),
        }
    }
}

/// Profiled segmented-regression fit over a grid of candidate thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointFit {
    pub psi_kind: PsiKind,
    pub rho_hat: f64,
    pub beta_hat: f64,
    pub nu_hat: f64,
    /// candidate thresholds that produced a fit (skipped points excluded)
    pub grid: Vec<f64>,
    /// weighted residual SSE at each retained grid point
    pub sse: Vec<f64>,
    /// grid points skipped because the regressor was degenerate there
    pub skipped: Vec<f64>,
}

impl ChangepointFit {
    pub fn min_sse(&self) -> f64 {
        self.sse.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Default candidate grid: distinct observed radii strictly inside the data
/// range.
pub fn default_rho_grid(sample: &KinematicSample) -> Vec<f64> {
    let lo = sample.min_r();
    let hi = sample.max_r();
    let mut grid: Vec<f64> = sample
        .radii()
        .into_iter()
        .filter(|&r| r > lo && r < hi)
        .collect();
    grid.dedup();
    grid
}

/// For each candidate threshold, fit the weighted simple linear regression
/// of y on psi(r_i - rho) cos(theta_i) with intercept and record its SSE.
/// The profile minimizer (smallest radius on ties) gives the threshold
/// estimate.
pub fn sse_profile(
    sample: &KinematicSample,
    fit: &CosineFit,
    psi_kind: PsiKind,
    grid: &[f64],
) -> Result<ChangepointFit> {
    if grid.is_empty() {
        return Err(Error::BadGrid("changepoint grid must be nonempty".into()));
    }
    let recs = sample.records();
    let w: Vec<f64> = recs.iter().map(|s| fit.weight(s.sigma)).collect();
    let wsum: f64 = w.iter().sum();

    let mut kept_grid = Vec::new();
    let mut sse = Vec::new();
    let mut skipped = Vec::new();
    let mut best: Option<(f64, f64, f64, f64)> = None; // (sse, rho, beta, nu)

    for &rho in grid {
        let x: Vec<f64> = recs
            .iter()
            .map(|s| psi_kind.eval(s.r - rho) * cos_deg(s.theta))
            .collect();
        let xbar: f64 = x.iter().zip(&w).map(|(xi, wi)| xi * wi).sum::<f64>() / wsum;
        let ybar: f64 = recs
            .iter()
            .zip(&w)
            .map(|(s, wi)| s.y * wi)
            .sum::<f64>()
            / wsum;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut sx2 = 0.0;
        for i in 0..recs.len() {
            sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
            sxy += w[i] * (x[i] - xbar) * (recs[i].y - ybar);
            sx2 += w[i] * x[i] * x[i];
        }
        if sxx <= 1e-12 * (1.0 + sx2) {
            skipped.push(rho);
            continue;
        }
        let beta = sxy / sxx;
        let nu = ybar - beta * xbar;
        let s: f64 = recs
            .iter()
            .zip(&w)
            .zip(&x)
            .map(|((rec, wi), xi)| {
                let resid = rec.y - nu - beta * xi;
                wi * resid * resid
            })
            .sum();
        kept_grid.push(rho);
        sse.push(s);
        if best.map_or(true, |(bs, _, _, _)| s < bs) {
            best = Some((s, rho, beta, nu));
        }
    }
    let (_, rho_hat, beta_hat, nu_hat) = best.ok_or(Error::DegenerateRegressor)?;
    Ok(ChangepointFit {
        psi_kind,
        rho_hat,
        beta_hat,
        nu_hat,
        grid: kept_grid,
        sse,
        skipped,
    })
}

/// Sublevel set `{r : SSE_r - SSE_rho_hat <= c}` of the profile. For the
/// hinge regressor the profile is continuous, so crossings are located by
/// linear interpolation between grid points; for the indicator regressor the
/// set is a union of runs of accepted grid points.
pub fn changepoint_conf_set(profile: &ChangepointFit, chi2_quantile: f64) -> Result<IntervalSet> {
    if !(chi2_quantile >= 0.0) {
        return Err(Error::BadConfig("chi2 quantile must be nonnegative".into()));
    }
    let min_sse = profile.min_sse();
    let g: Vec<f64> = profile.sse.iter().map(|s| s - min_sse).collect();
    let r = &profile.grid;
    let c = chi2_quantile;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..r.len() {
        let inside = g[i] <= c;
        if inside && start.is_none() {
            let lo = if i == 0 || profile.psi_kind == PsiKind::Indicator {
                r[i]
            } else {
                r[i - 1] + (c - g[i - 1]) * (r[i] - r[i - 1]) / (g[i] - g[i - 1])
            };
            start = Some(lo);
        }
        if !inside {
            if let Some(lo) = start.take() {
                let hi = if profile.psi_kind == PsiKind::Indicator {
                    r[i - 1]
                } else {
                    r[i - 1] + (c - g[i - 1]) * (r[i] - r[i - 1]) / (g[i] - g[i - 1])
                };
                intervals.push((lo, hi));
            }
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, r[r.len() - 1]));
    }
    Ok(IntervalSet {
        intervals,
        level: f64::NAN,
    })
}

/// Weight function h on [0, tau] for the split-point criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightFn {
    Constant(f64),
    /// piecewise-constant density, e.g. an estimate of the radius marginal
    Step(StepFunction),
}

impl WeightFn {
    fn eval(&self, r: f64) -> f64 {
        match self {
            WeightFn::Constant(c) => *c,
            WeightFn::Step(f) => f.eval(r),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            WeightFn::Constant(_) => Vec::new(),
            WeightFn::Step(f) => f.knots().to_vec(),
        }
    }
}

/// The stump criterion as a curve, plus the exact cumulative integrals
/// needed to evaluate it (and the best level) at arbitrary radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaCurve {
    /// evaluation radii (cell boundaries plus any refinement points)
    pub r: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tau: f64,
    breaks: Vec<f64>,
    lam_cum: Vec<f64>,
    h_cum: Vec<f64>,
    i2_cum: Vec<f64>,
    lam_vals: Vec<f64>,
    h_vals: Vec<f64>,
}

fn sorted_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

impl KappaCurve {
    fn cell_index(&self, r: f64) -> usize {
        let i = self.breaks.partition_point(|&b| b <= r);
        i.saturating_sub(1).min(self.lam_vals.len() - 1)
    }

    fn big_lambda(&self, r: f64) -> f64 {
        let i = self.cell_index(r);
        self.lam_cum[i] + self.lam_vals[i] * self.h_vals[i] * (r - self.breaks[i])
    }

    fn big_h(&self, r: f64) -> f64 {
        let i = self.cell_index(r);
        self.h_cum[i] + self.h_vals[i] * (r - self.breaks[i])
    }

    fn total_i2(&self) -> f64 {
        *self.i2_cum.last().unwrap()
    }

    /// Criterion value at any r in [0, tau].
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.tau);
        let n = self.breaks.len() - 1;
        let lam_tau = self.lam_cum[n];
        let h_tau = self.h_cum[n];
        let dh = h_tau - self.big_h(r);
        if dh <= 0.0 {
            return self.total_i2();
        }
        let dl = lam_tau - self.big_lambda(r);
        self.total_i2() - dl * dl / dh
    }

    /// Best constant level for the region (r, tau]; at r = tau this is the
    /// local amplitude (the limiting ratio).
    pub fn beta_at(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.tau);
        let n = self.breaks.len() - 1;
        let dh = self.h_cum[n] - self.big_h(r);
        if dh <= 0.0 {
            return *self.lam_vals.last().unwrap();
        }
        (self.lam_cum[n] - self.big_lambda(r)) / dh
    }
}

/// Evaluate the stump criterion for a step amplitude and a piecewise
/// constant weight. All integrals are finite sums over the common cell
/// decomposition of [0, tau], so the curve is exact at every requested
/// point; `refine` adds that many extra uniform points to the output grid
/// and `extra` merges arbitrary radii into it.
pub fn kappa0(
    lambda: &StepFunction,
    h: &WeightFn,
    tau: f64,
    refine: usize,
    extra: &[f64],
) -> Result<KappaCurve> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::NonPositiveArg("tau"));
    }
    let mut breaks = vec![0.0, tau];
    breaks.extend(lambda.knots().iter().filter(|&&k| k > 0.0 && k < tau));
    breaks.extend(h.breakpoints().into_iter().filter(|&k| k > 0.0 && k < tau));
    let breaks = sorted_dedup(breaks);

    let ncells = breaks.len() - 1;
    let mut lam_vals = Vec::with_capacity(ncells);
    let mut h_vals = Vec::with_capacity(ncells);
    for i in 0..ncells {
        let mid = 0.5 * (breaks[i] + breaks[i + 1]);
        let hv = h.eval(mid);
        if !(hv > 0.0 && hv.is_finite()) {
            return Err(Error::BadWeight);
        }
        lam_vals.push(lambda.eval(mid));
        h_vals.push(hv);
    }
    let mut lam_cum = vec![0.0; ncells + 1];
    let mut h_cum = vec![0.0; ncells + 1];
    let mut i2_cum = vec![0.0; ncells + 1];
    for i in 0..ncells {
        let w = breaks[i + 1] - breaks[i];
        lam_cum[i + 1] = lam_cum[i] + lam_vals[i] * h_vals[i] * w;
        h_cum[i + 1] = h_cum[i] + h_vals[i] * w;
        i2_cum[i + 1] = i2_cum[i] + lam_vals[i] * lam_vals[i] * h_vals[i] * w;
    }

    let mut grid = breaks.clone();
    for j in 0..=refine {
        grid.push(tau * j as f64 / refine.max(1) as f64);
    }
    grid.extend(extra.iter().filter(|&&r| (0.0..=tau).contains(&r)));
    let grid = sorted_dedup(grid);

    let mut curve = KappaCurve {
        r: Vec::new(),
        kappa: Vec::new(),
        tau,
        breaks,
        lam_cum,
        h_cum,
        i2_cum,
        lam_vals,
        h_vals,
    };
    curve.kappa = grid.iter().map(|&r| curve.eval(r)).collect();
    curve.r = grid;
    Ok(curve)
}

/// The criterion for a smoothed amplitude, approximated by discretizing it
/// onto `n_cells` uniform cells (midpoint values) before the exact step
/// computation.
pub fn kappa0_smooth(
    ls: &SmoothFn,
    h: &WeightFn,
    tau: f64,
    n_cells: usize,
    refine: usize,
    extra: &[f64],
) -> Result<KappaCurve> {
    if n_cells == 0 {
        return Err(Error::NonPositiveArg("n_cells"));
    }
    let step = discretize_smooth(ls, tau, n_cells)?;
    kappa0(&step, h, tau, refine, extra)
}

fn discretize_smooth(ls: &SmoothFn, tau: f64, n_cells: usize) -> Result<StepFunction> {
    let mut knots = Vec::with_capacity(n_cells);
    let mut values = Vec::with_capacity(n_cells);
    for j in 1..=n_cells {
        let hi = tau * j as f64 / n_cells as f64;
        let mid = hi - 0.5 * tau / n_cells as f64;
        knots.push(hi);
        values.push(ls.eval(mid));
    }
    StepFunction::new(knots, values)
}

/// Best stump approximation of the amplitude under weight h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFit {
    pub gamma_hat: f64,
    pub beta_hat: f64,
    pub curve: KappaCurve,
    /// criterion rescaled to [0, 1] with value 0 at gamma_hat
    pub kappa00: Vec<f64>,
    kappa_min: f64,
    kappa_range: f64,
}

impl SplitFit {
    /// Rescaled criterion at any radius in [0, tau].
    pub fn kappa00_at(&self, r: f64) -> f64 {
        (self.curve.eval(r) - self.kappa_min) / self.kappa_range
    }
}

/// Minimize the stump criterion. The reported split point is the smallest
/// minimizing radius on the evaluation grid.
pub fn split_point(
    lambda: &StepFunction,
    h: &WeightFn,
    tau: f64,
    refine: usize,
) -> Result<SplitFit> {
    split_point_from_curve(kappa0(lambda, h, tau, refine, &[])?)
}

pub fn split_point_from_curve(curve: KappaCurve) -> Result<SplitFit> {
    let mut min_k = f64::INFINITY;
    let mut max_k = f64::NEG_INFINITY;
    let mut gamma = curve.r[0];
    for (&r, &k) in curve.r.iter().zip(&curve.kappa) {
        if k < min_k {
            min_k = k;
            gamma = r;
        }
        max_k = max_k.max(k);
    }
    let range = max_k - min_k;
    let scale = min_k.abs().max(max_k.abs()).max(1.0);
    if range <= 1e-12 * scale {
        return Err(Error::FlatKappa);
    }
    let beta_hat = curve.beta_at(gamma);
    let kappa00: Vec<f64> = curve.kappa.iter().map(|k| (k - min_k) / range).collect();
    Ok(SplitFit {
        gamma_hat: gamma,
        beta_hat,
        curve,
        kappa00,
        kappa_min: min_k,
        kappa_range: range,
    })
}

/// Bootstrap confidence set for the split point: the anchor split point is
/// recomputed from the smoothed amplitude, each replicate refit contributes
/// its rescaled criterion evaluated at that anchor, and the set collects the
/// radii whose rescaled criterion stays at or below the chosen quantile.
/// Returns the set and the quantile.
pub fn split_bootstrap_ci(
    sample: &KinematicSample,
    fit: &CosineFit,
    cfg: &BootstrapConfig,
    h: &WeightFn,
    tau: f64,
    level: f64,
) -> Result<(IntervalSet, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::BadConfig(format!("bad confidence level {level}")));
    }
    let refine = 200;
    let ls = smooth_lambda(&fit.lambda_hat, cfg.bandwidth)?;
    let smooth_split = split_point_from_curve(kappa0_smooth(&ls, h, tau, 400, refine, &[])?)?;
    let gamma_s = smooth_split.gamma_hat;

    let opts = FitOptions {
        spike_window: fit.spike_window,
        ..FitOptions::default()
    };
    let mut stats = Vec::with_capacity(cfg.n_boot);
    for k in 0..cfg.n_boot {
        let rep = bootstrap_resample(sample, fit, cfg, k)?;
        let refit = fit_cosine_model(&rep, &opts)?;
        // A replicate whose refitted amplitude is flat carries no split
        // information; drop it rather than abort the whole interval.
        match split_point_from_curve(kappa0(&refit.lambda_hat, h, tau, refine, &[gamma_s])?) {
            Ok(split) => stats.push(split.kappa00_at(gamma_s)),
            Err(Error::FlatKappa) => continue,
            Err(e) => return Err(e),
        }
    }
    if stats.is_empty() {
        return Err(Error::FlatKappa);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = empirical_quantile(&stats, level);

    let data_split = split_point_from_curve(kappa0(&fit.lambda_hat, h, tau, refine, &[])?)?;
    let set = sublevel_set(&data_split, q, level);
    Ok((set, q))
}

/// `{r : kappa00(r) <= q}` with bisection-refined boundaries.
fn sublevel_set(split: &SplitFit, q: f64, level: f64) -> IntervalSet {
    let grid = &split.curve.r;
    let tol = 1e-6 * split.curve.tau.max(1.0);
    let refine = |mut a: f64, mut b: f64| -> f64 {
        // a inside (<= q), b outside
        while (b - a).abs() > tol {
            let mid = 0.5 * (a + b);
            if split.kappa00_at(mid) <= q {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..grid.len() {
        let inside = split.kappa00[i] <= q;
        if inside && start.is_none() {
            start = Some(if i == 0 {
                grid[0]
            } else {
                refine(grid[i], grid[i - 1])
            });
        }
        if !inside {
            if let Some(lo) = start.take() {
                intervals.push((lo, refine(grid[i - 1], grid[i])));
            }
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, grid[grid.len() - 1]));
    }
    IntervalSet { intervals, level }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_and_order, StarRecord};

    fn sample(rows: &[(f64, f64, f64, f64)]) -> KinematicSample {
        let recs: Vec<StarRecord> = rows
            .iter()
            .map(|&(r, th, y, s)| StarRecord::new(r, th, y, s))
            .collect();
        validate_and_order(&recs).unwrap()
    }

    fn hinge_rows(nu: f64, beta: f64, rho: f64, n: usize) -> Vec<(f64, f64, f64, f64)> {
        (0..n)
            .map(|i| {
                let r = 20.0 + 900.0 * i as f64 / n as f64;
                let theta = [0.0, 60.0, 180.0, -120.0][i % 4];
                let y = nu + beta * (r - rho).max(0.0) * cos_deg(theta);
                (r, theta, y, 0.5)
            })
            .collect()
    }

    fn fit_of(s: &KinematicSample) -> CosineFit {
        fit_cosine_model(s, &FitOptions::default()).unwrap()
    }

    #[test]
    fn hinge_profile_recovers_exact_model() {
        let rho = 420.0;
        let s = sample(&hinge_rows(100.0, 0.05, rho, 60));
        let fit = fit_of(&s);
        let mut grid = default_rho_grid(&s);
        grid.push(rho);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let prof = sse_profile(&s, &fit, PsiKind::Hinge, &grid).unwrap();
        assert!((prof.rho_hat - rho).abs() < 1e-9);
        assert!(prof.min_sse() < 1e-12);
        assert!((prof.beta_hat - 0.05).abs() < 1e-9);
        assert!((prof.nu_hat - 100.0).abs() < 1e-9);
    }

    #[test]
    fn flat_model_gives_constant_profile() {
        let s = sample(&hinge_rows(100.0, 0.0, 400.0, 40));
        let fit = fit_of(&s);
        let grid = default_rho_grid(&s);
        let prof = sse_profile(&s, &fit, PsiKind::Hinge, &grid).unwrap();
        assert!(prof.sse.iter().all(|&v| v < 1e-14));
        assert!(prof.beta_hat.abs() < 1e-9);
    }

    #[test]
    fn indicator_regressor_degenerate_beyond_data() {
        let s = sample(&hinge_rows(100.0, 0.05, 400.0, 20));
        let fit = fit_of(&s);
        let max_r = s.max_r();
        let prof = sse_profile(&s, &fit, PsiKind::Indicator, &[300.0, max_r + 1.0]).unwrap();
        assert_eq!(prof.skipped, vec![max_r + 1.0]);
        assert_eq!(prof.grid, vec![300.0]);
        assert!(matches!(
            sse_profile(&s, &fit, PsiKind::Indicator, &[max_r + 1.0]),
            Err(Error::DegenerateRegressor)
        ));
    }

    #[test]
    fn conf_set_huge_c_is_full_grid_range() {
        let s = sample(&hinge_rows(100.0, 0.05, 400.0, 40));
        let fit = fit_of(&s);
        let grid = default_rho_grid(&s);
        let prof = sse_profile(&s, &fit, PsiKind::Hinge, &grid).unwrap();
        let set = changepoint_conf_set(&prof, 1e15).unwrap();
        assert_eq!(
            set.intervals,
            vec![(prof.grid[0], prof.grid[prof.grid.len() - 1])]
        );
    }

    #[test]
    fn conf_set_monotone_in_c() {
        let mut rows = hinge_rows(100.0, 0.05, 400.0, 60);
        // perturb responses deterministically so the profile is non-trivial
        for (i, row) in rows.iter_mut().enumerate() {
            row.2 += 0.3 * ((i * 7 % 11) as f64 - 5.0) / 5.0;
        }
        let s = sample(&rows);
        let fit = fit_of(&s);
        let grid = default_rho_grid(&s);
        let prof = sse_profile(&s, &fit, PsiKind::Hinge, &grid).unwrap();
        let small = changepoint_conf_set(&prof, 1.0).unwrap();
        let large = changepoint_conf_set(&prof, 4.0).unwrap();
        assert!(small.contains(prof.rho_hat) && large.contains(prof.rho_hat));
        for &(l, u) in &small.intervals {
            for t in 0..=4 {
                assert!(large.contains(l + (u - l) * t as f64 / 4.0));
            }
        }
    }

    #[test]
    fn kappa_zero_amplitude_is_flat() {
        let lam = StepFunction::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let curve = kappa0(&lam, &WeightFn::Constant(1.0), 2.0, 10, &[]).unwrap();
        assert!(curve.kappa.iter().all(|&k| k.abs() < 1e-14));
        assert!(matches!(
            split_point_from_curve(curve),
            Err(Error::FlatKappa)
        ));
    }

    #[test]
    fn step_amplitude_closed_form() {
        // lambda = b0 on (g0, tau]: minimizer exactly g0, level exactly b0
        let (b0, g0, tau) = (3.0, 0.4, 1.0);
        let lam = StepFunction::new(vec![g0, tau], vec![0.0, b0]).unwrap();
        let split = split_point(&lam, &WeightFn::Constant(1.0), tau, 50, ).unwrap();
        assert_eq!(split.gamma_hat, g0);
        assert!((split.beta_hat - b0).abs() < 1e-12);
        // criterion differences match the closed form (offsets cancel):
        // below g0 the ratio term is b0^2 (tau-g0)^2/(tau-r)
        let c = &split.curve;
        let total = b0 * b0 * (tau - g0);
        for &r in &[0.1, 0.25, 0.4] {
            let expect = total - b0 * b0 * (tau - g0) * (tau - g0) / (tau - r);
            assert!((c.eval(r) - expect).abs() < 1e-12, "r = {r}");
        }
        for &r in &[0.5, 0.8] {
            let expect = total - b0 * b0 * (tau - r);
            assert!((c.eval(r) - expect).abs() < 1e-12, "r = {r}");
        }
        // rescaled criterion hits 0 at the split and 1 at its max
        assert_eq!(split.kappa00_at(split.gamma_hat), 0.0);
        let max = split.kappa00.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        assert!(split.kappa00.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn linear_amplitude_calculus_example() {
        // lambda(r) = r on [0,1], unit weight: split at 1/3, level 2/3
        let n = 4000;
        let knots: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
        let values: Vec<f64> = knots.iter().map(|&k| k - 0.5 / n as f64).collect();
        let lam = StepFunction::new(knots, values).unwrap();
        let split = split_point(&lam, &WeightFn::Constant(1.0), 1.0, 2000).unwrap();
        assert!((split.gamma_hat - 1.0 / 3.0).abs() < 1e-3, "{}", split.gamma_hat);
        assert!((split.beta_hat - 2.0 / 3.0).abs() < 1e-3, "{}", split.beta_hat);
        // interior optimum: the local amplitude is half the best level
        assert!((lam.eval(split.gamma_hat) - split.beta_hat / 2.0).abs() < 1e-3);
    }

    #[test]
    fn split_point_dominates_threshold() {
        // amplitude 0 through rho, positive after: the split sits at or
        // beyond the threshold
        for &(rho, tau) in &[(0.3, 1.0), (0.6, 1.5)] {
            let lam = StepFunction::new(
                vec![rho, 0.5 * (rho + tau), tau],
                vec![0.0, 1.0, 2.5],
            )
            .unwrap();
            let split = split_point(&lam, &WeightFn::Constant(1.0), tau, 300).unwrap();
            assert!(split.gamma_hat >= rho - 1e-12);
        }
    }

    #[test]
    fn step_weight_function_supported() {
        let lam = StepFunction::new(vec![0.4, 1.0], vec![0.0, 3.0]).unwrap();
        let h = WeightFn::Step(StepFunction::new(vec![0.5, 1.0], vec![1.0, 2.0]).unwrap());
        let split = split_point(&lam, &h, 1.0, 100).unwrap();
        assert_eq!(split.gamma_hat, 0.4);
        // Lambda(tau)-Lambda(0.4) = 3*(1*0.1 + 2*0.5) = 3.3; H diff = 1.1
        assert!((split.beta_hat - 3.0).abs() < 1e-12);
        let bad = WeightFn::Step(StepFunction::new(vec![0.5, 1.0], vec![0.0, 2.0]).unwrap());
        assert!(matches!(
            kappa0(&lam, &bad, 1.0, 10, &[]),
            Err(Error::BadWeight)
        ));
    }

    #[test]
    fn bootstrap_set_contains_split_point() {
        let cfg_model = crate::model::SynthConfig::survey_like(
            60,
            crate::model::LambdaSpec::Step {
                beta: 6.0,
                rho: 350.0,
            },
            14,
        );
        let s = crate::model::generate_synthetic(&cfg_model).unwrap();
        let fit = fit_of(&s);
        let tau = s.max_r();
        let cfg = BootstrapConfig::new(15, 5);
        let (set, q) = split_bootstrap_ci(&s, &fit, &cfg, &WeightFn::Constant(1.0), tau, 0.9)
            .unwrap();
        assert!(q >= 0.0);
        let data_split = split_point(&fit.lambda_hat, &WeightFn::Constant(1.0), tau, 200).unwrap();
        assert!(set.contains(data_split.gamma_hat));
    }
}
