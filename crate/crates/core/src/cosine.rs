//! Joint estimation of (nu, sigma^2, lambda) in the monotone cosine model,
//! and the pinned (value-constrained) fit used by the SSE-difference
//! confidence sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::{slopes_from_points, CusumDiagram};
use crate::model::{cos_deg, KinematicSample};
use crate::step::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// convergence tolerance for max absolute change in (nu, sigma^2, lambda)
    pub tol: f64,
    pub max_iter: usize,
    /// trailing values averaged when truncating the last lambda value
    pub spike_window: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-8,
            max_iter: 100,
            spike_window: 13,
        }
    }
}

/// Joint estimate of the cosine model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub nu_hat: f64,
    pub sigma2_hat: f64,
    /// truncated monotone estimate
    pub lambda_hat: StepFunction,
    /// untruncated monotone estimate
    pub lambda_raw: StepFunction,
    pub iterations: usize,
    pub converged: bool,
    pub spike_window: usize,
    /// sigma^2 update went negative and was floored at 0 at convergence
    pub variance_floored: bool,
}

impl CosineFit {
    /// Precision weight 1/(sigma2_hat + sigma_i^2) for one star.
    pub fn weight(&self, sigma_i: f64) -> f64 {
        1.0 / (self.sigma2_hat + sigma_i * sigma_i)
    }
}

struct Design {
    r: Vec<f64>,
    cos: Vec<f64>,
    y: Vec<f64>,
    sigma2: Vec<f64>,
}

impl Design {
    fn new(sample: &KinematicSample) -> Self {
        let n = sample.len();
        let mut d = Design {
            r: Vec::with_capacity(n),
            cos: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            sigma2: Vec::with_capacity(n),
        };
        for s in sample.records() {
            d.r.push(s.r);
            d.cos.push(cos_deg(s.theta));
            d.y.push(s.y);
            d.sigma2.push(s.sigma * s.sigma);
        }
        d
    }

    fn n(&self) -> usize {
        self.r.len()
    }

    fn weights(&self, sigma2: f64) -> Vec<f64> {
        self.sigma2.iter().map(|s2| 1.0 / (sigma2 + s2)).collect()
    }

    /// Weighted mean of y_i - lambda_i cos(theta_i).
    fn nu_update(&self, lambda: &[f64], w: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.n() {
            num += w[i] * (self.y[i] - lambda[i] * self.cos[i]);
            den += w[i];
        }
        num / den
    }

    /// Mean of squared residuals minus measurement variances, floored at 0.
    fn sigma2_update(&self, nu: f64, lambda: &[f64]) -> (f64, bool) {
        let mut acc = 0.0;
        for i in 0..self.n() {
            let resid = self.y[i] - nu - lambda[i] * self.cos[i];
            acc += resid * resid - self.sigma2[i];
        }
        let raw = acc / self.n() as f64;
        (raw.max(0.0), raw < 0.0)
    }

    /// Cumulative diagram with increments (w cos^2, w cos (y - nu)).
    fn diagram(&self, nu: f64, w: &[f64]) -> CusumDiagram {
        let dx: Vec<f64> = (0..self.n()).map(|i| w[i] * self.cos[i] * self.cos[i]).collect();
        let dy: Vec<f64> = (0..self.n())
            .map(|i| w[i] * self.cos[i] * (self.y[i] - nu))
            .collect();
        CusumDiagram::from_increments(&dx, &dy).expect("finite design")
    }

    fn sse(&self, nu: f64, lambda: &[f64], w: &[f64]) -> f64 {
        (0..self.n())
            .map(|i| {
                let resid = self.y[i] - nu - lambda[i] * self.cos[i];
                w[i] * resid * resid
            })
            .sum()
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Collapse per-index fitted values to a step function over distinct radii.
/// Ties in r take the value at the last tied index (the largest, preserving
/// monotone steps).
fn step_from_indexed(r: &[f64], values: &[f64]) -> StepFunction {
    let mut knots = Vec::new();
    let mut vals = Vec::new();
    for i in 0..r.len() {
        if i + 1 < r.len() && r[i + 1] == r[i] {
            continue;
        }
        knots.push(r[i]);
        vals.push(values[i]);
    }
    StepFunction::new(knots, vals).expect("distinct ascending radii")
}

/// Monotone nonnegative slopes of the diagram, optionally pinned so that the
/// fit is capped at `xi0` through sample index `m` (1-based) and floored at
/// `xi0` beyond it.
fn lambda_from_diagram(diagram: &CusumDiagram, pin: Option<(usize, f64)>) -> Vec<f64> {
    let xs = diagram.abscissae();
    let ys = diagram.ordinates();
    match pin {
        None => {
            let raw = slopes_from_points(xs, ys);
            raw.into_iter().map(|v| v.max(0.0)).collect()
        }
        Some((m, xi0)) => {
            let mut out = Vec::with_capacity(diagram.n());
            if m > 0 {
                let left = slopes_from_points(&xs[..=m], &ys[..=m]);
                out.extend(left.into_iter().map(|v| v.min(xi0).max(0.0)));
            }
            if m < diagram.n() {
                let right = slopes_from_points(&xs[m..], &ys[m..]);
                out.extend(right.into_iter().map(|v| v.max(xi0).max(0.0)));
            }
            out
        }
    }
}

/// Fit the cosine model: iterate the nu, lambda, and sigma^2 updates to a
/// fixed point, then truncate the last lambda value by trailing-window
/// averaging. Reports the last iterate with `converged = false` when the
/// iteration cap is hit.
pub fn fit_cosine_model(sample: &KinematicSample, opts: &FitOptions) -> Result<CosineFit> {
    if opts.spike_window == 0 || opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(Error::BadConfig("fit options must be positive".into()));
    }
    let d = Design::new(sample);
    let n = d.n();

    let mean_y: f64 = d.y.iter().sum::<f64>() / n as f64;
    let var_y: f64 = d.y.iter().map(|y| (y - mean_y).powi(2)).sum::<f64>() / n as f64;
    let mut nu = mean_y;
    let mut sigma2 = var_y;
    let mut lambda = vec![0.0; n];
    let mut floored = false;

    let mut converged = false;
    let mut iterations = opts.max_iter;
    for it in 1..=opts.max_iter {
        let w = d.weights(sigma2);
        let nu_next = d.nu_update(&lambda, &w);
        let lambda_next = lambda_from_diagram(&d.diagram(nu_next, &w), None);
        let (sigma2_next, fl) = d.sigma2_update(nu_next, &lambda_next);
        let delta = (nu_next - nu)
            .abs()
            .max((sigma2_next - sigma2).abs())
            .max(max_abs_diff(&lambda_next, &lambda));
        nu = nu_next;
        sigma2 = sigma2_next;
        lambda = lambda_next;
        floored = fl;
        if delta < opts.tol {
            converged = true;
            iterations = it;
            break;
        }
    }

    let lambda_raw = step_from_indexed(&d.r, &lambda);
    let mut lambda_hat = lambda_raw.clone();
    let window = opts.spike_window.min(n);
    let mean_tail: f64 = lambda[n - window..].iter().sum::<f64>() / window as f64;
    let truncated = if lambda_hat.len() >= 2 {
        mean_tail.max(lambda_hat.values()[lambda_hat.len() - 2])
    } else {
        mean_tail
    };
    lambda_hat.set_last_value(truncated);

    Ok(CosineFit {
        nu_hat: nu,
        sigma2_hat: sigma2,
        lambda_hat,
        lambda_raw,
        iterations,
        converged,
        spike_window: opts.spike_window,
        variance_floored: floored,
    })
}

/// Fit with the dispersion frozen at a supplied value instead of updated;
/// truncation is applied exactly as in `fit_cosine_model`.
pub fn fit_cosine_model_frozen(
    sample: &KinematicSample,
    sigma2: f64,
    opts: &FitOptions,
) -> Result<CosineFit> {
    if opts.spike_window == 0 || opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(Error::BadConfig("fit options must be positive".into()));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::BadConfig("frozen dispersion must be finite and nonnegative".into()));
    }
    let d = Design::new(sample);
    let n = d.n();
    let (lambda, nu, _) = fit_fixed_sigma(&d, sigma2, None, opts.tol, opts.max_iter);
    let lambda_raw = step_from_indexed(&d.r, &lambda);
    let mut lambda_hat = lambda_raw.clone();
    let window = opts.spike_window.min(n);
    let mean_tail: f64 = lambda[n - window..].iter().sum::<f64>() / window as f64;
    let truncated = if lambda_hat.len() >= 2 {
        mean_tail.max(lambda_hat.values()[lambda_hat.len() - 2])
    } else {
        mean_tail
    };
    lambda_hat.set_last_value(truncated);
    Ok(CosineFit {
        nu_hat: nu,
        sigma2_hat: sigma2,
        lambda_hat,
        lambda_raw,
        iterations: opts.max_iter,
        converged: true,
        spike_window: opts.spike_window,
        variance_floored: false,
    })
}

/// Fit lambda and nu with sigma^2 held fixed, optionally under the pin
/// `u(r0) = xi0`. Returns per-index lambda values, nu, and the weighted SSE.
fn fit_fixed_sigma(
    d: &Design,
    sigma2: f64,
    pin: Option<(f64, f64)>, // (r0, xi0)
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, f64) {
    let w = d.weights(sigma2);
    let pin_index = pin.map(|(r0, xi0)| {
        let m = d.r.partition_point(|&r| r <= r0);
        (m, xi0)
    });
    let mut nu = {
        let wsum: f64 = w.iter().sum();
        d.y.iter().zip(&w).map(|(y, wi)| y * wi).sum::<f64>() / wsum
    };
    let mut lambda = vec![0.0; d.n()];
    for _ in 0..max_iter {
        let lambda_next = lambda_from_diagram(&d.diagram(nu, &w), pin_index);
        let nu_next = d.nu_update(&lambda_next, &w);
        let delta = (nu_next - nu).abs().max(max_abs_diff(&lambda_next, &lambda));
        nu = nu_next;
        lambda = lambda_next;
        if delta < tol {
            break;
        }
    }
    let sse = d.sse(nu, &lambda, &w);
    (lambda, nu, sse)
}

/// Constrained fit with `u(r0) = xi0`, nu re-optimized, sigma^2 fixed at the
/// supplied value (the caller passes sigma2_hat from the unconstrained fit).
pub fn fit_pinned(
    sample: &KinematicSample,
    r0: f64,
    xi0: f64,
    sigma2: f64,
) -> Result<(StepFunction, f64, f64)> {
    if xi0 < 0.0 || !xi0.is_finite() {
        return Err(Error::BadPin(format!("xi0 must be finite and nonnegative, got {xi0}")));
    }
    if !(sample.min_r()..=sample.max_r()).contains(&r0) {
        return Err(Error::BadPin(format!(
            "r0 = {r0} outside the data range [{}, {}]",
            sample.min_r(),
            sample.max_r()
        )));
    }
    let d = Design::new(sample);
    let (lambda, nu, sse) = fit_fixed_sigma(&d, sigma2, Some((r0, xi0)), 1e-10, 500);
    Ok((step_from_indexed(&d.r, &lambda), nu, sse))
}

/// Unconstrained SSE at fixed sigma^2, on the same numerical footing as
/// `fit_pinned` (used to form nonnegative SSE differences).
pub fn free_sse(sample: &KinematicSample, sigma2: f64) -> (StepFunction, f64, f64) {
    let d = Design::new(sample);
    let (lambda, nu, sse) = fit_fixed_sigma(&d, sigma2, None, 1e-10, 500);
    (step_from_indexed(&d.r, &lambda), nu, sse)
}
