//! Kernel smoothing of a step function in log radius.
//!
//! The step function is convolved with a Gaussian kernel on the log-radius
//! scale; because the input is piecewise constant the convolution is a
//! finite sum of step values weighted by normal-CDF differences at the
//! transformed knot boundaries.

use crate::error::{Error, Result};
use crate::step::StepFunction;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gaussian-smoothed step function on the log-radius scale.
#[derive(Debug, Clone)]
pub struct SmoothFn {
    log_knots: Vec<f64>,
    values: Vec<f64>,
    bandwidth: f64,
}

/// Smooth `lambda` with bandwidth `b` (log-radius units). All knots must be
/// positive. The result is nondecreasing and nonnegative whenever the input
/// is, and holds the first/last step value outside the knot range.
pub fn smooth_lambda(lambda: &StepFunction, b: f64) -> Result<SmoothFn> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::BadConfig("bandwidth must be positive".into()));
    }
    if lambda.knots().iter().any(|&k| k <= 0.0) {
        return Err(Error::NonPositiveKnot);
    }
    Ok(SmoothFn {
        log_knots: lambda.knots().iter().map(|k| k.ln()).collect(),
        values: lambda.values().to_vec(),
        bandwidth: b,
    })
}

impl SmoothFn {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Value at radius `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let t = r.ln();
        let b = self.bandwidth;
        let k = self.values.len();
        // value v_1 on (-inf, u_1], v_j on (u_{j-1}, u_j], v_k on (u_k, inf)
        let mut acc = self.values[0] * normal_cdf((self.log_knots[0] - t) / b);
        for j in 1..k {
            let hi = normal_cdf((self.log_knots[j] - t) / b);
            let lo = normal_cdf((self.log_knots[j - 1] - t) / b);
            acc += self.values[j] * (hi - lo);
        }
        acc += self.values[k - 1] * (1.0 - normal_cdf((self.log_knots[k - 1] - t) / b));
        acc
    }

    /// Derivative with respect to radius.
    pub fn deriv(&self, r: f64) -> f64 {
        let t = r.ln();
        let b = self.bandwidth;
        let k = self.values.len();
        // d/dt of the CDF sum, then the chain rule dt/dr = 1/r
        let mut acc = -self.values[0] * normal_pdf((self.log_knots[0] - t) / b) / b;
        for j in 1..k {
            let hi = normal_pdf((self.log_knots[j] - t) / b);
            let lo = normal_pdf((self.log_knots[j - 1] - t) / b);
            acc += -self.values[j] * (hi - lo) / b;
        }
        acc += self.values[k - 1] * normal_pdf((self.log_knots[k - 1] - t) / b) / b;
        acc / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_fixed_point() {
        let f = StepFunction::new(vec![1.0, 2.0, 3.0], vec![4.0, 4.0, 4.0]).unwrap();
        for &b in &[0.05, 0.1, 1.0] {
            let s = smooth_lambda(&f, b).unwrap();
            for &r in &[0.5, 1.0, 2.2, 10.0] {
                assert!((s.eval(r) - 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_step_symmetry() {
        // 0 below e, 1 above: smoothed value at the jump is 1/2
        let e = std::f64::consts::E;
        let f = StepFunction::new(vec![e, 1e6], vec![0.0, 1.0]).unwrap();
        let s = smooth_lambda(&f, 0.1).unwrap();
        assert!((s.eval(e) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_to_zero_recovers_step() {
        let f = StepFunction::new(vec![1.0, 2.0, 4.0], vec![0.0, 1.5, 3.0]).unwrap();
        let s = smooth_lambda(&f, 1e-4).unwrap();
        for &r in &[0.5, 1.5, 3.0, 5.0] {
            assert!((s.eval(r) - f.eval(r)).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn monotone_and_nonnegative() {
        let f = StepFunction::new(vec![1.0, 2.0, 4.0, 9.0], vec![0.0, 0.5, 0.5, 6.0]).unwrap();
        let s = smooth_lambda(&f, 0.1).unwrap();
        let mut prev = -1.0;
        for i in 0..200 {
            let r = 0.2 + i as f64 * 0.1;
            let v = s.eval(r);
            assert!(v >= -1e-12);
            assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = StepFunction::new(vec![1.0, 2.0, 4.0], vec![0.0, 1.5, 3.0]).unwrap();
        let s = smooth_lambda(&f, 0.2).unwrap();
        for &r in &[1.1, 2.0, 3.7] {
            let h = 1e-6 * r;
            let fd = (s.eval(r + h) - s.eval(r - h)) / (2.0 * h);
            assert!((s.deriv(r) - fd).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_nonpositive_knots() {
        let f = StepFunction::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(smooth_lambda(&f, 0.1), Err(Error::NonPositiveKnot)));
    }
}
