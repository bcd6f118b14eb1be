//! Shared helpers for the integration suite: slow reference implementations
//! and small nonparametric-test utilities. Everything here is written for
//! clarity, not speed, so failures point at the library rather than the
//! oracle.

// each integration-test binary uses a different subset of these helpers
#![allow(dead_code)]

/// Exact monotone-cone projection by exhaustive block enumeration.
///
/// The minimizer of `sum w_i (z_i - u_i)^2` over nondecreasing `u` is
/// piecewise constant on a partition into blocks, each at its weighted mean,
/// with nondecreasing block means. Enumerating all `2^(n-1)` partitions and
/// keeping the feasible one with smallest SSE therefore recovers the exact
/// solution. All weights must be positive. Only practical for small n.
pub fn brute_force_isotonic(z: &[f64], w: &[f64]) -> Vec<f64> {
    let n = z.len();
    assert!(n >= 1 && n <= 16, "oracle is exponential in n");
    assert!(w.iter().all(|&v| v > 0.0), "oracle needs positive weights");
    let mut best_sse = f64::INFINITY;
    let mut best = vec![0.0; n];
    // bit i of `cuts` set => a block boundary between positions i and i+1
    for cuts in 0u32..(1 << (n - 1)) {
        let mut u = vec![0.0; n];
        let mut start = 0;
        let mut prev_mean = f64::NEG_INFINITY;
        let mut feasible = true;
        for end in 0..n {
            let boundary = end == n - 1 || (cuts >> end) & 1 == 1;
            if !boundary {
                continue;
            }
            let sw: f64 = w[start..=end].iter().sum();
            let swz: f64 = z[start..=end]
                .iter()
                .zip(&w[start..=end])
                .map(|(zi, wi)| zi * wi)
                .sum();
            let mean = swz / sw;
            if mean < prev_mean {
                feasible = false;
                break;
            }
            for v in &mut u[start..=end] {
                *v = mean;
            }
            prev_mean = mean;
            start = end + 1;
        }
        if !feasible {
            continue;
        }
        let sse: f64 = z
            .iter()
            .zip(w)
            .zip(&u)
            .map(|((zi, wi), ui)| wi * (zi - ui) * (zi - ui))
            .sum();
        if sse < best_sse {
            best_sse = sse;
            best = u;
        }
    }
    best
}

/// Literal max-min formula for weighted isotonic regression:
/// `u_i = max_{s<=i} min_{t>=i} (sum_{j=s..t} w_j z_j) / (sum_{j=s..t} w_j)`.
/// Cubic time; positive weights required.
pub fn max_min_isotonic(z: &[f64], w: &[f64]) -> Vec<f64> {
    let n = z.len();
    assert!(w.iter().all(|&v| v > 0.0), "oracle needs positive weights");
    // prefix sums: sw[k] = sum of w[..k], swz[k] = sum of w*z over [..k]
    let mut sw = vec![0.0; n + 1];
    let mut swz = vec![0.0; n + 1];
    for j in 0..n {
        sw[j + 1] = sw[j] + w[j];
        swz[j + 1] = swz[j] + w[j] * z[j];
    }
    (0..n)
        .map(|i| {
            let mut outer = f64::NEG_INFINITY;
            for s in 0..=i {
                let mut inner = f64::INFINITY;
                for t in i..n {
                    inner = inner.min((swz[t + 1] - swz[s]) / (sw[t + 1] - sw[s]));
                }
                outer = outer.max(inner);
            }
            outer
        })
        .collect()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// One-sample KS statistic against the uniform distribution on [0, 1].
pub fn ks_uniform(p: &[f64]) -> f64 {
    let mut p = p.to_vec();
    p.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = (x - i as f64 / n).abs();
            let hi = ((i + 1) as f64 / n - x).abs();
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample skewness (biased central-moment ratio; fine at MC sample sizes).
pub fn skewness(v: &[f64]) -> f64 {
    let m = mean(v);
    let n = v.len() as f64;
    let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Print one verdict line per criterion, then enforce it.
pub fn check(name: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}
