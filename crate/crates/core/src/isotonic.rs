//! Weighted isotonic regression via greatest convex minorants of
//! cumulative-sum diagrams.

use crate::error::{Error, Result};

/// Cumulative-sum diagram: abscissae are running weight totals, ordinates
/// running weighted response totals, both starting at (0, 0). Point `k` of
/// the diagram corresponds to sample index `k` (1-based); index 0 is the
/// origin.
#[derive(Debug, Clone)]
pub struct CusumDiagram {
    abscissae: Vec<f64>,
    ordinates: Vec<f64>,
}

impl CusumDiagram {
    /// Build from per-point increments `(dx_k, dy_k)`.
    pub fn from_increments(dx: &[f64], dy: &[f64]) -> Result<Self> {
        if dx.len() != dy.len() || dx.is_empty() {
            return Err(Error::BadConfig("diagram increments must be nonempty and equal length".into()));
        }
        if dx.iter().any(|v| !v.is_finite() || *v < 0.0) || dy.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadConfig("diagram increments must be finite with dx >= 0".into()));
        }
        let mut abscissae = Vec::with_capacity(dx.len() + 1);
        let mut ordinates = Vec::with_capacity(dx.len() + 1);
        abscissae.push(0.0);
        ordinates.push(0.0);
        let (mut x, mut y) = (0.0, 0.0);
        for (a, b) in dx.iter().zip(dy) {
            x += a;
            y += b;
            abscissae.push(x);
            ordinates.push(y);
        }
        Ok(CusumDiagram { abscissae, ordinates })
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    /// Number of sample points (diagram length minus the origin).
    pub fn n(&self) -> usize {
        self.abscissae.len() - 1
    }
}

/// Lower convex hull of the points `(xs[i], ys[i])`, `xs` nondecreasing.
/// Returns the hull vertex indices, which always include the first and last
/// point position in x. Points sharing an abscissa are collapsed to the one
/// with the smallest ordinate.
fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        if let Some(&top) = hull.last() {
            if xs[i] == xs[top] {
                if ys[i] < ys[top] {
                    hull.pop();
                } else {
                    continue;
                }
            }
        }
        while hull.len() >= 2 {
            let b = hull[hull.len() - 1];
            let a = hull[hull.len() - 2];
            // pop b if it lies on or above chord a->i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Left-hand slopes of the GCM of the diagram at each abscissa T_k, k=1..n.
///
/// The slope for point `k` is the hull-segment slope over the increment
/// `(T_{k-1}, T_k]`. Points with a zero abscissa increment take the slope of
/// the next positive increment (the running slope at that abscissa), which
/// matches the max-min formula's convention there; trailing zero increments
/// take the last slope. Output is nondecreasing.
pub fn gcm_left_slopes(diagram: &CusumDiagram) -> Vec<f64> {
    slopes_from_points(&diagram.abscissae, &diagram.ordinates)
}

/// Per-increment GCM slopes for arbitrary diagram points (first point is the
/// base; output has `xs.len() - 1` entries, one per increment).
pub(crate) fn slopes_from_points(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len() - 1;
    let mut out = vec![f64::NAN; n];
    if n == 0 {
        return out;
    }
    if xs[n] == xs[0] {
        // fully degenerate diagram: no information, flat fit at 0
        return vec![0.0; n];
    }
    let hull = lower_hull(xs, ys);
    // walk hull segments, assigning the segment slope to the increments it covers
    let mut seg = 0usize; // current segment is hull[seg] -> hull[seg+1]
    for k in 1..=n {
        if xs[k] == xs[k - 1] {
            continue; // filled in the backward pass
        }
        while seg + 1 < hull.len() && xs[hull[seg + 1]] < xs[k] {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[seg + 1]);
        out[k - 1] = (ys[b] - ys[a]) / (xs[b] - xs[a]);
    }
    // zero-increment points inherit the next assigned slope; trailing ones the last
    let mut next = f64::NAN;
    for k in (0..n).rev() {
        if out[k].is_nan() {
            out[k] = next;
        } else {
            next = out[k];
        }
    }
    let mut prev = f64::NAN;
    for v in out.iter_mut() {
        if v.is_nan() {
            *v = prev;
        } else {
            prev = *v;
        }
    }
    out
}

/// Values of the GCM itself at every diagram abscissa.
pub(crate) fn gcm_values(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let hull = lower_hull(xs, ys);
    let mut out = vec![0.0; xs.len()];
    let mut seg = 0usize;
    for i in 0..xs.len() {
        while seg + 1 < hull.len() && xs[hull[seg + 1]] < xs[i] {
            seg += 1;
        }
        let a = hull[seg];
        if seg + 1 < hull.len() {
            let b = hull[seg + 1];
            if xs[b] == xs[a] {
                out[i] = ys[a].min(ys[b]);
            } else {
                let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
                out[i] = ys[a] + t * (ys[b] - ys[a]);
            }
        } else {
            out[i] = ys[a];
        }
    }
    out
}

/// Weighted isotonic regression: the nondecreasing `u` minimizing
/// `sum w_i (z_i - u_i)^2`. Zero weights are allowed; those points take the
/// running fitted value. Equals the GCM slopes of the diagram built from
/// increments `(w_i, w_i z_i)`, and the max-min formula.
pub fn weighted_isotonic(z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if z.len() != w.len() || z.is_empty() {
        return Err(Error::BadConfig("isotonic inputs must be nonempty and equal length".into()));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::BadConfig("weights must be finite and nonnegative".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadConfig("responses must be finite".into()));
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let dy: Vec<f64> = z.iter().zip(w).map(|(zi, wi)| zi * wi).collect();
    let diagram = CusumDiagram::from_increments(w, &dy)?;
    Ok(gcm_left_slopes(&diagram))
}
