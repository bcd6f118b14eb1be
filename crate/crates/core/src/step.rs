//! Left-continuous piecewise-constant functions on radius.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A left-continuous step function: the value on `(knots[k-1], knots[k]]` is
/// `values[k]`, the value at or below the first knot is `values[0]`, and the
/// value beyond the last knot is the last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::BadConfig(
                "step function needs one value per knot and at least one knot".into(),
            ));
        }
        if knots.iter().any(|k| !k.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadConfig("step function entries must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadConfig("step function knots must be strictly ascending".into()));
        }
        Ok(StepFunction { knots, values })
    }

    /// Constant function with a single knot.
    pub fn constant(knot: f64, value: f64) -> Self {
        StepFunction {
            knots: vec![knot],
            values: vec![value],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Evaluate at `r`. Evaluation at a knot returns that knot's value.
    pub fn eval(&self, r: f64) -> f64 {
        // first knot with knots[k] >= r
        match self.knots.partition_point(|&k| k < r) {
            i if i >= self.knots.len() => *self.values.last().unwrap(),
            i => self.values[i],
        }
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Replace the value at the last knot.
    pub(crate) fn set_last_value(&mut self, v: f64) {
        *self.values.last_mut().unwrap() = v;
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// CSV serialization: `knot,value` rows with a header. Floats use the
    /// shortest round-trip representation so decode(encode(f)) is bit-exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (k, v) in self.knots.iter().zip(&self.values) {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "r,value" => {}
            _ => return Err(Error::Schema("expected header `r,value`".into())),
        }
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let parse = |s: Option<&str>, col: &str| -> Result<f64> {
                s.and_then(|t| t.trim().parse::<f64>().ok()).ok_or(Error::Parse {
                    row: i + 2,
                    column: col.to_string(),
                    reason: "expected a number".into(),
                })
            };
            knots.push(parse(parts.next(), "r")?);
            values.push(parse(parts.next(), "value")?);
        }
        StepFunction::new(knots, values)
    }

    /// JSON serialization as an array of `{r, value}` objects.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Pair {
            r: f64,
            value: f64,
        }
        let pairs: Vec<Pair> = self
            .knots
            .iter()
            .zip(&self.values)
            .map(|(&r, &value)| Pair { r, value })
            .collect();
        serde_json::to_string(&pairs).expect("step function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Pair {
            r: f64,
            value: f64,
        }
        let pairs: Vec<Pair> = serde_json::from_str(text)?;
        StepFunction::new(
            pairs.iter().map(|p| p.r).collect(),
            pairs.iter().map(|p| p.value).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_conventions() {
        let f = StepFunction::new(vec![1.0, 2.0, 4.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(f.eval(0.5), 0.0); // at or below first knot
        assert_eq!(f.eval(1.0), 0.0); // at a knot: that knot's value
        assert_eq!(f.eval(1.5), 1.0); // left-continuous on (1, 2]
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(3.9), 3.0);
        assert_eq!(f.eval(100.0), 3.0); // beyond last knot
    }

    #[test]
    fn rejects_nonascending_knots() {
        assert!(StepFunction::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(StepFunction::new(vec![2.0, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn csv_and_json_round_trip_bit_exact() {
        let f = StepFunction::new(
            vec![0.1, 0.30000000000000004, 848.5],
            vec![-1.0 / 3.0, 6.193, 1e-17],
        )
        .unwrap();
        assert_eq!(StepFunction::from_csv(&f.to_csv()).unwrap(), f);
        assert_eq!(StepFunction::from_json(&f.to_json()).unwrap(), f);
    }
}
