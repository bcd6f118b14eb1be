//! CSV dataset I/O and descriptive statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cos_deg, KinematicSample, StarRecord};

const REQUIRED: [&str; 4] = ["r", "theta", "y", "sigma"];

/// Load star records from a CSV file with header `r,theta,y,sigma` and an
/// optional trailing `p_member` column.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<StarRecord>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let base_ok = headers.len() >= 4 && headers.iter().zip(REQUIRED).all(|(a, b)| a == b);
    let with_p = match headers.len() {
        4 if base_ok => false,
        5 if base_ok && headers[4] == "p_member" => true,
        _ => {
            return Err(Error::Schema(format!(
                "expected header r,theta,y,sigma[,p_member], got {}",
                headers.join(",")
            )))
        }
    };
    let ncols = headers.len();
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // 1-based, counting the header line
        let row = row.map_err(|e| Error::Parse {
            row: line,
            column: "<record>".into(),
            reason: e.to_string(),
        })?;
        if row.len() != ncols {
            return Err(Error::Parse {
                row: line,
                column: "<record>".into(),
                reason: format!("expected {ncols} fields, got {}", row.len()),
            });
        }
        let field = |j: usize| -> Result<f64> {
            row[j].trim().parse::<f64>().map_err(|e| Error::Parse {
                row: line,
                column: headers[j].clone(),
                reason: e.to_string(),
            })
        };
        let mut rec = StarRecord::new(field(0)?, field(1)?, field(2)?, field(3)?);
        if with_p {
            rec.p_member = Some(field(4)?);
        }
        out.push(rec);
    }
    Ok(out)
}

/// Write records in the same schema; the `p_member` column is included when
/// every record carries one.
pub fn save_csv(records: &[StarRecord], path: impl AsRef<Path>) -> Result<()> {
    let with_p = !records.is_empty() && records.iter().all(|r| r.p_member.is_some());
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    if with_p {
        writer.write_record(["r", "theta", "y", "sigma", "p_member"])?;
    } else {
        writer.write_record(["r", "theta", "y", "sigma"])?;
    }
    for rec in records {
        let mut row = vec![
            format!("{}", rec.r),
            format!("{}", rec.theta),
            format!("{}", rec.y),
            format!("{}", rec.sigma),
        ];
        if with_p {
            row.push(format!("{}", rec.p_member.unwrap()));
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// min/max/median/mean/stdev of one column. Median is the lower median for
/// even n; stdev uses the n-1 convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mean: f64,
    pub stdev: f64,
}

pub fn column_stats(values: &[f64]) -> ColumnStats {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = values.iter().sum::<f64>() / n as f64;
    let stdev = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    ColumnStats {
        min: sorted[0],
        max: sorted[n - 1],
        median: sorted[(n - 1) / 2],
        mean,
        stdev,
    }
}

/// Table of descriptive statistics for the observed columns and cos(theta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescribeBlock {
    pub n: usize,
    pub r: ColumnStats,
    pub theta: ColumnStats,
    pub cos_theta: ColumnStats,
    pub y: ColumnStats,
    pub sigma: ColumnStats,
}

pub fn describe(sample: &KinematicSample) -> DescribeBlock {
    let recs = sample.records();
    let col = |f: &dyn Fn(&StarRecord) -> f64| -> ColumnStats {
        column_stats(&recs.iter().map(f).collect::<Vec<_>>())
    };
    DescribeBlock {
        n: recs.len(),
        r: col(&|s| s.r),
        theta: col(&|s| s.theta),
        cos_theta: col(&|s| cos_deg(s.theta)),
        y: col(&|s| s.y),
        sigma: col(&|s| s.sigma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_and_order;

    #[test]
    fn roundtrip_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stars.csv");
        let recs = vec![
            StarRecord::new(1.5, 20.0, 283.25, 2.1),
            StarRecord::new(2.0, -90.0, 280.0, 1.8),
            StarRecord::new(3.25, 170.0, 285.5, 2.4),
        ];
        save_csv(&recs, &path).unwrap();
        let loaded = load_csv(&path).unwrap();
        assert_eq!(loaded.len(), 3);
        for (a, b) in loaded.iter().zip(&recs) {
            assert_eq!(a.r, b.r);
            assert_eq!(a.theta, b.theta);
            assert_eq!(a.y, b.y);
            assert_eq!(a.sigma, b.sigma);
            assert_eq!(a.p_member, None);
        }
    }

    #[test]
    fn roundtrip_with_membership() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stars.csv");
        let mut recs = vec![
            StarRecord::new(1.0, 0.0, 280.0, 2.0),
            StarRecord::new(2.0, 90.0, 281.0, 2.0),
        ];
        recs[0].p_member = Some(0.99);
        recs[1].p_member = Some(0.01);
        save_csv(&recs, &path).unwrap();
        let loaded = load_csv(&path).unwrap();
        assert_eq!(loaded[0].p_member, Some(0.99));
        assert_eq!(loaded[1].p_member, Some(0.01));
    }

    #[test]
    fn missing_sigma_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "r,theta,y\n1,2,3\n").unwrap();
        assert!(matches!(load_csv(&path), Err(Error::Schema(_))));
    }

    #[test]
    fn non_numeric_field_reports_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "r,theta,y,sigma\n1,0,280,2\n2,0,oops,2\n").unwrap();
        match load_csv(&path) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "y");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn describe_two_point_sample() {
        let recs = vec![
            StarRecord::new(1.0, 0.0, 0.0, 2.0),
            StarRecord::new(2.0, 180.0, 2.0, 2.0),
        ];
        let s = validate_and_order(&recs).unwrap();
        let d = describe(&s);
        assert_eq!(d.n, 2);
        assert_eq!(d.y.mean, 1.0);
        assert!((d.y.stdev - std::f64::consts::SQRT_2).abs() < 1e-12);
        // lower median for even n
        assert_eq!(d.y.median, 0.0);
        assert!((d.cos_theta.min + 1.0).abs() < 1e-12);
        assert!((d.cos_theta.max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn describe_cos_column_matches_angles() {
        let recs = vec![
            StarRecord::new(1.0, 60.0, 0.0, 1.0),
            StarRecord::new(2.0, 60.0, 0.0, 1.0),
            StarRecord::new(3.0, 60.0, 0.0, 1.0),
        ];
        let s = validate_and_order(&recs).unwrap();
        let d = describe(&s);
        assert!((d.cos_theta.mean - 0.5).abs() < 1e-12);
        assert_eq!(d.theta.median, 60.0);
    }
}
