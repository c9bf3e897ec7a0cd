//! Per-column quantile normalization to a rescaled normal shape.
//!
//! Fitting stores an empirical quantile table per column. The forward map
//! sends a value through the interpolated empirical CDF, then the standard
//! normal inverse CDF, then a linear rescale that puts the fitted column
//! min/max exactly at −1/+1. The inverse map runs the same chain backwards
//! and is an identity on the fitted range up to interpolation rounding.

use super::DatasetError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// CDF clip applied before the normal inverse; keeps the min/max images
/// finite while staying far below one table-cell width of probability mass.
const P_EPS: f64 = 1e-9;

/// Default number of quantile knots.
pub const DEFAULT_QUANTILES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ColumnMap {
    /// Quantile values at probabilities `k/(len−1)`.
    quantiles: Vec<f64>,
}

/// Invertible per-column map from the fitted data distribution to a normal
/// shape rescaled to [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    columns: Vec<ColumnMap>,
    z_lo: f64,
    z_hi: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

impl Normalizer {
    /// Fit on rows of dimension `dim`; errors on a constant column.
    pub fn fit(rows: &[Vec<f64>], n_quantiles: usize) -> Result<Self, DatasetError> {
        let n = rows.len();
        if n < 2 {
            return Err(DatasetError::NotEnoughData(format!(
                "{n} rows for normalizer fit"
            )));
        }
        let dim = rows[0].len();
        let n_q = n_quantiles.clamp(2, n.max(2));
        let mut columns = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut sorted: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            sorted.sort_by(f64::total_cmp);
            if sorted[0] == sorted[n - 1] {
                return Err(DatasetError::ConstantColumn(c));
            }
            let mut quantiles = Vec::with_capacity(n_q);
            for k in 0..n_q {
                let p = k as f64 / (n_q - 1) as f64;
                let pos = p * (n - 1) as f64;
                let lo = pos.floor() as usize;
                let frac = pos - lo as f64;
                let q = if lo + 1 < n {
                    sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
                } else {
                    sorted[n - 1]
                };
                quantiles.push(q);
            }
            columns.push(ColumnMap { quantiles });
        }
        // Anchors go through the same expression as `forward_value` at
        // cdf = 0 and cdf = 1, so the column extremes land on ±1 exactly.
        let normal = std_normal();
        Ok(Normalizer {
            columns,
            z_lo: normal.inverse_cdf(P_EPS),
            z_hi: normal.inverse_cdf(P_EPS + (1.0 - 2.0 * P_EPS)),
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Fitted minimum and maximum of column `c`.
    pub fn column_range(&self, c: usize) -> (f64, f64) {
        let q = &self.columns[c].quantiles;
        (q[0], q[q.len() - 1])
    }

    /// Empirical CDF of column `c` by table interpolation.
    fn cdf(&self, c: usize, x: f64) -> f64 {
        let q = &self.columns[c].quantiles;
        let n = q.len();
        if x <= q[0] {
            return 0.0;
        }
        if x >= q[n - 1] {
            return 1.0;
        }
        // First knot at or above x.
        let i = q.partition_point(|&v| v < x);
        let (q0, q1) = (q[i - 1], q[i]);
        let (p0, p1) = (
            (i - 1) as f64 / (n - 1) as f64,
            i as f64 / (n - 1) as f64,
        );
        if q1 == q0 {
            p1
        } else {
            p0 + (p1 - p0) * (x - q0) / (q1 - q0)
        }
    }

    /// Empirical quantile function of column `c`.
    fn quantile(&self, c: usize, p: f64) -> f64 {
        let q = &self.columns[c].quantiles;
        let n = q.len();
        let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if lo + 1 < n {
            q[lo] * (1.0 - frac) + q[lo + 1] * frac
        } else {
            q[n - 1]
        }
    }

    /// Forward map of one value in column `c`. The empirical CDF is embedded
    /// affinely into [P_EPS, 1−P_EPS] so both ends stay finite and the
    /// chain inverts without a clipping discontinuity.
    pub fn forward_value(&self, c: usize, x: f64) -> f64 {
        let p = P_EPS + self.cdf(c, x) * (1.0 - 2.0 * P_EPS);
        let z = std_normal().inverse_cdf(p);
        -1.0 + 2.0 * (z - self.z_lo) / (self.z_hi - self.z_lo)
    }

    /// Inverse map of one normalized value in column `c`.
    pub fn inverse_value(&self, c: usize, u: f64) -> f64 {
        let z = self.z_lo + (u + 1.0) * 0.5 * (self.z_hi - self.z_lo);
        let p = (std_normal().cdf(z) - P_EPS) / (1.0 - 2.0 * P_EPS);
        self.quantile(c, p)
    }

    pub fn forward_row(&self, row: &[f64]) -> Result<Vec<f64>, DatasetError> {
        self.check_dim(row.len())?;
        Ok((0..row.len())
            .map(|c| self.forward_value(c, row[c]))
            .collect())
    }

    pub fn inverse_row(&self, row: &[f64]) -> Result<Vec<f64>, DatasetError> {
        self.check_dim(row.len())?;
        Ok((0..row.len())
            .map(|c| self.inverse_value(c, row[c]))
            .collect())
    }

    fn check_dim(&self, got: usize) -> Result<(), DatasetError> {
        if got != self.dim() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("normalizer serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(text).map_err(|e| DatasetError::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use rand::Rng;

    fn sample_rows(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = derive_stream(seed, "norm.test", 0);
        (0..n)
            .map(|_| {
                let a: f64 = rng.random::<f64>() * 100.0;
                let b: f64 = rng.random::<f64>().powi(3) - 0.5;
                vec![a, b]
            })
            .collect()
    }

    #[test]
    fn roundtrip_on_fitted_data() {
        let rows = sample_rows(800, 1);
        let norm = Normalizer::fit(&rows, 500).unwrap();
        for row in &rows {
            let u = norm.forward_row(row).unwrap();
            let back = norm.inverse_row(&u).unwrap();
            for c in 0..row.len() {
                let scale = row[c].abs().max(1.0);
                assert!(
                    (back[c] - row[c]).abs() / scale < 1e-6,
                    "col {c}: {} -> {}",
                    row[c],
                    back[c]
                );
                let u2 = norm.forward_value(c, back[c]);
                assert!((u2 - u[c]).abs() < 1e-6);
                assert!((-1.0..=1.0).contains(&u[c]));
            }
        }
    }

    #[test]
    fn column_extremes_map_to_unit_interval_ends() {
        let rows = sample_rows(300, 2);
        let norm = Normalizer::fit(&rows, 200).unwrap();
        for c in 0..2 {
            let (lo, hi) = norm.column_range(c);
            assert_eq!(norm.forward_value(c, lo), -1.0);
            assert_eq!(norm.forward_value(c, hi), 1.0);
        }
    }

    #[test]
    fn out_of_range_values_clip() {
        let rows = sample_rows(300, 3);
        let norm = Normalizer::fit(&rows, 200).unwrap();
        let (lo, hi) = norm.column_range(0);
        assert_eq!(norm.forward_value(0, lo - 100.0), -1.0);
        assert_eq!(norm.forward_value(0, hi + 100.0), 1.0);
    }

    #[test]
    fn constant_column_is_rejected() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![1.0, i as f64]).collect();
        assert!(matches!(
            Normalizer::fit(&rows, 100),
            Err(DatasetError::ConstantColumn(0))
        ));
    }

    #[test]
    fn json_roundtrip() {
        let rows = sample_rows(100, 4);
        let norm = Normalizer::fit(&rows, 64).unwrap();
        let back = Normalizer::from_json(&norm.to_json()).unwrap();
        assert_eq!(norm, back);
    }

    #[test]
    fn transformed_data_matches_rescaled_normal_shape() {
        // Kolmogorov–Smirnov against the target CDF at α = 0.01.
        let rows = sample_rows(2000, 5);
        let norm = Normalizer::fit(&rows, 1000).unwrap();
        let normal = std_normal();
        for c in 0..2 {
            let mut u: Vec<f64> = rows.iter().map(|r| norm.forward_value(c, r[c])).collect();
            u.sort_by(f64::total_cmp);
            let n = u.len();
            // Target CDF of the rescaled normal shape on [−1, 1].
            let target = |v: f64| {
                let z = norm.z_lo + (v + 1.0) * 0.5 * (norm.z_hi - norm.z_lo);
                normal.cdf(z)
            };
            let mut d: f64 = 0.0;
            for (i, &v) in u.iter().enumerate() {
                let t = target(v);
                d = d.max((t - i as f64 / n as f64).abs());
                d = d.max(((i + 1) as f64 / n as f64 - t).abs());
            }
            let critical = 1.628 / (n as f64).sqrt(); // α = 0.01
            assert!(d < critical, "col {c}: D = {d}, critical = {critical}");
        }
    }
}
