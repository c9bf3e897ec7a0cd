//! Generated-sample quality: chamfer coverage/realism, PCA projections,
//! feasibility rates and dataset-vs-generated performance tables.

mod pca;
mod svg;

pub use pca::Pca2;
pub use svg::{render_lines_svg, render_scatter_svg, LineSeries, ScatterSeries};

use crate::designspace::{is_feasible, DesignVector, DIM};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty vector set: {0}")]
    EmptySet(&'static str),
    #[error("need at least {need} vectors, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("data rank below 2; PCA is degenerate")]
    RankDeficient,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("missing labels: {0}")]
    MissingLabels(String),
}

/// Mean over rows of `a` of the squared Euclidean distance to the nearest
/// row of `b`.
pub fn chamfer_mean(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64, EvalError> {
    if a.nrows() == 0 {
        return Err(EvalError::EmptySet("query"));
    }
    if b.nrows() == 0 {
        return Err(EvalError::EmptySet("reference"));
    }
    if a.ncols() != b.ncols() {
        return Err(EvalError::DimensionMismatch(format!(
            "{} vs {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(mean_nn_distance(a, b, false))
}

/// Nearest-neighbor mean with optional exclusion of exact-duplicate pairs
/// (used by coverage/realism so a set scored against itself reproduces the
/// leave-one-out baseline).
fn mean_nn_distance(a: &Array2<f64>, b: &Array2<f64>, exclude_identical: bool) -> f64 {
    let dists: Vec<f64> = (0..a.nrows())
        .into_par_iter()
        .map(|i| {
            let qa = a.row(i);
            let mut best = f64::INFINITY;
            for j in 0..b.nrows() {
                let qb = b.row(j);
                let mut d = 0.0;
                let mut identical = true;
                for c in 0..a.ncols() {
                    let diff = qa[c] - qb[c];
                    if diff != 0.0 {
                        identical = false;
                    }
                    d += diff * diff;
                }
                if exclude_identical && identical {
                    continue;
                }
                if d < best {
                    best = d;
                }
            }
            best
        })
        .collect();
    dists.iter().sum::<f64>() / dists.len() as f64
}

/// Coverage and realism of a generated set against the dataset, with the
/// baselines used for normalization recorded alongside.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Mean chamfer distance dataset → generated.
    pub raw_coverage: f64,
    /// Mean chamfer distance generated → dataset.
    pub raw_realism: f64,
    /// `(raw − worst)/(best − worst)` with the coverage baselines.
    pub coverage: f64,
    pub realism: f64,
    /// Mean leave-one-out nearest-neighbor distance within the dataset.
    pub best_case_coverage: f64,
    /// Mean distance of dataset members to the dataset centroid.
    pub worst_case_coverage: f64,
    /// Min/max leave-one-out nearest-neighbor distance within the dataset.
    pub best_case_realism: f64,
    pub worst_case_realism: f64,
}

/// Drop the LOA column: distances are taken in the dimensionless part of
/// the parameter space, where no single scale column dominates.
pub fn design_matrix_no_loa(designs: &[DesignVector]) -> Array2<f64> {
    let mut m = Array2::zeros((designs.len(), DIM - 1));
    for (r, v) in designs.iter().enumerate() {
        for c in 1..DIM {
            m[[r, c - 1]] = v.0[c];
        }
    }
    m
}

/// Coverage (dataset → generated) and realism (generated → dataset),
/// linearly normalized between dataset-derived best and worst cases.
pub fn coverage_realism(
    generated: &[DesignVector],
    dataset: &[DesignVector],
) -> Result<CoverageReport, EvalError> {
    if generated.is_empty() {
        return Err(EvalError::EmptySet("generated"));
    }
    if dataset.len() < 3 {
        return Err(EvalError::TooFew {
            need: 3,
            got: dataset.len(),
        });
    }
    let gen_m = design_matrix_no_loa(generated);
    let ds_m = design_matrix_no_loa(dataset);

    // Leave-one-out nearest-neighbor distances inside the dataset.
    let loo: Vec<f64> = (0..ds_m.nrows())
        .into_par_iter()
        .map(|i| {
            let qa = ds_m.row(i);
            let mut best = f64::INFINITY;
            for j in 0..ds_m.nrows() {
                if j == i {
                    continue;
                }
                let qb = ds_m.row(j);
                let mut d = 0.0;
                for c in 0..ds_m.ncols() {
                    let diff = qa[c] - qb[c];
                    d += diff * diff;
                }
                if d < best {
                    best = d;
                }
            }
            best
        })
        .collect();
    let best_cov = loo.iter().sum::<f64>() / loo.len() as f64;
    let best_real = loo.iter().copied().fold(f64::INFINITY, f64::min);
    let worst_real = loo.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Worst-case coverage: every dataset point served by the centroid.
    let centroid = ds_m.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let worst_cov = ds_m
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(centroid.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum::<f64>()
        / ds_m.nrows() as f64;

    let raw_coverage = mean_nn_distance(&ds_m, &gen_m, true);
    let raw_realism = mean_nn_distance(&gen_m, &ds_m, true);
    Ok(CoverageReport {
        raw_coverage,
        raw_realism,
        coverage: (raw_coverage - worst_cov) / (best_cov - worst_cov),
        realism: (raw_realism - worst_real) / (best_real - worst_real),
        best_case_coverage: best_cov,
        worst_case_coverage: worst_cov,
        best_case_realism: best_real,
        worst_case_realism: worst_real,
    })
}

/// Feasibility fraction with a Wilson 95% confidence interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateReport {
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub feasible: usize,
}

/// Fraction of samples passing the algebraic constraints.
pub fn feasibility_rate(samples: &[DesignVector]) -> Result<RateReport, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptySet("samples"));
    }
    let feasible = samples.iter().filter(|v| is_feasible(v)).count();
    let (lo, hi) = wilson_interval(feasible, samples.len(), 1.96);
    Ok(RateReport {
        rate: feasible as f64 / samples.len() as f64,
        lo,
        hi,
        n: samples.len(),
        feasible,
    })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One row of the dataset-vs-generated performance comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRow {
    pub name: String,
    pub mean_dataset: f64,
    pub std_dataset: f64,
    pub mean_generated: f64,
    pub std_generated: f64,
    /// De-logged ratio of generated to dataset performance.
    pub scale_factor: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scale factors follow the metric conventions: log10 metrics exponentiate
/// the mean difference (per condition for the 32-entry drag aggregate),
/// sign-flipped volume metrics invert it, and the MaxBox ratio compares
/// means directly.
pub fn performance_table(
    generated: &[[f64; 7]],
    dataset: &[[f64; 7]],
) -> Result<Vec<MetricRow>, EvalError> {
    if generated.is_empty() || dataset.is_empty() {
        return Err(EvalError::MissingLabels(
            "need labeled generated and dataset metrics".to_string(),
        ));
    }
    let names = crate::dataset::METRIC_NAMES;
    let mut rows = Vec::with_capacity(7);
    for (k, name) in names.iter().enumerate() {
        let gen_col: Vec<f64> = generated.iter().map(|m| m[k]).collect();
        let ds_col: Vec<f64> = dataset.iter().map(|m| m[k]).collect();
        let (mg, sg) = mean_std(&gen_col);
        let (md, sd) = mean_std(&ds_col);
        let delta = mg - md;
        let scale_factor = match *name {
            // Sum of 32 per-condition log10 coefficients.
            "cw_star" => 10.0_f64.powf(delta / 32.0),
            // log10 measures.
            "sa50" | "sa100" | "gc" => 10.0_f64.powf(delta),
            // −log10 measures: improvement means a more negative mean.
            "v50" | "v100" => 10.0_f64.powf(-delta),
            // Plain ratio of means.
            "maxbox" => mg / md,
            _ => unreachable!(),
        };
        rows.push(MetricRow {
            name: name.to_string(),
            mean_dataset: md,
            std_dataset: sd,
            mean_generated: mg,
            std_generated: sg,
            scale_factor,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designspace::sample_uniform;

    fn mat(rows: &[&[f64]]) -> Array2<f64> {
        let n = rows.len();
        let d = rows[0].len();
        Array2::from_shape_fn((n, d), |(i, j)| rows[i][j])
    }

    #[test]
    fn chamfer_mean_basics() {
        let a = mat(&[&[0.0, 0.0]]);
        let b = mat(&[&[3.0, 4.0]]);
        assert_eq!(chamfer_mean(&a, &a).unwrap(), 0.0);
        assert_eq!(chamfer_mean(&a, &b).unwrap(), 25.0);
        assert!(chamfer_mean(&a, &Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn chamfer_matches_brute_force() {
        let xs = sample_uniform(5, 50);
        let ys = sample_uniform(6, 50);
        let a = design_matrix_no_loa(&xs);
        let b = design_matrix_no_loa(&ys);
        let fast = chamfer_mean(&a, &b).unwrap();
        let mut total = 0.0;
        for i in 0..a.nrows() {
            let mut best = f64::INFINITY;
            for j in 0..b.nrows() {
                let d: f64 = (0..a.ncols())
                    .map(|c| (a[[i, c]] - b[[j, c]]).powi(2))
                    .sum();
                best = best.min(d);
            }
            total += best;
        }
        assert_eq!(fast, total / a.nrows() as f64);
    }

    #[test]
    fn coverage_of_dataset_by_itself_is_one() {
        let ds = sample_uniform(7, 120);
        let report = coverage_realism(&ds, &ds).unwrap();
        assert!((report.coverage - 1.0).abs() < 1e-9, "{}", report.coverage);
    }

    #[test]
    fn coverage_of_centroid_is_zero() {
        let ds = sample_uniform(8, 150);
        let m = design_matrix_no_loa(&ds);
        let centroid = m.mean_axis(ndarray::Axis(0)).unwrap();
        let mut p = [0.0; DIM];
        p[0] = 100.0;
        for c in 1..DIM {
            p[c] = centroid[c - 1];
        }
        let report = coverage_realism(&[DesignVector(p)], &ds).unwrap();
        assert!(report.coverage.abs() < 1e-9, "{}", report.coverage);
    }

    #[test]
    fn coverage_is_permutation_invariant() {
        let ds = sample_uniform(9, 80);
        let gen = sample_uniform(10, 40);
        let a = coverage_realism(&gen, &ds).unwrap();
        let mut gen_rev = gen.clone();
        gen_rev.reverse();
        let mut ds_rev = ds.clone();
        ds_rev.reverse();
        let b = coverage_realism(&gen_rev, &ds_rev).unwrap();
        assert!((a.coverage - b.coverage).abs() < 1e-12);
        assert!((a.realism - b.realism).abs() < 1e-12);
    }

    #[test]
    fn feasibility_rate_extremes() {
        let feasible = vec![DesignVector::box_midpoint(); 10];
        let r = feasibility_rate(&feasible).unwrap();
        assert_eq!(r.rate, 1.0);
        assert!(r.lo > 0.6 && r.hi == 1.0);
        let mut bad = DesignVector::box_midpoint();
        bad.0[7] = -0.1;
        let r = feasibility_rate(&vec![bad; 10]).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(feasibility_rate(&[]).is_err());
    }

    #[test]
    fn identical_sets_give_unit_scale_factors() {
        let metrics: Vec<[f64; 7]> = (0..5)
            .map(|i| {
                let f = i as f64;
                [-70.0 - f, -1.5 + 0.1 * f, -1.0, 4.0, 3.5 - 0.2 * f, -0.4, 2.2]
            })
            .collect();
        for row in performance_table(&metrics, &metrics).unwrap() {
            assert!((row.scale_factor - 1.0).abs() < 1e-12, "{}", row.name);
        }
    }

    #[test]
    fn toy_sets_match_hand_computation() {
        // Three-hull toy sets, factors worked out by hand.
        let ds: Vec<[f64; 7]> = vec![
            [-64.0, -1.0, -0.8, 4.0, 3.0, -0.40, 2.0],
            [-72.0, -1.2, -1.0, 4.4, 3.4, -0.42, 2.2],
            [-80.0, -1.4, -1.2, 4.8, 3.8, -0.38, 2.4],
        ];
        let gen: Vec<[f64; 7]> = vec![
            [-96.0, -0.8, -0.7, 2.0, 1.1, -0.30, 2.5],
            [-104.0, -1.0, -0.9, 2.4, 1.5, -0.36, 2.7],
            [-112.0, -1.2, -1.1, 2.8, 1.9, -0.30, 2.9],
        ];
        let rows = performance_table(&gen, &ds).unwrap();
        // cw: mean gen −104, mean ds −72, delta −32 → 10^(−1) = 0.1.
        assert!((rows[0].scale_factor - 0.1).abs() < 1e-12);
        // sa50: delta = (−1.0) − (−1.2) = 0.2 → 10^0.2.
        assert!((rows[1].scale_factor - 10f64.powf(0.2)).abs() < 1e-12);
        // v100: delta = 1.5 − 3.4 = −1.9 → 10^{1.9}.
        assert!((rows[4].scale_factor - 10f64.powf(1.9)).abs() < 1e-9);
        // maxbox: (−0.32)/(−0.40) = 0.8.
        assert!((rows[5].scale_factor - 0.8).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_is_sane() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(lo > 0.39 && hi < 0.61);
        let (lo, _) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
    }
}
