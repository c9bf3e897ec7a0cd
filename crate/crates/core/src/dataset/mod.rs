//! Training corpus: rejection-sampled designs, performance labels, quantile
//! normalization and CSV persistence.

mod io;
mod normalizer;

pub use io::{load, save};
pub use normalizer::{Normalizer, DEFAULT_QUANTILES};

use crate::designspace::{constraint_mask, uniform_at, DesignVector};
use crate::geometry::{
    hull_gaussian_curvature_at, hydrostatics_with, maxbox_with, GeometryError, HullSurface,
    HydroRecord, HydroSettings, MaxBoxSettings,
};
use crate::hydro::{aggregate_cw, drag_grid_with, DragGrid, HydroError, MichellSettings};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Metric column names in vector order.
pub const METRIC_NAMES: [&str; 7] = ["cw_star", "sa50", "sa100", "v50", "v100", "maxbox", "gc"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("column {0} is constant; quantile map is degenerate")]
    ConstantColumn(usize),
    #[error("not enough data: {0}")]
    NotEnoughData(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rejection sampling aborted after {attempts} attempts ({feasible} feasible, {invalid} invalid found)")]
    AttemptsExhausted {
        attempts: u64,
        feasible: usize,
        invalid: usize,
    },
    #[error("missing file: {0}")]
    MissingFile(String),
    #[error("checksum mismatch for {0}")]
    HashMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Hydro(#[from] HydroError),
}

/// The seven normalized objectives plus the raw measurements they came from.
///
/// Sign conventions: `cw_star`, `sa50`, `sa100`, `gc` are log10 measures to
/// be minimized; `v50`, `v100` carry a −log10 so volume maximization is also
/// a minimization; `maxbox` is −(box volume / hull volume) ∈ [−1, 0].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRecord {
    pub cw_star: f64,
    pub sa50: f64,
    pub sa100: f64,
    pub v50: f64,
    pub v100: f64,
    pub maxbox: f64,
    pub gc: f64,
    pub drag: DragGrid,
    pub hydro50: HydroRecord,
    pub hydro100: HydroRecord,
}

impl PerformanceRecord {
    pub fn metrics(&self) -> [f64; 7] {
        [
            self.cw_star,
            self.sa50,
            self.sa100,
            self.v50,
            self.v100,
            self.maxbox,
            self.gc,
        ]
    }
}

/// Provenance and integrity record for one dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub n_feasible: usize,
    pub n_invalid: usize,
    /// Box draws consumed to meet the quotas; attempts/n_feasible estimates
    /// the reciprocal uniform feasibility rate.
    pub attempts: u64,
    /// Designs dropped during labeling, with diagnostics.
    pub dropped: Vec<(usize, String)>,
    pub file_hashes: BTreeMap<String, String>,
    /// Run configuration echoed by the CLI, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

/// Designs, feasibility masks and (after labeling) performance records.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub designs: Vec<DesignVector>,
    /// Constraint violation bitmasks, aligned with `designs`.
    pub masks: Vec<u16>,
    /// Labels for feasible designs; `None` for invalid or unlabeled rows.
    pub performance: Vec<Option<PerformanceRecord>>,
    pub manifest: Manifest,
}

impl LabeledDataset {
    pub fn feasible_indices(&self) -> Vec<usize> {
        (0..self.designs.len())
            .filter(|&i| self.masks[i] == 0)
            .collect()
    }

    pub fn invalid_indices(&self) -> Vec<usize> {
        (0..self.designs.len())
            .filter(|&i| self.masks[i] != 0)
            .collect()
    }

    pub fn feasible_designs(&self) -> Vec<DesignVector> {
        self.feasible_indices()
            .into_iter()
            .map(|i| self.designs[i])
            .collect()
    }

    /// Rows that carry a performance record, as `(design index, record)`.
    pub fn labeled_rows(&self) -> Vec<(usize, &PerformanceRecord)> {
        self.performance
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|r| (i, r)))
            .collect()
    }
}

/// Evaluation stack resolution used for labeling.
#[derive(Debug, Clone, Copy)]
pub struct LabelSettings {
    pub michell: MichellSettings,
    pub hydro: HydroSettings,
    pub maxbox: MaxBoxSettings,
    pub curvature_grid: usize,
}

impl Default for LabelSettings {
    fn default() -> Self {
        LabelSettings {
            michell: MichellSettings::default(),
            hydro: HydroSettings::default(),
            maxbox: MaxBoxSettings::default(),
            curvature_grid: 64,
        }
    }
}

const MAX_ATTEMPTS: u64 = 10_000_000;

/// Rejection-sample the box until both quotas are met.
///
/// Attempt `i` draws from its own derived stream, so the result is a pure
/// function of `(seed, quotas)` no matter how the scan is scheduled. Invalid
/// samples are kept as drawn, preserving the natural violation mix.
pub fn generate(
    n_feasible: usize,
    n_invalid: usize,
    seed: u64,
) -> Result<LabeledDataset, DatasetError> {
    let mut designs = Vec::with_capacity(n_feasible + n_invalid);
    let mut masks = Vec::with_capacity(n_feasible + n_invalid);
    let mut feasible = 0usize;
    let mut invalid = 0usize;
    let mut attempts = 0u64;
    while feasible < n_feasible || invalid < n_invalid {
        if attempts >= MAX_ATTEMPTS {
            return Err(DatasetError::AttemptsExhausted {
                attempts,
                feasible,
                invalid,
            });
        }
        let v = uniform_at(seed, attempts);
        attempts += 1;
        let mask = constraint_mask(&v);
        if mask == 0 {
            if feasible < n_feasible {
                designs.push(v);
                masks.push(mask);
                feasible += 1;
            }
        } else if invalid < n_invalid {
            designs.push(v);
            masks.push(mask);
            invalid += 1;
        }
    }
    let n = designs.len();
    Ok(LabeledDataset {
        designs,
        masks,
        performance: vec![None; n],
        manifest: Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            n_feasible,
            n_invalid,
            attempts,
            dropped: Vec::new(),
            file_hashes: BTreeMap::new(),
            config: None,
        },
    })
}

/// Label one feasible design with all seven normalized objectives.
pub fn label_design(
    v: &DesignVector,
    maxbox_seed: u64,
    settings: &LabelSettings,
) -> Result<PerformanceRecord, DatasetError> {
    let surface = HullSurface::feasible(v)?;
    let drag = drag_grid_with(&surface, &settings.michell)?;
    let cw_star = aggregate_cw(&drag)?;
    let hydro50 = hydrostatics_with(&surface, 0.5, &settings.hydro)?;
    let hydro100 = hydrostatics_with(&surface, 1.0, &settings.hydro)?;
    let box_rec = maxbox_with(&surface, maxbox_seed, &settings.maxbox);
    let gc_raw = hull_gaussian_curvature_at(v, settings.curvature_grid, settings.curvature_grid)?;

    let positive = |name: &str, value: f64| -> Result<f64, DatasetError> {
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(DatasetError::Parse(format!(
                "non-positive {name} = {value} for log10 metric"
            )))
        }
    };
    let record = PerformanceRecord {
        cw_star,
        sa50: positive("wetted surface (50%)", hydro50.wetted_surface)?.log10(),
        sa100: positive("wetted surface (100%)", hydro100.wetted_surface)?.log10(),
        v50: -positive("volume (50%)", hydro50.volume)?.log10(),
        v100: -positive("volume (100%)", hydro100.volume)?.log10(),
        maxbox: -(box_rec.volume / hydro100.volume),
        gc: positive("gaussian curvature", gc_raw)?.log10(),
        drag,
        hydro50,
        hydro100,
    };
    if record.metrics().iter().any(|m| !m.is_finite()) {
        return Err(DatasetError::Parse("non-finite metric".to_string()));
    }
    Ok(record)
}

/// Compute performance records for every feasible design, in parallel.
///
/// Each design draws its MaxBox seed from `(dataset seed, index)`, so
/// labeling is order-independent and parallel-schedule-independent. Designs
/// whose evaluation fails are dropped with a diagnostic in the manifest,
/// never silently skipped.
pub fn label(ds: &mut LabeledDataset, settings: &LabelSettings) -> Result<(), DatasetError> {
    let seed = ds.manifest.seed;
    let feasible = ds.feasible_indices();
    if feasible.is_empty() {
        return Err(DatasetError::NotEnoughData(
            "no feasible designs to label".to_string(),
        ));
    }
    let results: Vec<(usize, Result<PerformanceRecord, String>)> = feasible
        .par_iter()
        .map(|&idx| {
            let r = label_design(&ds.designs[idx], seed ^ idx as u64, settings)
                .map_err(|e| e.to_string());
            (idx, r)
        })
        .collect();
    for (idx, result) in results {
        match result {
            Ok(record) => ds.performance[idx] = Some(record),
            Err(message) => ds.manifest.dropped.push((idx, message)),
        }
    }
    ds.manifest.dropped.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(())
}

/// Fit the quantile normalizer on the feasible designs.
pub fn fit_normalizer(ds: &LabeledDataset) -> Result<Normalizer, DatasetError> {
    let feasible = ds.feasible_designs();
    if feasible.len() < 100 {
        return Err(DatasetError::NotEnoughData(format!(
            "{} feasible designs; normalizer needs at least 100",
            feasible.len()
        )));
    }
    let rows: Vec<Vec<f64>> = feasible.iter().map(|v| v.0.to_vec()).collect();
    Normalizer::fit(&rows, DEFAULT_QUANTILES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designspace::check_constraints;

    #[test]
    fn generation_meets_quotas_and_is_reproducible() {
        let ds = generate(100, 60, 7).unwrap();
        let again = generate(100, 60, 7).unwrap();
        assert_eq!(ds, again);
        assert_eq!(ds.feasible_indices().len(), 100);
        assert_eq!(ds.invalid_indices().len(), 60);
        for &i in &ds.feasible_indices() {
            assert!(check_constraints(&ds.designs[i]).unwrap().feasible());
        }
        for &i in &ds.invalid_indices() {
            assert_ne!(ds.masks[i], 0);
        }
        // attempts/n_feasible is a feasibility-rate estimate near 1/0.097.
        let ratio = ds.manifest.attempts as f64 / 100.0;
        assert!(ratio > 5.0 && ratio < 20.0, "ratio = {ratio}");
    }

    fn quick_settings() -> LabelSettings {
        LabelSettings {
            michell: MichellSettings {
                x_panels: 48,
                z_panels: 24,
                theta_nodes: 64,
                ..Default::default()
            },
            hydro: HydroSettings {
                x_stations: 60,
                girth_samples: 48,
                ..Default::default()
            },
            maxbox: MaxBoxSettings {
                starts: 4,
                max_iter: 400,
                ..Default::default()
            },
            curvature_grid: 24,
        }
    }

    #[test]
    fn labeling_fills_feasible_rows_only() {
        let mut ds = generate(3, 2, 11).unwrap();
        label(&mut ds, &quick_settings()).unwrap();
        for &i in &ds.feasible_indices() {
            let rec = ds.performance[i].as_ref().expect("labeled");
            assert!(rec.maxbox >= -1.0 && rec.maxbox <= 0.0);
            // Raw total volume is at least the half-depth volume.
            assert!(rec.hydro100.volume >= rec.hydro50.volume);
        }
        for &i in &ds.invalid_indices() {
            assert!(ds.performance[i].is_none());
        }
        assert!(ds.manifest.dropped.is_empty());
    }

    #[test]
    fn labeling_is_order_independent() {
        let settings = quick_settings();
        let mut a = generate(4, 0, 13).unwrap();
        label(&mut a, &settings).unwrap();
        // Records are a pure function of (design, per-design seed).
        for (idx, v) in a.designs.iter().enumerate().rev() {
            let rec = label_design(v, a.manifest.seed ^ idx as u64, &settings).unwrap();
            assert_eq!(Some(rec), a.performance[idx]);
        }
    }

    #[test]
    fn normalizer_requires_enough_feasible_designs() {
        let ds = generate(10, 0, 1).unwrap();
        assert!(matches!(
            fit_normalizer(&ds),
            Err(DatasetError::NotEnoughData(_))
        ));
        let ds = generate(120, 0, 1).unwrap();
        let norm = fit_normalizer(&ds).unwrap();
        assert_eq!(norm.dim(), crate::designspace::DIM);
    }
}
