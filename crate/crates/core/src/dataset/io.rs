//! Dataset persistence: CSV tables plus a JSON manifest with file hashes.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every value bit-exactly and re-serializing
//! produces byte-identical files.

use super::{DatasetError, LabeledDataset, Manifest, PerformanceRecord, METRIC_NAMES};
use crate::designspace::{DesignVector, DIM, PARAM_NAMES};
use crate::geometry::HydroRecord;
use crate::hydro::DragGrid;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

const DESIGNS_FILE: &str = "designs.csv";
const PERFORMANCE_FILE: &str = "performance.csv";
const DRAGRID_FILE: &str = "dragrid.csv";
const HYDRO_FILE: &str = "hydro.csv";
const MANIFEST_FILE: &str = "manifest.json";

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn hydro_fields(r: &HydroRecord) -> [f64; 10] {
    [
        r.draft,
        r.waterline_length,
        r.waterplane_area,
        r.wetted_surface,
        r.lcf,
        r.i_long,
        r.i_trans,
        r.volume,
        r.lcb,
        r.vcb,
    ]
}

fn hydro_from_fields(f: &[f64]) -> HydroRecord {
    HydroRecord {
        draft: f[0],
        waterline_length: f[1],
        waterplane_area: f[2],
        wetted_surface: f[3],
        lcf: f[4],
        i_long: f[5],
        i_trans: f[6],
        volume: f[7],
        lcb: f[8],
        vcb: f[9],
    }
}

const HYDRO_FIELD_NAMES: [&str; 10] = [
    "draft", "lwl", "awp", "ws", "lcf", "il", "it", "vol", "lcb", "vcb",
];

fn designs_csv(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    out.push_str(&PARAM_NAMES.join(","));
    out.push_str(",viol_mask\n");
    for (v, mask) in ds.designs.iter().zip(ds.masks.iter()) {
        let cols: Vec<String> = v.0.iter().map(|&x| fmt(x)).collect();
        out.push_str(&cols.join(","));
        out.push_str(&format!(",{mask}\n"));
    }
    out
}

fn performance_csv(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    out.push_str("idx,");
    out.push_str(&METRIC_NAMES.join(","));
    out.push('\n');
    for (idx, rec) in ds.labeled_rows() {
        let cols: Vec<String> = rec.metrics().iter().map(|&m| fmt(m)).collect();
        out.push_str(&format!("{idx},{}\n", cols.join(",")));
    }
    out
}

fn dragrid_csv(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    out.push_str("idx,");
    out.push_str(&DragGrid::column_names().join(","));
    out.push('\n');
    for (idx, rec) in ds.labeled_rows() {
        let cols: Vec<String> = rec.drag.flat().iter().map(|&c| fmt(c)).collect();
        out.push_str(&format!("{idx},{}\n", cols.join(",")));
    }
    out
}

fn hydro_csv(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    out.push_str("idx");
    for prefix in ["h50", "h100"] {
        for name in HYDRO_FIELD_NAMES {
            out.push_str(&format!(",{prefix}_{name}"));
        }
    }
    out.push('\n');
    for (idx, rec) in ds.labeled_rows() {
        out.push_str(&idx.to_string());
        for r in [&rec.hydro50, &rec.hydro100] {
            for v in hydro_fields(r) {
                out.push(',');
                out.push_str(&fmt(v));
            }
        }
        out.push('\n');
    }
    out
}

/// Write the dataset to `dir` (created if missing). The manifest records a
/// SHA-256 per data file; `load` refuses anything that does not match.
pub fn save(ds: &LabeledDataset, dir: &Path) -> Result<(), DatasetError> {
    std::fs::create_dir_all(dir)?;
    let files = [
        (DESIGNS_FILE, designs_csv(ds)),
        (PERFORMANCE_FILE, performance_csv(ds)),
        (DRAGRID_FILE, dragrid_csv(ds)),
        (HYDRO_FILE, hydro_csv(ds)),
    ];
    let mut hashes = BTreeMap::new();
    for (name, content) in &files {
        std::fs::write(dir.join(name), content)?;
        hashes.insert(
            name.to_string(),
            hex::encode(Sha256::digest(content.as_bytes())),
        );
    }
    let mut manifest = ds.manifest.clone();
    manifest.file_hashes = hashes;
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(|e| DatasetError::Parse(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), manifest_json)?;
    Ok(())
}

fn read_checked(dir: &Path, name: &str, manifest: &Manifest) -> Result<String, DatasetError> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(DatasetError::MissingFile(name.to_string()));
    }
    let content = std::fs::read_to_string(&path)?;
    let expected = manifest
        .file_hashes
        .get(name)
        .ok_or_else(|| DatasetError::Parse(format!("manifest lacks hash for {name}")))?;
    if &hex::encode(Sha256::digest(content.as_bytes())) != expected {
        return Err(DatasetError::HashMismatch(name.to_string()));
    }
    Ok(content)
}

fn parse_f64(field: &str, context: &str) -> Result<f64, DatasetError> {
    field
        .parse::<f64>()
        .map_err(|e| DatasetError::Parse(format!("{context}: {e}")))
}

struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn parse_csv(content: &str, name: &str) -> Result<CsvTable, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(content.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| DatasetError::Parse(format!("{name}: {e}")))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DatasetError::Parse(format!("{name}: {e}")))?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok(CsvTable { header, rows })
}

/// Load a dataset directory, verifying every file hash.
pub fn load(dir: &Path) -> Result<LabeledDataset, DatasetError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(DatasetError::MissingFile(MANIFEST_FILE.to_string()));
    }
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)
        .map_err(|e| DatasetError::Parse(format!("{MANIFEST_FILE}: {e}")))?;

    let designs_table = parse_csv(&read_checked(dir, DESIGNS_FILE, &manifest)?, DESIGNS_FILE)?;
    if designs_table.header.len() != DIM + 1 {
        return Err(DatasetError::Parse(format!(
            "{DESIGNS_FILE}: expected {} columns",
            DIM + 1
        )));
    }
    let mut designs = Vec::with_capacity(designs_table.rows.len());
    let mut masks = Vec::with_capacity(designs_table.rows.len());
    for row in &designs_table.rows {
        let mut p = [0.0; DIM];
        for c in 0..DIM {
            p[c] = parse_f64(&row[c], DESIGNS_FILE)?;
        }
        designs.push(DesignVector(p));
        masks.push(
            row[DIM]
                .parse::<u16>()
                .map_err(|e| DatasetError::Parse(format!("{DESIGNS_FILE} viol_mask: {e}")))?,
        );
    }

    let mut performance: Vec<Option<PerformanceRecord>> = vec![None; designs.len()];
    let perf_table = parse_csv(
        &read_checked(dir, PERFORMANCE_FILE, &manifest)?,
        PERFORMANCE_FILE,
    )?;
    let drag_table = parse_csv(&read_checked(dir, DRAGRID_FILE, &manifest)?, DRAGRID_FILE)?;
    let hydro_table = parse_csv(&read_checked(dir, HYDRO_FILE, &manifest)?, HYDRO_FILE)?;
    if perf_table.rows.len() != drag_table.rows.len()
        || perf_table.rows.len() != hydro_table.rows.len()
    {
        return Err(DatasetError::Parse(
            "performance/dragrid/hydro row counts disagree".to_string(),
        ));
    }
    for ((perf_row, drag_row), hydro_row) in perf_table
        .rows
        .iter()
        .zip(drag_table.rows.iter())
        .zip(hydro_table.rows.iter())
    {
        let idx: usize = perf_row[0]
            .parse()
            .map_err(|e| DatasetError::Parse(format!("{PERFORMANCE_FILE} idx: {e}")))?;
        if idx >= designs.len() || drag_row[0] != perf_row[0] || hydro_row[0] != perf_row[0] {
            return Err(DatasetError::Parse(format!(
                "misaligned labeled row idx {idx}"
            )));
        }
        let metrics: Vec<f64> = perf_row[1..]
            .iter()
            .map(|f| parse_f64(f, PERFORMANCE_FILE))
            .collect::<Result<_, _>>()?;
        if metrics.len() != METRIC_NAMES.len() {
            return Err(DatasetError::Parse(format!(
                "{PERFORMANCE_FILE}: expected {} metrics",
                METRIC_NAMES.len()
            )));
        }
        let drag_vals: Vec<f64> = drag_row[1..]
            .iter()
            .map(|f| parse_f64(f, DRAGRID_FILE))
            .collect::<Result<_, _>>()?;
        let drag = DragGrid::from_flat(&drag_vals)
            .ok_or_else(|| DatasetError::Parse(format!("{DRAGRID_FILE}: need 32 entries")))?;
        let hydro_vals: Vec<f64> = hydro_row[1..]
            .iter()
            .map(|f| parse_f64(f, HYDRO_FILE))
            .collect::<Result<_, _>>()?;
        if hydro_vals.len() != 20 {
            return Err(DatasetError::Parse(format!(
                "{HYDRO_FILE}: expected 20 fields"
            )));
        }
        performance[idx] = Some(PerformanceRecord {
            cw_star: metrics[0],
            sa50: metrics[1],
            sa100: metrics[2],
            v50: metrics[3],
            v100: metrics[4],
            maxbox: metrics[5],
            gc: metrics[6],
            drag,
            hydro50: hydro_from_fields(&hydro_vals[..10]),
            hydro100: hydro_from_fields(&hydro_vals[10..]),
        });
    }

    Ok(LabeledDataset {
        designs,
        masks,
        performance,
        manifest,
    })
}
