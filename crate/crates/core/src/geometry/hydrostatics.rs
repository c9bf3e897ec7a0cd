//! Hydrostatic measures by trapezoidal integration over waterplanes.
//!
//! All quantities are computed directly in LOA units (the surface is never
//! multiplied by LOA), so every record field is exactly invariant under
//! geometric rescaling of the hull.

use super::surface::HullSurface;
use super::GeometryError;
use crate::designspace::DesignVector;
use serde::{Deserialize, Serialize};

/// The ten geometric measures at one draft, LOA-normalized per their length
/// power: lengths /LOA, areas /LOA², volumes /LOA³, moments /LOA⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroRecord {
    /// Draft height above baseline.
    pub draft: f64,
    /// Length of the waterline.
    pub waterline_length: f64,
    /// Area of the waterplane.
    pub waterplane_area: f64,
    /// Shell surface area below the draft (flat of keel included).
    pub wetted_surface: f64,
    /// Longitudinal center of flotation (waterplane centroid).
    pub lcf: f64,
    /// Waterplane second moment about the longitudinal axis.
    pub i_long: f64,
    /// Waterplane second moment about the transverse axis through the LCF.
    pub i_trans: f64,
    /// Displaced volume below the draft.
    pub volume: f64,
    /// Longitudinal center of buoyancy.
    pub lcb: f64,
    /// Vertical center of buoyancy.
    pub vcb: f64,
}

/// Integration resolution knobs.
#[derive(Debug, Clone, Copy)]
pub struct HydroSettings {
    /// Stations along the waterline for waterplane integrals.
    pub x_stations: usize,
    /// Draft marks for the vertical (volume) integration.
    pub z_stations: usize,
    /// Polyline samples per station girth for wetted surface.
    pub girth_samples: usize,
}

impl Default for HydroSettings {
    fn default() -> Self {
        // Ten draft marks mirrors the labeling convention; refinement tests
        // raise z_stations.
        HydroSettings {
            x_stations: 200,
            z_stations: 10,
            girth_samples: 192,
        }
    }
}

struct Waterplane {
    area: f64,
    moment_x: f64,
    moment_xx: f64,
    i_long: f64,
    x_aft: f64,
    x_fwd: f64,
}

/// Waterplane integrals at height `z_frac` (fraction of depth), LOA units.
fn waterplane(surface: &HullSurface, z_frac: f64, nx: usize) -> Waterplane {
    let (x_aft, x_fwd) = surface.waterline_extent(z_frac);
    let span = x_fwd - x_aft;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    if span > 0.0 {
        let h = span / nx as f64;
        for i in 0..=nx {
            let x = x_aft + span * (i as f64 / nx as f64);
            let y = surface.half_breadth_unit(x, z_frac);
            let w = if i == 0 || i == nx { 0.5 * h } else { h };
            s0 += w * y;
            s1 += w * x * y;
            s2 += w * x * x * y;
            s3 += w * y * y * y;
        }
    }
    Waterplane {
        area: 2.0 * s0,
        moment_x: 2.0 * s1,
        moment_xx: 2.0 * s2,
        i_long: 2.0 / 3.0 * s3,
        x_aft,
        x_fwd,
    }
}

/// Girth of the section at `x` below `draft_frac`, LOA units. Includes the
/// flat of keel; the side arc is summed as a polyline with samples clustered
/// toward the keel where the bilge curve is steepest.
fn girth(surface: &HullSurface, x: f64, draft_frac: f64, samples: usize) -> f64 {
    let k = surface.keel_frac(x);
    if draft_frac <= k {
        return 0.0;
    }
    let c = surface.half_beam_unit() * surface.plan_envelope(x);
    let dd = surface.depth_unit();
    let zeta_top = ((draft_frac - k) / (1.0 - k)).min(1.0);
    let flat = c * surface.section_profile(0.0);
    let mut arc = 0.0;
    let mut prev_y = flat;
    let mut prev_z = dd * k;
    for m in 1..=samples {
        let t = m as f64 / samples as f64;
        let zeta = zeta_top * t * t;
        let y = c * surface.section_profile(zeta);
        let z = dd * (k + zeta * (1.0 - k));
        arc += ((y - prev_y).powi(2) + (z - prev_z).powi(2)).sqrt();
        prev_y = y;
        prev_z = z;
    }
    2.0 * (flat + arc)
}

/// All ten hydrostatic measures of a feasible hull at `draft_fraction` of
/// total depth, using default integration settings.
pub fn hydrostatics(
    v: &DesignVector,
    draft_fraction: f64,
) -> Result<HydroRecord, GeometryError> {
    let surface = HullSurface::feasible(v)?;
    hydrostatics_with(&surface, draft_fraction, &HydroSettings::default())
}

/// Hydrostatics with explicit resolution settings.
pub fn hydrostatics_with(
    surface: &HullSurface,
    draft_fraction: f64,
    settings: &HydroSettings,
) -> Result<HydroRecord, GeometryError> {
    if !(draft_fraction > 0.0 && draft_fraction <= 1.0) {
        return Err(GeometryError::BadDraft(draft_fraction));
    }
    let dd = surface.depth_unit();
    let draft = draft_fraction * dd;
    let nz = settings.z_stations.max(2);
    let nx = settings.x_stations.max(8);

    // Waterplane sweep from baseline to draft; trapezoid in z.
    let mut volume = 0.0;
    let mut mom_x = 0.0;
    let mut mom_z = 0.0;
    let mut top = None;
    for j in 0..nz {
        let f = j as f64 / (nz - 1) as f64;
        let z_frac = draft_fraction * f;
        let wp = waterplane(surface, z_frac, nx);
        let z = z_frac * dd;
        let h = draft / (nz - 1) as f64;
        let w = if j == 0 || j == nz - 1 { 0.5 * h } else { h };
        volume += w * wp.area;
        mom_x += w * wp.moment_x;
        mom_z += w * z * wp.area;
        if j == nz - 1 {
            top = Some(wp);
        }
    }
    let top = top.expect("nz >= 2");

    let waterline_length = top.x_fwd - top.x_aft;
    if waterline_length <= 0.0 || top.area <= 0.0 {
        return Err(GeometryError::Numeric(format!(
            "degenerate waterplane at draft fraction {draft_fraction}"
        )));
    }
    let lcf = top.moment_x / top.area;
    let i_trans = top.moment_xx - top.area * lcf * lcf;

    // Wetted surface by girth integration over the waterline extent.
    let span = top.x_fwd - top.x_aft;
    let h = span / nx as f64;
    let mut ws = 0.0;
    for i in 0..=nx {
        let x = top.x_aft + span * (i as f64 / nx as f64);
        let w = if i == 0 || i == nx { 0.5 * h } else { h };
        ws += w * girth(surface, x, draft_fraction, settings.girth_samples);
    }

    Ok(HydroRecord {
        draft,
        waterline_length,
        waterplane_area: top.area,
        wetted_surface: ws,
        lcf,
        i_long: top.i_long,
        i_trans,
        volume,
        lcb: if volume > 0.0 { mom_x / volume } else { lcf },
        vcb: if volume > 0.0 { mom_z / volume } else { draft },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designspace::DesignVector;

    fn mid() -> DesignVector {
        DesignVector::box_midpoint()
    }

    #[test]
    fn volume_bounded_by_box() {
        let v = mid();
        let rec = hydrostatics(&v, 1.0).unwrap();
        assert!(rec.volume > 0.0);
        assert!(rec.volume <= 2.0 * v.bd() * v.dd());
    }

    #[test]
    fn scale_invariance_is_exact() {
        let mut small = mid();
        small.0[0] = 10.0;
        let mut big = mid();
        big.0[0] = 400.0;
        for draft in [0.25, 0.5, 1.0] {
            let a = hydrostatics(&small, draft).unwrap();
            let b = hydrostatics(&big, draft).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn monotone_in_draft() {
        let v = mid();
        let mut prev_vol = 0.0;
        let mut prev_ws = 0.0;
        for j in 1..=10 {
            let rec = hydrostatics(&v, j as f64 / 10.0).unwrap();
            assert!(rec.volume >= prev_vol);
            assert!(rec.wetted_surface >= prev_ws);
            prev_vol = rec.volume;
            prev_ws = rec.wetted_surface;
        }
    }

    #[test]
    fn coarse_vs_refined_volume() {
        let v = mid();
        let surface = HullSurface::feasible(&v).unwrap();
        let coarse = hydrostatics_with(
            &surface,
            1.0,
            &HydroSettings {
                z_stations: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let fine = hydrostatics_with(
            &surface,
            1.0,
            &HydroSettings {
                z_stations: 200,
                ..Default::default()
            },
        )
        .unwrap();
        let rel = (coarse.volume - fine.volume).abs() / fine.volume;
        assert!(rel < 0.02, "rel = {rel}");
    }

    #[test]
    fn bad_draft_is_rejected() {
        assert!(matches!(
            hydrostatics(&mid(), 0.0),
            Err(GeometryError::BadDraft(_))
        ));
        assert!(matches!(
            hydrostatics(&mid(), 1.5),
            Err(GeometryError::BadDraft(_))
        ));
    }
}
