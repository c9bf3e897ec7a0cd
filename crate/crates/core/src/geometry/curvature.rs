//! Mean Gaussian curvature from finite differences on a surface grid.
//!
//! Principal-plane curvature radii are estimated with central differences:
//! along each grid row projected to the XY plane and each column projected
//! to the YZ plane. The node curvature is `1/(R_XY·R_YZ)` with unsigned
//! radii, area-weighted by the local surface patch and averaged. Flat
//! directions give an infinite radius and contribute zero, so a cylinder
//! averages to zero and a sphere cap to `1/R²`.

use super::surface::HullSurface;
use super::GeometryError;
use crate::designspace::DesignVector;

/// Structured grid of surface points, row-major `[i * nj + j]`;
/// `i` runs along the hull (x), `j` vertically (keel to deck).
#[derive(Debug, Clone)]
pub struct PointGrid {
    pub ni: usize,
    pub nj: usize,
    pub pts: Vec<[f64; 3]>,
}

impl PointGrid {
    pub fn new(ni: usize, nj: usize, pts: Vec<[f64; 3]>) -> Self {
        assert_eq!(pts.len(), ni * nj);
        PointGrid { ni, nj, pts }
    }

    fn at(&self, i: usize, j: usize) -> [f64; 3] {
        self.pts[i * self.nj + j]
    }
}

/// Curvature of a planar parametric curve through three consecutive samples.
fn parametric_curvature(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> f64 {
    let du = [(p2[0] - p0[0]) / 2.0, (p2[1] - p0[1]) / 2.0];
    let ddu = [p2[0] - 2.0 * p1[0] + p0[0], p2[1] - 2.0 * p1[1] + p0[1]];
    let denom = (du[0] * du[0] + du[1] * du[1]).powf(1.5);
    if denom < 1e-300 {
        return 0.0;
    }
    (du[0] * ddu[1] - du[1] * ddu[0]).abs() / denom
}

/// Area-weighted mean of `1/(R_XY·R_YZ)` over the grid interior, in the
/// grid's own length units (`1/L²`).
pub fn mean_gaussian_curvature(grid: &PointGrid) -> Result<f64, GeometryError> {
    if grid.ni < 3 || grid.nj < 3 {
        return Err(GeometryError::DegenerateGrid(format!(
            "need at least 3×3 points, got {}×{}",
            grid.ni, grid.nj
        )));
    }
    let mut weighted = 0.0;
    let mut total_area = 0.0;
    for i in 1..grid.ni - 1 {
        for j in 1..grid.nj - 1 {
            let px = grid.at(i - 1, j);
            let p = grid.at(i, j);
            let nx = grid.at(i + 1, j);
            let pz = grid.at(i, j - 1);
            let nz = grid.at(i, j + 1);
            // Row curve in the XY plane, column curve in the YZ plane.
            let k_xy = parametric_curvature(
                [px[0], px[1]],
                [p[0], p[1]],
                [nx[0], nx[1]],
            );
            let k_yz = parametric_curvature(
                [pz[2], pz[1]],
                [p[2], p[1]],
                [nz[2], nz[1]],
            );
            let tu = [
                (nx[0] - px[0]) / 2.0,
                (nx[1] - px[1]) / 2.0,
                (nx[2] - px[2]) / 2.0,
            ];
            let tv = [
                (nz[0] - pz[0]) / 2.0,
                (nz[1] - pz[1]) / 2.0,
                (nz[2] - pz[2]) / 2.0,
            ];
            let cr = [
                tu[1] * tv[2] - tu[2] * tv[1],
                tu[2] * tv[0] - tu[0] * tv[2],
                tu[0] * tv[1] - tu[1] * tv[0],
            ];
            let area = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
            weighted += k_xy * k_yz * area;
            total_area += area;
        }
    }
    if total_area <= 0.0 {
        return Err(GeometryError::DegenerateGrid(
            "zero surface area".to_string(),
        ));
    }
    Ok(weighted / total_area)
}

/// Shell grid of a hull in LOA units; excludes the deck cap (flat) and the
/// degenerate bow/stern tip stations.
pub fn hull_curvature_grid(surface: &HullSurface, ni: usize, nj: usize) -> PointGrid {
    let dd = surface.depth_unit();
    let mut pts = Vec::with_capacity(ni * nj);
    for i in 0..ni {
        // Stations strictly inside (0, 1).
        let x = (i + 1) as f64 / (ni + 1) as f64;
        let k = surface.keel_frac(x);
        let c = surface.half_beam_unit() * surface.plan_envelope(x);
        for j in 0..nj {
            let zeta = j as f64 / (nj - 1) as f64;
            let y = c * surface.section_profile(zeta);
            let z = dd * (k + zeta * (1.0 - k));
            pts.push([x, y, z]);
        }
    }
    PointGrid::new(ni, nj, pts)
}

/// Mean Gaussian curvature of a feasible hull, normalized by LOA²
/// (computed in LOA units so the result is exactly scale-invariant).
pub fn hull_gaussian_curvature(v: &DesignVector) -> Result<f64, GeometryError> {
    hull_gaussian_curvature_at(v, 64, 64)
}

/// As [`hull_gaussian_curvature`] with an explicit grid resolution.
pub fn hull_gaussian_curvature_at(
    v: &DesignVector,
    ni: usize,
    nj: usize,
) -> Result<f64, GeometryError> {
    let surface = HullSurface::feasible(v)?;
    mean_gaussian_curvature(&hull_curvature_grid(&surface, ni, nj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designspace::DesignVector;

    fn cylinder_grid(n: usize, radius: f64) -> PointGrid {
        // Axis along x, surface y = sqrt(r² − z²) over a band of z.
        let mut pts = Vec::new();
        for i in 0..n {
            let x = i as f64 / (n - 1) as f64;
            for j in 0..n {
                let z = radius * (-0.3 + 0.6 * j as f64 / (n - 1) as f64);
                pts.push([x, (radius * radius - z * z).sqrt(), z]);
            }
        }
        PointGrid::new(n, n, pts)
    }

    fn sphere_cap_grid(n: usize, radius: f64) -> PointGrid {
        // Polar cap as a graph y = sqrt(R² − x² − z²) near the pole, where
        // the coordinate-plane slices are close to normal sections.
        let half = 0.12 * radius;
        let mut pts = Vec::new();
        for i in 0..n {
            let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let z = -half + 2.0 * half * j as f64 / (n - 1) as f64;
                pts.push([x, (radius * radius - x * x - z * z).sqrt(), z]);
            }
        }
        PointGrid::new(n, n, pts)
    }

    #[test]
    fn cylinder_has_zero_gaussian_curvature() {
        let gc = mean_gaussian_curvature(&cylinder_grid(64, 1.0)).unwrap();
        assert!(gc.abs() < 1e-6, "gc = {gc}");
    }

    #[test]
    fn sphere_cap_converges_to_inverse_radius_squared() {
        for radius in [1.0, 2.5] {
            let gc = mean_gaussian_curvature(&sphere_cap_grid(200, radius)).unwrap();
            let expected = 1.0 / (radius * radius);
            let rel = (gc - expected).abs() / expected;
            assert!(rel < 0.01, "radius {radius}: gc = {gc}, rel = {rel}");
        }
    }

    #[test]
    fn degenerate_grid_is_rejected() {
        let g = PointGrid::new(2, 2, vec![[0.0; 3]; 4]);
        assert!(matches!(
            mean_gaussian_curvature(&g),
            Err(GeometryError::DegenerateGrid(_))
        ));
    }

    #[test]
    fn hull_curvature_grid_convergence() {
        let v = DesignVector::box_midpoint();
        let coarse = hull_gaussian_curvature_at(&v, 64, 64).unwrap();
        let fine = hull_gaussian_curvature_at(&v, 256, 256).unwrap();
        assert!(coarse > 0.0);
        let rel = (coarse - fine).abs() / fine.abs();
        assert!(rel < 0.10, "coarse {coarse}, fine {fine}, rel {rel}");
    }

    #[test]
    fn hull_curvature_is_scale_invariant() {
        let mut a = DesignVector::box_midpoint();
        a.0[0] = 20.0;
        let mut b = DesignVector::box_midpoint();
        b.0[0] = 350.0;
        let ga = hull_gaussian_curvature(&a).unwrap();
        let gb = hull_gaussian_curvature(&b).unwrap();
        assert_eq!(ga, gb);
    }
}
