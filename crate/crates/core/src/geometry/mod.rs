//! Hull geometry: surface evaluation, watertight meshes, hydrostatics,
//! Gaussian curvature and the MaxBox inscribed-prism measure.

mod curvature;
mod hydrostatics;
mod intersect;
mod maxbox;
mod mesh;
mod surface;

pub use curvature::{
    hull_curvature_grid, hull_gaussian_curvature, hull_gaussian_curvature_at,
    mean_gaussian_curvature, PointGrid,
};
pub use hydrostatics::{hydrostatics, hydrostatics_with, HydroRecord, HydroSettings};
pub use intersect::{has_self_intersections, tri_tri_intersect};
pub use maxbox::{maxbox, maxbox_with, BoxRecord, MaxBoxSettings};
pub use mesh::{gen_mesh, gen_mesh_tolerant, mesh_feasibility, write_binary_stl, HullMesh};
pub use surface::{half_breadth, HullSurface};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("design vector is infeasible: violates {0:?}")]
    Infeasible(Vec<&'static str>),
    #[error("design vector outside sampling box: {0}")]
    OutOfBox(#[from] crate::designspace::DesignSpaceError),
    #[error("surface argument {name} = {value} outside [0, 1]")]
    ArgOutOfRange { name: &'static str, value: f64 },
    #[error("mesh resolution {0}×{1} too coarse (need at least 8×8)")]
    ResolutionTooCoarse(usize, usize),
    #[error("draft fraction {0} outside (0, 1]")]
    BadDraft(f64),
    #[error("degenerate point grid: {0}")]
    DegenerateGrid(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}
