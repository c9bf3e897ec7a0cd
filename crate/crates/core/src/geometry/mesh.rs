//! Closed triangle meshes of hull surfaces.
//!
//! The shell is gridded in `(x, ζ)` so keel-rise regions stay uniformly
//! resolved, mirrored across the centerplane `y = 0`, and closed with a
//! flat-of-keel strip and a deck cap. Vertices on the centerplane are welded
//! by construction (shared indices, no epsilon matching), so a feasible hull
//! meshes to a closed genus-0 surface at any resolution.

use super::intersect::has_self_intersections;
use super::surface::HullSurface;
use super::GeometryError;
use crate::designspace::DesignVector;
use std::collections::HashMap;
use std::io::Write;

/// Triangle surface mesh with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct HullMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
    pub source: DesignVector,
    pub nx: usize,
    pub nz: usize,
}

impl HullMesh {
    /// The raw surface point cloud (mesh vertices, units meters).
    pub fn point_cloud(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// Signed enclosed volume via the divergence theorem; positive for
    /// outward-oriented faces.
    pub fn volume(&self) -> f64 {
        let mut six_v = 0.0;
        for f in &self.faces {
            let a = self.vertices[f[0] as usize];
            let b = self.vertices[f[1] as usize];
            let c = self.vertices[f[2] as usize];
            six_v += a[0] * (b[1] * c[2] - b[2] * c[1])
                - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]);
        }
        six_v / 6.0
    }

    /// `V − E + F` with undirected edge counting.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashMap::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0u32) += 1;
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// True when every undirected edge has exactly two incident faces and
    /// each directed half-edge appears exactly once (consistent orientation).
    pub fn is_watertight(&self) -> bool {
        let mut directed = HashMap::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                *directed.entry((a, b)).or_insert(0u32) += 1;
            }
        }
        directed.values().all(|&c| c == 1)
            && directed
                .keys()
                .all(|&(a, b)| directed.contains_key(&(b, a)))
    }
}

struct MeshBuilder {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[u32; 3]>,
}

impl MeshBuilder {
    fn new() -> Self {
        MeshBuilder {
            vertices: Vec::new(),
            faces: Vec::new(),
        }
    }

    fn vertex(&mut self, p: [f64; 3]) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    fn tri(&mut self, a: u32, b: u32, c: u32) {
        if a != b && b != c && a != c {
            self.faces.push([a, b, c]);
        }
    }

    fn quad(&mut self, a: u32, b: u32, c: u32, d: u32) {
        self.tri(a, b, c);
        self.tri(a, c, d);
    }
}

fn build_mesh(surface: &HullSurface, nx: usize, nz: usize) -> HullMesh {
    let loa = surface.loa();
    let depth = surface.depth();
    let mut mb = MeshBuilder::new();

    // Per-station vertex ids: starboard grid, port grid (welded where the
    // half-breadth is exactly zero), and the keel centerline.
    let mut star = vec![vec![0u32; nz + 1]; nx + 1];
    let mut port = vec![vec![0u32; nz + 1]; nx + 1];
    let mut keel = vec![0u32; nx + 1];

    for i in 0..=nx {
        let x = i as f64 / nx as f64;
        let xm = x * loa;
        let k = surface.keel_frac(x);
        let c = surface.loa() * surface.half_beam_unit() * surface.plan_envelope(x);
        for j in 0..=nz {
            let zeta = j as f64 / nz as f64;
            // Keep the deck row exactly planar so the cap is flat.
            let z_frac = if j == nz { 1.0 } else { k + zeta * (1.0 - k) };
            let z = depth * z_frac;
            let y = c * surface.section_profile(zeta);
            let s = mb.vertex([xm, y, z]);
            star[i][j] = s;
            port[i][j] = if y == 0.0 { s } else { mb.vertex([xm, -y, z]) };
        }
        keel[i] = if mb.vertices[star[i][0] as usize][1] == 0.0 {
            star[i][0]
        } else {
            mb.vertex([xm, 0.0, depth * k])
        };
    }

    for i in 0..nx {
        // Side shell, outward +y starboard / −y port.
        for j in 0..nz {
            let (a, b, c, d) = (star[i][j], star[i + 1][j], star[i + 1][j + 1], star[i][j + 1]);
            mb.quad(a, d, c, b);
            let (a, b, c, d) = (port[i][j], port[i + 1][j], port[i + 1][j + 1], port[i][j + 1]);
            mb.quad(a, b, c, d);
        }
        // Flat-of-keel strip, outward −z.
        mb.quad(keel[i], star[i][0], star[i + 1][0], keel[i + 1]);
        mb.quad(keel[i], keel[i + 1], port[i + 1][0], port[i][0]);
        // Deck cap, outward +z.
        mb.quad(star[i][nz], port[i][nz], port[i + 1][nz], star[i + 1][nz]);
    }

    // Where a welded row meets a welded column (keel flat of zero width at a
    // tip), the mirrored quads emit coincident opposite-winding triangles.
    // Such zero-thickness flaps cancel pairwise; drop them, then drop any
    // vertices they orphaned.
    remove_reversed_duplicates(&mut mb.faces);
    compact_vertices(&mut mb.vertices, &mut mb.faces);

    HullMesh {
        vertices: mb.vertices,
        faces: mb.faces,
        source: *surface.source(),
        nx,
        nz,
    }
}

fn compact_vertices(vertices: &mut Vec<[f64; 3]>, faces: &mut [[u32; 3]]) {
    let mut used = vec![false; vertices.len()];
    for f in faces.iter() {
        for &i in f {
            used[i as usize] = true;
        }
    }
    if used.iter().all(|&u| u) {
        return;
    }
    let mut remap = vec![u32::MAX; vertices.len()];
    let mut kept = Vec::with_capacity(vertices.len());
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = kept.len() as u32;
            kept.push(vertices[i]);
        }
    }
    for f in faces.iter_mut() {
        for i in f.iter_mut() {
            *i = remap[*i as usize];
        }
    }
    *vertices = kept;
}

fn remove_reversed_duplicates(faces: &mut Vec<[u32; 3]>) {
    let mut seen: HashMap<[u32; 3], Vec<usize>> = HashMap::new();
    for (idx, f) in faces.iter().enumerate() {
        let mut key = *f;
        key.sort_unstable();
        seen.entry(key).or_default().push(idx);
    }
    let mut drop = Vec::new();
    for group in seen.values() {
        if group.len() == 2 {
            let a = faces[group[0]];
            let b = faces[group[1]];
            let reversed = (0..3).any(|r| {
                (0..3).all(|k| a[k] == b[(r + 3 - k) % 3])
            });
            if reversed {
                drop.extend_from_slice(group);
            }
        }
    }
    if !drop.is_empty() {
        drop.sort_unstable();
        for &idx in drop.iter().rev() {
            faces.remove(idx);
        }
    }
}

/// Closed mesh of a feasible hull from an `(nx × nz)` surface grid.
pub fn gen_mesh(v: &DesignVector, nx: usize, nz: usize) -> Result<HullMesh, GeometryError> {
    if nx < 8 || nz < 8 {
        return Err(GeometryError::ResolutionTooCoarse(nx, nz));
    }
    let surface = HullSurface::feasible(v)?;
    Ok(build_mesh(&surface, nx, nz))
}

/// Mesh any in-box vector through the same discretization, without the
/// feasibility gate. Constraint-violating vectors may produce open or
/// self-intersecting meshes; that is the point of the agreement studies.
pub fn gen_mesh_tolerant(v: &DesignVector, nx: usize, nz: usize) -> HullMesh {
    build_mesh(&HullSurface::tolerant(v), nx.max(2), nz.max(2))
}

/// Mesh-level feasibility: watertight and free of self-intersections
/// between non-adjacent triangles.
pub fn mesh_feasibility(mesh: &HullMesh) -> bool {
    mesh.is_watertight() && !has_self_intersections(mesh)
}

/// Write the mesh as binary STL: 80-byte header, little-endian, meters.
pub fn write_binary_stl<W: Write>(mesh: &HullMesh, mut out: W) -> std::io::Result<()> {
    let mut header = [0u8; 80];
    let tag = b"shipgen hull mesh";
    header[..tag.len()].copy_from_slice(tag);
    out.write_all(&header)?;
    out.write_all(&(mesh.faces.len() as u32).to_le_bytes())?;
    for f in &mesh.faces {
        let a = mesh.vertices[f[0] as usize];
        let b = mesh.vertices[f[1] as usize];
        let c = mesh.vertices[f[2] as usize];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let mut n = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 0.0 {
            n = [n[0] / len, n[1] / len, n[2] / len];
        }
        for val in n {
            out.write_all(&(val as f32).to_le_bytes())?;
        }
        for p in [a, b, c] {
            for val in p {
                out.write_all(&(val as f32).to_le_bytes())?;
            }
        }
        out.write_all(&0u16.to_le_bytes())?;
    }
    Ok(())
}
