//! Triangle–triangle intersection testing for mesh self-intersection checks.
//!
//! Narrow phase is Möller's interval test with a coplanar 2-D fallback;
//! broad phase is a uniform spatial hash over triangle bounding boxes.
//! Pairs sharing a vertex index are adjacent by construction and excluded.

use super::mesh::HullMesh;
use std::collections::HashMap;

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Interval of the triangle's intersection with the other plane, projected
/// on the line axis. `None` means the triangle lies in the plane.
fn interval(proj: [f64; 3], dist: [f64; 3]) -> Option<(f64, f64)> {
    let (p0, p1, p2) = (proj[0], proj[1], proj[2]);
    let (d0, d1, d2) = (dist[0], dist[1], dist[2]);
    let seg = |va: f64, vb: f64, vc: f64, da: f64, db: f64, dc: f64| {
        let t1 = va + (vb - va) * da / (da - db);
        let t2 = va + (vc - va) * da / (da - dc);
        (t1.min(t2), t1.max(t2))
    };
    if d0 * d1 > 0.0 {
        // 0 and 1 on the same side, 2 alone.
        Some(seg(p2, p0, p1, d2, d0, d1))
    } else if d0 * d2 > 0.0 {
        Some(seg(p1, p0, p2, d1, d0, d2))
    } else if d1 * d2 > 0.0 || d0 != 0.0 {
        Some(seg(p0, p1, p2, d0, d1, d2))
    } else if d1 != 0.0 {
        Some(seg(p1, p0, p2, d1, d0, d2))
    } else if d2 != 0.0 {
        Some(seg(p2, p0, p1, d2, d0, d1))
    } else {
        None
    }
}

fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient2d(q1, q2, p1);
    let d2 = orient2d(q1, q2, p2);
    let d3 = orient2d(p1, p2, q1);
    let d4 = orient2d(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |d: f64, a: [f64; 2], b: [f64; 2], p: [f64; 2]| {
        d == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(d1, q1, q2, p1) || on(d2, q1, q2, p2) || on(d3, p1, p2, q1) || on(d4, p1, p2, q2)
}

fn point_in_tri(p: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let d0 = orient2d(t[0], t[1], p);
    let d1 = orient2d(t[1], t[2], p);
    let d2 = orient2d(t[2], t[0], p);
    let has_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let has_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    !(has_neg && has_pos)
}

fn coplanar_overlap(t1: [V3; 3], t2: [V3; 3], n: V3) -> bool {
    // Project onto the dominant-axis plane of the shared normal.
    let ax = {
        let a = [n[0].abs(), n[1].abs(), n[2].abs()];
        if a[0] >= a[1] && a[0] >= a[2] {
            (1, 2)
        } else if a[1] >= a[2] {
            (0, 2)
        } else {
            (0, 1)
        }
    };
    let p = |v: V3| [v[ax.0], v[ax.1]];
    let a: [[f64; 2]; 3] = [p(t1[0]), p(t1[1]), p(t1[2])];
    let b: [[f64; 2]; 3] = [p(t2[0]), p(t2[1]), p(t2[2])];
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_tri(a[0], b) || point_in_tri(b[0], a)
}

fn norm(v: V3) -> f64 {
    dot(v, v).sqrt()
}

/// Clamp plane distances that are pure rounding noise to exact zero so
/// numerically coplanar triangles take the coplanar branch instead of
/// degenerating the interval construction.
fn snap_zero(d: [f64; 3], scale: f64) -> [f64; 3] {
    let eps = 1e-12 * scale;
    [
        if d[0].abs() < eps { 0.0 } else { d[0] },
        if d[1].abs() < eps { 0.0 } else { d[1] },
        if d[2].abs() < eps { 0.0 } else { d[2] },
    ]
}

fn max_abs_coord(t1: [V3; 3], t2: [V3; 3]) -> f64 {
    let mut m: f64 = 0.0;
    for t in [t1, t2] {
        for p in t {
            for c in p {
                m = m.max(c.abs());
            }
        }
    }
    m
}

/// Exact intersection test between two triangles, touching included.
pub fn tri_tri_intersect(t1: [V3; 3], t2: [V3; 3]) -> bool {
    let coord_scale = max_abs_coord(t1, t2);
    let n2 = cross(sub(t2[1], t2[0]), sub(t2[2], t2[0]));
    let d2 = -dot(n2, t2[0]);
    let dv = snap_zero(
        [
            dot(n2, t1[0]) + d2,
            dot(n2, t1[1]) + d2,
            dot(n2, t1[2]) + d2,
        ],
        norm(n2) * coord_scale,
    );
    if (dv[0] > 0.0 && dv[1] > 0.0 && dv[2] > 0.0)
        || (dv[0] < 0.0 && dv[1] < 0.0 && dv[2] < 0.0)
    {
        return false;
    }
    let n1 = cross(sub(t1[1], t1[0]), sub(t1[2], t1[0]));
    let d1 = -dot(n1, t1[0]);
    let du = snap_zero(
        [
            dot(n1, t2[0]) + d1,
            dot(n1, t2[1]) + d1,
            dot(n1, t2[2]) + d1,
        ],
        norm(n1) * coord_scale,
    );
    if (du[0] > 0.0 && du[1] > 0.0 && du[2] > 0.0)
        || (du[0] < 0.0 && du[1] < 0.0 && du[2] < 0.0)
    {
        return false;
    }
    let dir = cross(n1, n2);
    let abs_dir = [dir[0].abs(), dir[1].abs(), dir[2].abs()];
    let axis = if abs_dir[0] >= abs_dir[1] && abs_dir[0] >= abs_dir[2] {
        0
    } else if abs_dir[1] >= abs_dir[2] {
        1
    } else {
        2
    };
    let proj1 = [t1[0][axis], t1[1][axis], t1[2][axis]];
    let proj2 = [t2[0][axis], t2[1][axis], t2[2][axis]];
    match (interval(proj1, dv), interval(proj2, du)) {
        (Some(i1), Some(i2)) => i1.0 <= i2.1 && i2.0 <= i1.1,
        _ => coplanar_overlap(t1, t2, n1),
    }
}

fn tri_of(mesh: &HullMesh, f: usize) -> [V3; 3] {
    let idx = mesh.faces[f];
    [
        mesh.vertices[idx[0] as usize],
        mesh.vertices[idx[1] as usize],
        mesh.vertices[idx[2] as usize],
    ]
}

fn shares_vertex(a: [u32; 3], b: [u32; 3]) -> bool {
    a.iter().any(|v| b.contains(v))
}

/// True if any pair of non-adjacent triangles intersects.
pub fn has_self_intersections(mesh: &HullMesh) -> bool {
    if mesh.faces.is_empty() {
        return false;
    }
    // Bounding boxes and a cell size tied to the median triangle extent.
    let mut boxes = Vec::with_capacity(mesh.faces.len());
    let mut extents = Vec::with_capacity(mesh.faces.len());
    for f in 0..mesh.faces.len() {
        let t = tri_of(mesh, f);
        let mut lo = t[0];
        let mut hi = t[0];
        for p in &t[1..] {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        extents.push((hi[0] - lo[0]).max(hi[1] - lo[1]).max(hi[2] - lo[2]));
        boxes.push((lo, hi));
    }
    let mut sorted = extents.clone();
    sorted.sort_by(f64::total_cmp);
    let cell = (sorted[sorted.len() / 2] * 2.0).max(1e-9);

    let key_of = |p: V3| -> (i64, i64, i64) {
        (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
            (p[2] / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    for (f, (lo, hi)) in boxes.iter().enumerate() {
        let a = key_of(*lo);
        let b = key_of(*hi);
        for cx in a.0..=b.0 {
            for cy in a.1..=b.1 {
                for cz in a.2..=b.2 {
                    grid.entry((cx, cy, cz)).or_default().push(f as u32);
                }
            }
        }
    }

    for (cell_key, members) in &grid {
        for (ai, &fa) in members.iter().enumerate() {
            for &fb in &members[ai + 1..] {
                let (fa, fb) = (fa.min(fb) as usize, fa.max(fb) as usize);
                if shares_vertex(mesh.faces[fa], mesh.faces[fb]) {
                    continue;
                }
                // Bounding boxes must overlap, and this cell must be the
                // first cell of the overlap region so pairs test once.
                let (lo_a, hi_a) = boxes[fa];
                let (lo_b, hi_b) = boxes[fb];
                let mut lo = [0.0; 3];
                let mut disjoint = false;
                for k in 0..3 {
                    lo[k] = lo_a[k].max(lo_b[k]);
                    if lo[k] > hi_a[k].min(hi_b[k]) {
                        disjoint = true;
                    }
                }
                if disjoint || key_of(lo) != *cell_key {
                    continue;
                }
                if tri_tri_intersect(tri_of(mesh, fa), tri_of(mesh, fb)) {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_triangles_do_not_intersect() {
        let a = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let b = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        assert!(!tri_tri_intersect(a, b));
    }

    #[test]
    fn crossing_triangles_intersect() {
        let a = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let b = [[0.5, 0.5, -1.0], [0.5, 0.5, 1.0], [1.5, 1.5, 1.0]];
        assert!(tri_tri_intersect(a, b));
    }

    #[test]
    fn coplanar_overlapping_and_disjoint() {
        let a = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let b = [[0.2, 0.2, 0.0], [1.0, 0.2, 0.0], [0.2, 1.0, 0.0]];
        let c = [[5.0, 5.0, 0.0], [6.0, 5.0, 0.0], [5.0, 6.0, 0.0]];
        assert!(tri_tri_intersect(a, b));
        assert!(!tri_tri_intersect(a, c));
    }

    #[test]
    fn near_miss_does_not_intersect() {
        let a = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let b = [[0.0, 0.0, 1e-12], [1.0, 0.0, 1e-12], [0.0, 1.0, 1e-12]];
        assert!(!tri_tri_intersect(a, b));
    }
}
