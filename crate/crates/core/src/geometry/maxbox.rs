//! Largest rectangular prism that can be lowered vertically into the hull
//! through the deck waterplane.
//!
//! The box is open at the deck: it spans `x ∈ [x0, x0+l]`, `y ∈ [−w, w]`,
//! and reaches from the deck down a depth `d`. Containment is enforced by a
//! penalty on the deepest sample-point penetration, optimized with a
//! multi-start Nelder–Mead simplex, and the returned incumbent is shrunk
//! until every sample point is inside the hull. All quantities are in LOA
//! units.

use super::surface::HullSurface;
use super::GeometryError;
use crate::designspace::DesignVector;
use crate::rng::derive_stream;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Inscribed-box result, LOA-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    /// Aft end of the box.
    pub x0: f64,
    pub length: f64,
    pub half_width: f64,
    pub depth: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MaxBoxSettings {
    pub starts: usize,
    pub max_iter: usize,
    /// Longitudinal containment samples along each box edge.
    pub length_samples: usize,
}

impl Default for MaxBoxSettings {
    fn default() -> Self {
        MaxBoxSettings {
            starts: 16,
            max_iter: 2000,
            length_samples: 17,
        }
    }
}

/// Deepest penetration of any containment sample point, in LOA units;
/// zero means the box is inside the hull.
fn penetration(surface: &HullSurface, p: &[f64; 4], samples: usize) -> f64 {
    let (x0, l, w, d) = (p[0], p[1], p[2], p[3]);
    let dd = surface.depth_unit();
    let mut pen: f64 = 0.0;
    pen = pen.max(-x0).max(x0 + l - 1.0).max(-l).max(-w);
    pen = pen.max(-d).max(d - dd);
    if pen.is_nan() {
        return f64::INFINITY;
    }
    let z_bot_frac = (dd - d.min(dd)) / dd;
    for s in 0..samples {
        let x = x0 + l * s as f64 / (samples - 1) as f64;
        if !(0.0..=1.0).contains(&x) {
            continue; // already penalized through the bounds terms
        }
        // Bottom face must clear the local keel and fit within the section.
        let keel = surface.keel_frac(x);
        pen = pen.max((keel - z_bot_frac) * dd);
        pen = pen.max(w - surface.half_breadth_unit(x, z_bot_frac));
    }
    pen
}

fn objective(surface: &HullSurface, p: &[f64; 4], samples: usize) -> f64 {
    let volume = p[1] * 2.0 * p[2] * p[3];
    -volume + 1.0e3 * penetration(surface, p, samples)
}

/// One Nelder–Mead run with standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 0.5, 0.5); stops when the simplex volume falls below
/// 1e−12 or after `max_iter` iterations.
fn nelder_mead(
    surface: &HullSurface,
    start: [f64; 4],
    settings: &MaxBoxSettings,
) -> ([f64; 4], f64) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let n = 4;
    let f = |p: &[f64; 4]| objective(surface, p, settings.length_samples);

    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(n + 1);
    simplex.push((start, f(&start)));
    for k in 0..n {
        let mut p = start;
        p[k] += 0.08;
        simplex.push((p, f(&p)));
    }

    for _ in 0..settings.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        // Simplex volume = |det of edge matrix| / n!
        let best = simplex[0].0;
        let mut m = [[0.0; 4]; 4];
        for r in 0..n {
            for c in 0..n {
                m[r][c] = simplex[r + 1].0[c] - best[c];
            }
        }
        if det4(&m).abs() / 24.0 < 1e-12 {
            break;
        }

        let worst = simplex[n];
        let mut centroid = [0.0; 4];
        for p in &simplex[..n] {
            for k in 0..n {
                centroid[k] += p.0[k] / n as f64;
            }
        }
        let mut reflected = [0.0; 4];
        for k in 0..n {
            reflected[k] = centroid[k] + ALPHA * (centroid[k] - worst.0[k]);
        }
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let mut expanded = [0.0; 4];
            for k in 0..n {
                expanded[k] = centroid[k] + GAMMA * (reflected[k] - centroid[k]);
            }
            let fe = f(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let mut contracted = [0.0; 4];
            for k in 0..n {
                contracted[k] = centroid[k] + RHO * (worst.0[k] - centroid[k]);
            }
            let fc = f(&contracted);
            if fc < worst.1 {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    for k in 0..n {
                        entry.0[k] = best[k] + SIGMA * (entry.0[k] - best[k]);
                    }
                    entry.1 = f(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let mut pivot = col;
        for r in col + 1..4 {
            if a[r][col].abs() > a[pivot][col].abs() {
                pivot = r;
            }
        }
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let factor = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    det
}

/// Shrink `(l, w, d)` about the box's longitudinal center until every
/// containment sample is inside the hull.
fn enforce_containment(
    surface: &HullSurface,
    p: [f64; 4],
    samples: usize,
) -> [f64; 4] {
    let clamp = |p: &[f64; 4]| -> [f64; 4] {
        let dd = surface.depth_unit();
        let l = p[1].max(0.0).min(1.0);
        let x0 = p[0].max(0.0).min(1.0 - l);
        [x0, l, p[2].max(0.0), p[3].max(0.0).min(dd)]
    };
    let scaled = |t: f64| -> [f64; 4] {
        let xc = p[0] + 0.5 * p[1];
        let l = p[1] * t;
        clamp(&[xc - 0.5 * l, l, p[2] * t, p[3] * t])
    };
    let base = clamp(&p);
    if penetration(surface, &base, samples) <= 0.0 {
        return base;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..80 {
        let t = 0.5 * (lo + hi);
        if penetration(surface, &scaled(t), samples) <= 0.0 {
            lo = t;
        } else {
            hi = t;
        }
    }
    scaled(lo)
}

/// Maximize the inscribed open-top box of a feasible hull.
pub fn maxbox(v: &DesignVector, seed: u64) -> Result<BoxRecord, GeometryError> {
    let surface = HullSurface::feasible(v)?;
    Ok(maxbox_with(&surface, seed, &MaxBoxSettings::default()))
}

/// As [`maxbox`], with explicit settings. The best penalized objective over
/// the multi-starts is kept, so the returned volume is non-decreasing in the
/// number of starts.
pub fn maxbox_with(
    surface: &HullSurface,
    seed: u64,
    settings: &MaxBoxSettings,
) -> BoxRecord {
    let v = surface.source();
    let dd = surface.depth_unit();
    let mut rng = derive_stream(seed, "geometry.maxbox", 0);

    let mut best: Option<([f64; 4], f64)> = None;
    for start_idx in 0..settings.starts {
        let start = if start_idx == 0 {
            // Deterministic midbody guess.
            let l = (1.0 - v.lb() - v.ls()).max(0.1) * 0.8;
            [v.ls(), l, 0.5 * v.bd(), 0.6 * dd]
        } else {
            [
                rng.random::<f64>() * 0.8,
                0.05 + rng.random::<f64>() * 0.55,
                (0.1 + rng.random::<f64>() * 0.9) * v.bd(),
                (0.2 + rng.random::<f64>() * 0.8) * dd,
            ]
        };
        let candidate = nelder_mead(surface, start, settings);
        if best.is_none() || candidate.1 < best.unwrap().1 {
            best = Some(candidate);
        }
    }
    let incumbent = enforce_containment(surface, best.unwrap().0, settings.length_samples);
    BoxRecord {
        x0: incumbent[0],
        length: incumbent[1],
        half_width: incumbent[2],
        depth: incumbent[3],
        volume: incumbent[1] * 2.0 * incumbent[2] * incumbent[3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designspace::DesignVector;
    use crate::geometry::hydrostatics;

    fn mid() -> DesignVector {
        DesignVector::box_midpoint()
    }

    #[test]
    fn returned_box_is_contained() {
        let v = mid();
        let surface = HullSurface::feasible(&v).unwrap();
        let rec = maxbox(&v, 42).unwrap();
        let p = [rec.x0, rec.length, rec.half_width, rec.depth];
        assert!(penetration(&surface, &p, 33) <= 1e-12);
        assert!(rec.volume > 0.0);
    }

    #[test]
    fn box_volume_is_a_fraction_of_hull_volume() {
        let v = mid();
        let rec = maxbox(&v, 42).unwrap();
        let hull = hydrostatics(&v, 1.0).unwrap().volume;
        assert!(rec.volume > 0.0 && rec.volume < hull);
    }

    #[test]
    fn deterministic_given_seed_and_monotone_in_starts() {
        let v = mid();
        let surface = HullSurface::feasible(&v).unwrap();
        let a = maxbox(&v, 7).unwrap();
        let b = maxbox(&v, 7).unwrap();
        assert_eq!(a, b);
        let few = maxbox_with(
            &surface,
            7,
            &MaxBoxSettings {
                starts: 4,
                ..Default::default()
            },
        );
        let many = maxbox_with(
            &surface,
            7,
            &MaxBoxSettings {
                starts: 16,
                ..Default::default()
            },
        );
        assert!(many.volume >= few.volume - 1e-12);
    }

    #[test]
    fn coarse_grid_search_never_beats_by_much() {
        let v = mid();
        let surface = HullSurface::feasible(&v).unwrap();
        let rec = maxbox(&v, 3).unwrap();
        let dd = surface.depth_unit();
        let mut best_grid = 0.0f64;
        let n = 8;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let p = [
                            a as f64 / n as f64,
                            0.05 + 0.9 * b as f64 / n as f64,
                            v.bd() * (c as f64 + 1.0) / n as f64,
                            dd * (d as f64 + 1.0) / n as f64,
                        ];
                        if penetration(&surface, &p, 17) <= 0.0 {
                            best_grid = best_grid.max(p[1] * 2.0 * p[2] * p[3]);
                        }
                    }
                }
            }
        }
        assert!(
            best_grid <= rec.volume * 1.05,
            "grid {best_grid} vs opt {}",
            rec.volume
        );
    }

    #[test]
    fn infeasible_vector_is_rejected() {
        let mut v = mid();
        v.0[7] = -0.1;
        assert!(matches!(maxbox(&v, 1), Err(GeometryError::Infeasible(_))));
    }
}
