//! Michell-integral wave resistance over the 32-condition speed/draft grid.
//!
//! The thin-ship wave resistance is
//!
//! ```text
//! R_w = (4 ρ g² / (π U²)) ∫₁^∞ (I² + J²) λ² / √(λ² − 1) dλ
//! I(λ) = ∬ (∂Y/∂x) e^{k₀λ²z} cos(k₀λx) dx dz,   J the sine analogue,
//! ```
//!
//! with `k₀ = g/U²`, `z ≤ 0` below the waterline and `Y` the local
//! half-breadth. `∂Y/∂x` is formed by central differences on an `(x, z)`
//! centerplane grid of the submerged region; the λ-integral is evaluated
//! with the substitution `λ = sec θ` (which removes the root singularity)
//! by composite Gauss–Legendre, truncated where the exponential envelope at
//! the mid-draft depth falls below a fixed fraction of its `θ = 0` value.

use crate::designspace::DesignVector;
use crate::geometry::{GeometryError, HullSurface};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sea-water density, kg/m³.
pub const RHO_WATER: f64 = 1025.0;
/// Gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;

/// Draft fractions of total depth for the drag grid rows.
pub const DRAFT_FRACTIONS: [f64; 4] = [0.25, 0.33, 0.50, 0.67];
/// Froude numbers for the drag grid columns.
pub const FROUDE_NUMBERS: [f64; 8] = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45];

#[derive(Debug, Error)]
pub enum HydroError {
    #[error("invalid Froude number {0}")]
    BadFroude(f64),
    #[error("invalid length {0}")]
    BadLength(f64),
    #[error("invalid speed {0}")]
    BadSpeed(f64),
    #[error("zero waterline length at draft fraction {0}")]
    ZeroWaterline(f64),
    #[error("wave drag coefficient must be positive, got {0}")]
    NonPositiveCoefficient(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Quadrature resolution for the Michell integral.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MichellSettings {
    /// Longitudinal panels of the centerplane grid.
    pub x_panels: usize,
    /// Vertical panels of the centerplane grid.
    pub z_panels: usize,
    /// Total Gauss–Legendre nodes over θ (8 per panel).
    pub theta_nodes: usize,
    /// Envelope truncation threshold relative to θ = 0.
    pub envelope_cut: f64,
}

impl Default for MichellSettings {
    fn default() -> Self {
        MichellSettings {
            x_panels: 128,
            z_panels: 64,
            theta_nodes: 256,
            envelope_cut: 1e-8,
        }
    }
}

/// Wave drag coefficients at the 4×8 draft/Froude grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragGrid {
    pub cw: [[f64; 8]; 4],
}

impl DragGrid {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.cw.iter().flat_map(|row| row.iter().copied())
    }

    /// Column names for CSV serialization: `cw_d{25|33|50|67}_f{10..45}`.
    pub fn column_names() -> Vec<String> {
        let drafts = [25, 33, 50, 67];
        let mut names = Vec::with_capacity(32);
        for d in drafts {
            for f in (10..=45).step_by(5) {
                names.push(format!("cw_d{d}_f{f}"));
            }
        }
        names
    }

    pub fn flat(&self) -> Vec<f64> {
        self.iter().collect()
    }

    pub fn from_flat(values: &[f64]) -> Option<Self> {
        if values.len() != 32 {
            return None;
        }
        let mut cw = [[0.0; 8]; 4];
        for (k, &v) in values.iter().enumerate() {
            cw[k / 8][k % 8] = v;
        }
        Some(DragGrid { cw })
    }
}

/// Hull speed from Froude number: `U = Fn·√(gL)`.
pub fn froude_speed(froude: f64, length: f64) -> Result<f64, HydroError> {
    if !(froude >= 0.0) {
        return Err(HydroError::BadFroude(froude));
    }
    if !(length > 0.0) {
        return Err(HydroError::BadLength(length));
    }
    Ok(froude * (GRAVITY * length).sqrt())
}

/// Wave drag coefficient `Cw = Rw / (½ ρ U² LOA²)`.
pub fn wave_coefficient(rw: f64, speed: f64, loa: f64) -> Result<f64, HydroError> {
    if !(speed > 0.0) {
        return Err(HydroError::BadSpeed(speed));
    }
    if !(loa > 0.0) {
        return Err(HydroError::BadLength(loa));
    }
    Ok(rw / (0.5 * RHO_WATER * speed * speed * loa * loa))
}

// 8-point Gauss–Legendre nodes and weights on [−1, 1].
const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Prepared centerplane data for one (hull, draft) pair.
///
/// The half-breadth is split as `Y = Y_cont + Bk·c(x)·1{z ≥ z_keel(x)}`:
/// `Y_cont` vanishes continuously at the keel, so its `∂Y/∂x` is formed by
/// central differences on the grid, while the flat-of-keel step — whose
/// x-derivative carries both a smooth term and a delta line along the keel
/// curve — is integrated in closed form against the wave kernel. Without
/// the split, the grid places the keel jump with O(h) position error,
/// which turns into an O(k·h) phase error that refinement cannot tame at
/// high wave numbers.
pub(crate) struct CenterplaneGrid {
    pub yx: Vec<f64>, // nx × nz central differences of Y_cont, row-major
    pub xs: Vec<f64>,
    pub zs: Vec<f64>, // z ≤ 0, z = 0 at the waterline
    pub hx: f64,
    pub nx: usize,
    pub nz: usize,
    draft: f64,
    /// Quadrature nodes of the smooth step term: (x in meters, weighted
    /// coefficient `Bk·c'(x)·w·dx`, keel z in meters, ≤ 0).
    step_smooth_nodes: Vec<(f64, f64, f64)>,
    /// Quadrature nodes of the keel-crossing delta term: (x in meters,
    /// signed weighted height `±Bk·c(x)·dz/du·w`, crossing z in meters).
    step_jump_nodes: Vec<(f64, f64, f64)>,
}

pub(crate) fn centerplane_grid(
    surface: &HullSurface,
    draft_fraction: f64,
    settings: &MichellSettings,
) -> CenterplaneGrid {
    let loa = surface.loa();
    let depth = surface.depth();
    let t = draft_fraction * depth;
    let nx = settings.x_panels;
    let nz = settings.z_panels;
    let hx = loa / (nx - 1) as f64;
    let hz = t / (nz - 1) as f64;

    let xs: Vec<f64> = (0..nx).map(|i| hx * i as f64).collect();
    let zs: Vec<f64> = (0..nz).map(|j| -t + hz * j as f64).collect();

    let v = surface.source();
    let bk = v.bk().max(0.0);
    let half_beam = loa * v.bd();

    // Continuous part of the half-breadth: the flat-of-keel step removed.
    let mut y = vec![0.0; nx * nz];
    for i in 0..nx {
        let x_frac = (xs[i] / loa).clamp(0.0, 1.0);
        let keel = surface.keel_frac(x_frac);
        let plan = surface.plan_envelope(x_frac);
        for j in 0..nz {
            let z_frac = (zs[j] + t) / depth;
            let full = surface.half_breadth(x_frac, z_frac);
            let step = if z_frac >= keel {
                bk * half_beam * plan
            } else {
                0.0
            };
            y[i * nz + j] = full - step;
        }
    }
    // Central differences inside, second-order one-sided stencils at the
    // ends (Y vanishes at both hull ends, so the boundary rows reduce to
    // combinations of the first interior values).
    let mut yx = vec![0.0; nx * nz];
    for j in 0..nz {
        yx[j] = (4.0 * y[nz + j] - y[2 * nz + j]) / (2.0 * hx);
        for i in 1..nx - 1 {
            yx[i * nz + j] = (y[(i + 1) * nz + j] - y[(i - 1) * nz + j]) / (2.0 * hx);
        }
        yx[(nx - 1) * nz + j] =
            -(4.0 * y[(nx - 2) * nz + j] - y[(nx - 3) * nz + j]) / (2.0 * hx);
    }

    let step_smooth_nodes = step_smooth_nodes(surface, bk, half_beam, t);
    let step_jump_nodes = step_jump_nodes(surface, bk, half_beam, t);

    CenterplaneGrid {
        yx,
        xs,
        zs,
        hx,
        nx,
        nz,
        draft: t,
        step_smooth_nodes,
        step_jump_nodes,
    }
}

/// Plan envelope derivative of the tolerant product form at normalized x.
fn plan_slope(surface: &HullSurface, x: f64) -> f64 {
    let v = surface.source();
    let (ls, lb, ps, pb) = (v.ls(), v.lb(), v.ps(), v.pb());
    let (mut stern, mut d_stern) = (1.0, 0.0);
    if x < ls {
        let u = (ls - x) / ls;
        stern = 1.0 - u.powf(ps);
        d_stern = ps * u.powf(ps - 1.0) / ls;
    }
    let (mut bow, mut d_bow) = (1.0, 0.0);
    if x > 1.0 - lb {
        let u = (x - (1.0 - lb)) / lb;
        bow = 1.0 - u.powf(pb);
        d_bow = -pb * u.powf(pb - 1.0) / lb;
    }
    d_stern * bow + stern * d_bow
}

/// Nodes of `∬ Bk·c'(x)·1{z ≥ z_keel(x)}·e^{az}·e^{ikx} dz dx`: only the
/// tapers contribute (`c' = 0` on the midbody); each side is integrated in
/// `u = w²`, which absorbs the `u^{p−1}` edge singularity of the plan
/// slope. The z-column against `e^{az}` is exact at evaluation time.
fn step_smooth_nodes(
    surface: &HullSurface,
    bk: f64,
    half_beam: f64,
    draft: f64,
) -> Vec<(f64, f64, f64)> {
    if bk == 0.0 {
        return Vec::new();
    }
    let loa = surface.loa();
    let depth = surface.depth();
    let mut nodes = Vec::new();
    let v = surface.source();
    let sides: [(f64, f64); 2] = [(v.ls(), -v.ls()), (1.0 - v.lb(), v.lb())];
    for (origin, span) in sides {
        if span == 0.0 {
            continue;
        }
        let panels = 24;
        for p in 0..panels {
            let w_lo = p as f64 / panels as f64;
            let w_hi = (p + 1) as f64 / panels as f64;
            for (gx, gw) in GL16_X.iter().zip(GL16_W.iter()) {
                let w = 0.5 * (w_lo + w_hi) + 0.5 * (w_hi - w_lo) * gx;
                let weight = 0.5 * (w_hi - w_lo) * gw;
                let u = w * w;
                let du = 2.0 * w;
                // Stern: x = ls·(1−u); bow: x = (1−lb) + lb·u.
                let x = if span < 0.0 { origin * (1.0 + span / origin * u) } else { origin + span * u };
                let x = x.clamp(0.0, 1.0);
                let z_keel = surface.keel_frac(x) * depth - draft;
                if z_keel >= 0.0 {
                    continue;
                }
                let c_prime = bk * half_beam * plan_slope(surface, x);
                // dx/du in meters, orientation folded into the sign.
                let dxm = span * loa * du;
                nodes.push((x * loa, c_prime * dxm * weight, z_keel));
            }
        }
    }
    nodes
}

/// Nodes of the keel-crossing delta term, parameterized by the taper
/// coordinate with `z(u) = r·u²·D − T`; a bow crossing is a drop (−), a
/// stern crossing a rise (+).
fn step_jump_nodes(
    surface: &HullSurface,
    bk: f64,
    half_beam: f64,
    draft: f64,
) -> Vec<(f64, f64, f64)> {
    if bk == 0.0 {
        return Vec::new();
    }
    let loa = surface.loa();
    let depth = surface.depth();
    let v = surface.source();
    let mut nodes = Vec::new();
    for side in 0..2 {
        let (r, sign) = if side == 0 {
            (v.rb().max(0.0), -1.0)
        } else {
            (v.rs().max(0.0), 1.0)
        };
        if r <= 0.0 {
            continue;
        }
        let t_frac = draft / depth;
        let u_max = (t_frac / r).sqrt().min(1.0);
        let panels = 16;
        for p in 0..panels {
            let lo = u_max * p as f64 / panels as f64;
            let hi = u_max * (p + 1) as f64 / panels as f64;
            for (gx, gw) in GL16_X.iter().zip(GL16_W.iter()) {
                let u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx;
                let weight = 0.5 * (hi - lo) * gw;
                let x = if side == 0 {
                    (1.0 - v.lb()) + v.lb() * u
                } else {
                    v.ls() * (1.0 - u)
                };
                let height = bk * half_beam * surface.plan_envelope(x);
                let z = r * u * u * depth - draft;
                let dz_du = 2.0 * r * u * depth;
                nodes.push((x * loa, sign * height * dz_du * weight, z));
            }
        }
    }
    nodes
}

/// `∫₀¹ (1−s)·e^{iκs} ds` and `∫₀¹ s·e^{iκs} ds` as (re, im) pairs,
/// stable at small κ. These are the node weights for integrating a
/// piecewise-linear function exactly against an oscillatory kernel
/// (Filon-type quadrature), which keeps the λ-integrand accurate at wave
/// numbers the grid spacing alone could not resolve.
fn filon_oscillatory_weights(kappa: f64) -> ((f64, f64), (f64, f64)) {
    if kappa.abs() < 0.5 {
        // Taylor series of Σ (iκ)^n / (n!·(n+1)) and Σ (iκ)^n / (n!·(n+2)).
        let mut e = (0.0, 0.0);
        let mut s = (0.0, 0.0);
        let mut term = (1.0, 0.0); // (iκ)^n / n!
        for n in 0..14 {
            e.0 += term.0 / (n + 1) as f64;
            e.1 += term.1 / (n + 1) as f64;
            s.0 += term.0 / (n + 2) as f64;
            s.1 += term.1 / (n + 2) as f64;
            let next = (-kappa * term.1, kappa * term.0);
            term = (next.0 / (n + 1) as f64, next.1 / (n + 1) as f64);
        }
        ((e.0 - s.0, e.1 - s.1), s)
    } else {
        // E = e^{iκ/2}·sinc(κ/2); S = (e^{iκ}(iκ−1) + 1)/(iκ)².
        let half = 0.5 * kappa;
        let sinc = half.sin() / half;
        let e = (half.cos() * sinc, half.sin() * sinc);
        let (c, sn) = (kappa.cos(), kappa.sin());
        // e^{iκ}(iκ−1)+1 = (1 − c − κ·sn) + i(κ·c − sn)
        let num = (1.0 - c - kappa * sn, kappa * c - sn);
        let k2 = kappa * kappa;
        let s = (-num.0 / k2, -num.1 / k2);
        ((e.0 - s.0, e.1 - s.1), s)
    }
}

/// `∫₀¹ (1−s)·e^{ts} ds` and `∫₀¹ s·e^{ts} ds`, stable at small `t`; the
/// exponential analogue of the oscillatory weights for the depth kernel.
fn filon_exponential_weights(t: f64) -> (f64, f64) {
    if t.abs() < 0.5 {
        let mut e = 0.0;
        let mut s = 0.0;
        let mut term = 1.0; // t^n / n!
        for n in 0..16 {
            e += term / (n + 1) as f64;
            s += term / (n + 2) as f64;
            term *= t / (n + 1) as f64;
        }
        (e - s, s)
    } else {
        let et = t.exp();
        let e = t.exp_m1() / t;
        let s = (et * (t - 1.0) + 1.0) / (t * t);
        (e - s, s)
    }
}

// 16-point Gauss–Legendre nodes/weights on [−1, 1] for the 1-D analytic
// step-term integrals.
const GL16_X: [f64; 16] = [
    -0.989_400_934_991_649_9,
    -0.944_575_023_073_232_6,
    -0.865_631_202_387_831_7,
    -0.755_404_408_355_003_0,
    -0.617_876_244_402_643_7,
    -0.458_016_777_657_227_4,
    -0.281_603_550_779_258_9,
    -0.095_012_509_837_637_44,
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 16] = [
    0.027_152_459_411_754_1,
    0.062_253_523_938_647_89,
    0.095_158_511_682_492_78,
    0.124_628_971_255_533_9,
    0.149_595_988_816_576_7,
    0.169_156_519_395_002_5,
    0.182_603_415_044_923_6,
    0.189_450_610_455_068_5,
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_1,
];

impl CenterplaneGrid {
    fn step_terms_ij(&self, k_l: f64, a: f64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for &(x, coeff, z_keel) in &self.step_smooth_nodes {
            let z_col = (1.0 - (a * z_keel).exp()) / a;
            let phase = k_l * x;
            let val = coeff * z_col;
            re += val * phase.cos();
            im += val * phase.sin();
        }
        for &(x, coeff, z) in &self.step_jump_nodes {
            let phase = k_l * x;
            let val = coeff * (a * z).exp();
            re += val * phase.cos();
            im += val * phase.sin();
        }
        (re, im)
    }
}

/// `(I, J)` for one wave parameter λ: the continuous shell part comes from
/// the grid (depth kernel integrated exactly per z-segment, column sums
/// integrated exactly against `cos/sin(k₀λx)` per x-segment), and the
/// flat-of-keel step contributes two analytic 1-D integrals.
fn michell_ij(grid: &CenterplaneGrid, k0: f64, lambda: f64) -> (f64, f64) {
    let k_l = k0 * lambda;
    let k_l2 = k0 * lambda * lambda;
    let (nx, nz) = (grid.nx, grid.nz);
    let hz = if nz > 1 {
        grid.zs[1] - grid.zs[0]
    } else {
        grid.draft
    };

    // Effective z weights: node j collects the (1−s) part of segment j and
    // the s part of segment j−1, each scaled by the exponential at the
    // segment start.
    let t_seg = k_l2 * hz;
    let (a_w, b_w) = filon_exponential_weights(t_seg);
    let mut wz = vec![0.0; nz];
    for j in 0..nz - 1 {
        let e0 = (k_l2 * grid.zs[j]).exp() * hz;
        wz[j] += e0 * a_w;
        wz[j + 1] += e0 * b_w;
    }

    // Column sums G_i = ∫ ∂Y_cont/∂x (x_i, z)·e^{k₀λ²z} dz.
    let mut g = vec![0.0; nx];
    for i in 0..nx {
        let row = &grid.yx[i * nz..(i + 1) * nz];
        let mut acc = 0.0;
        for j in 0..nz {
            acc += row[j] * wz[j];
        }
        g[i] = acc;
    }

    // Oscillatory x-integration of the piecewise-linear G.
    let kappa = k_l * grid.hx;
    let ((a_re, a_im), (b_re, b_im)) = filon_oscillatory_weights(kappa);
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..nx - 1 {
        let phase = k_l * grid.xs[i];
        let (pc, ps) = (phase.cos(), phase.sin());
        // (G_i·A + G_{i+1}·B)·e^{i·phase}·hx
        let seg_re = g[i] * a_re + g[i + 1] * b_re;
        let seg_im = g[i] * a_im + g[i + 1] * b_im;
        re += grid.hx * (seg_re * pc - seg_im * ps);
        im += grid.hx * (seg_re * ps + seg_im * pc);
    }

    let (sr, si) = grid.step_terms_ij(k_l, k_l2);
    (re + sr, im + si)
}

/// Michell wave resistance in Newtons of feasible hull `v` at the given
/// draft fraction and Froude number (waterline length at that draft sets
/// the speed scale).
pub fn michell_resistance(
    v: &DesignVector,
    draft_fraction: f64,
    froude: f64,
) -> Result<f64, HydroError> {
    let surface = HullSurface::feasible(v)?;
    michell_resistance_with(&surface, draft_fraction, froude, &MichellSettings::default())
}

/// As [`michell_resistance`] with explicit quadrature settings.
pub fn michell_resistance_with(
    surface: &HullSurface,
    draft_fraction: f64,
    froude: f64,
    settings: &MichellSettings,
) -> Result<f64, HydroError> {
    if !(draft_fraction > 0.0 && draft_fraction < 1.0) {
        return Err(HydroError::Geometry(GeometryError::BadDraft(
            draft_fraction,
        )));
    }
    if !(0.05..=0.6).contains(&froude) {
        return Err(HydroError::BadFroude(froude));
    }
    let loa = surface.loa();
    let (xa, xf) = surface.waterline_extent(draft_fraction);
    let lwl = (xf - xa) * loa;
    if lwl <= 0.0 {
        return Err(HydroError::ZeroWaterline(draft_fraction));
    }
    let speed = froude_speed(froude, lwl)?;
    let k0 = GRAVITY / (speed * speed);
    let t = draft_fraction * surface.depth();

    let grid = centerplane_grid(surface, draft_fraction, settings);

    // Truncate where exp(k0 λ² z_c) at the mid-draft depth z_c = −T/2 falls
    // below `envelope_cut` of its θ = 0 value: k0 (T/2) tan²θ = ln(1/cut).
    let tan2_max = (1.0 / settings.envelope_cut).ln() / (k0 * 0.5 * t);
    let theta_max = tan2_max.sqrt().min(80.0).atan();

    let panels = (settings.theta_nodes / 8).max(1);
    let dtheta = theta_max / panels as f64;

    let mut integral = 0.0;
    for p in 0..panels {
        let a = p as f64 * dtheta;
        for (gx, gw) in GL8_X.iter().zip(GL8_W.iter()) {
            let theta = a + 0.5 * dtheta * (1.0 + gx);
            let weight = gw * 0.5 * dtheta;
            let sec = 1.0 / theta.cos();
            let (re, im) = michell_ij(&grid, k0, sec);
            integral += weight * (re * re + im * im) * sec * sec * sec;
        }
    }

    Ok(4.0 * RHO_WATER * GRAVITY * GRAVITY / (std::f64::consts::PI * speed * speed) * integral)
}

/// Full 4×8 wave drag coefficient grid of a feasible hull.
pub fn drag_grid(v: &DesignVector) -> Result<DragGrid, HydroError> {
    drag_grid_with(&HullSurface::feasible(v)?, &MichellSettings::default())
}

/// As [`drag_grid`] with explicit quadrature settings.
pub fn drag_grid_with(
    surface: &HullSurface,
    settings: &MichellSettings,
) -> Result<DragGrid, HydroError> {
    let mut cw = [[0.0; 8]; 4];
    for (di, &draft) in DRAFT_FRACTIONS.iter().enumerate() {
        let (xa, xf) = surface.waterline_extent(draft);
        let lwl = (xf - xa) * surface.loa();
        for (fi, &froude) in FROUDE_NUMBERS.iter().enumerate() {
            let rw = michell_resistance_with(surface, draft, froude, settings)?;
            let speed = froude_speed(froude, lwl)?;
            cw[di][fi] = wave_coefficient(rw, speed, surface.loa())?;
        }
    }
    Ok(DragGrid { cw })
}

/// Aggregate drag objective: `Σ log10(Cw_i)` over the 32 grid entries.
pub fn aggregate_cw(grid: &DragGrid) -> Result<f64, HydroError> {
    let mut total = 0.0;
    for c in grid.iter() {
        if !(c > 0.0) {
            return Err(HydroError::NonPositiveCoefficient(c));
        }
        total += c.log10();
    }
    Ok(total)
}
