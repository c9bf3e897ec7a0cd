//! Independent high-resolution oracle for the Michell wave resistance.
//!
//! The production path differentiates the half-breadth with central
//! differences and integrates with trapezoid × composite Gauss–Legendre.
//! The oracle here takes a different route: integration by parts moves the
//! x-derivative onto the oscillatory kernel,
//!
//! ```text
//! I = k₀λ ∬ Y e^{k₀λ²z} sin(k₀λx) dx dz
//! J = −k₀λ ∬ Y e^{k₀λ²z} cos(k₀λx) dx dz
//! ```
//!
//! (boundary terms vanish because Y = 0 at both hull ends), evaluated with
//! Simpson quadrature at 4× panel density and 16-point Gauss–Legendre θ
//! panels whose nodes are derived on the fly by Newton iteration — no
//! shared tables with the production code. A seeded Monte Carlo estimate
//! spot-checks the area integrals at a few wave angles.

use rand::Rng;
use shipgen_core::designspace::DesignVector;
use shipgen_core::geometry::HullSurface;
use shipgen_core::hydro::{
    froude_speed, michell_resistance_with, wave_coefficient, MichellSettings, GRAVITY, RHO_WATER,
};
use shipgen_core::rng::derive_stream;

/// Wigley-style hull: long symmetric parabolic tapers, no keel flat,
/// near-wall sections, no keel rise.
fn wigley_vector() -> DesignVector {
    DesignVector([
        100.0, 0.15, 0.10, 0.475, 0.475, 2.0, 2.0, 0.0, 0.5, 6.0, 0.0, 0.0,
    ])
}

/// Legendre polynomial value and derivative at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes/weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n % 2 == 1, "Simpson needs an odd point count");
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

struct OracleGrid {
    y: Vec<f64>, // nx × nz half-breadths, meters
    wx: Vec<f64>,
    wz: Vec<f64>,
    xs: Vec<f64>,
    zs: Vec<f64>,
    nx: usize,
    nz: usize,
}

fn oracle_grid(surface: &HullSurface, draft_fraction: f64, nx: usize, nz: usize) -> OracleGrid {
    let loa = surface.loa();
    let depth = surface.depth();
    let t = draft_fraction * depth;
    let hx = loa / (nx - 1) as f64;
    let hz = t / (nz - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|i| hx * i as f64).collect();
    let zs: Vec<f64> = (0..nz).map(|j| -t + hz * j as f64).collect();
    let mut y = vec![0.0; nx * nz];
    for i in 0..nx {
        for j in 0..nz {
            let z_frac = (zs[j] + t) / depth;
            y[i * nz + j] = surface.half_breadth(xs[i] / loa, z_frac);
        }
    }
    OracleGrid {
        y,
        wx: simpson_weights(nx, hx),
        wz: simpson_weights(nz, hz),
        xs,
        zs,
        nx,
        nz,
    }
}

/// (I, J) for one wave parameter λ via the integrated-by-parts form.
fn oracle_ij(grid: &OracleGrid, k0: f64, lambda: f64) -> (f64, f64) {
    let k_l = k0 * lambda;
    let k_l2 = k0 * lambda * lambda;
    let mut s_sin = 0.0;
    let mut s_cos = 0.0;
    for i in 0..grid.nx {
        let mut column = 0.0;
        for j in 0..grid.nz {
            column += grid.wz[j] * grid.y[i * grid.nz + j] * (k_l2 * grid.zs[j]).exp();
        }
        let phase = k_l * grid.xs[i];
        s_sin += grid.wx[i] * phase.sin() * column;
        s_cos += grid.wx[i] * phase.cos() * column;
    }
    (k_l * s_sin, -k_l * s_cos)
}

fn oracle_resistance(surface: &HullSurface, draft_fraction: f64, froude: f64) -> f64 {
    let loa = surface.loa();
    let (xa, xf) = surface.waterline_extent(draft_fraction);
    let lwl = (xf - xa) * loa;
    let speed = froude_speed(froude, lwl).unwrap();
    let k0 = GRAVITY / (speed * speed);
    let t = draft_fraction * surface.depth();

    let grid = oracle_grid(surface, draft_fraction, 513, 257);

    // Tighter envelope cut than production, 16-point panels.
    let tan2_max = (1.0f64 / 1e-12).ln() / (k0 * 0.5 * t);
    let theta_max = tan2_max.sqrt().min(120.0).atan();
    let (gx, gw) = gauss_legendre(16);
    let panels = 64;
    let dtheta = theta_max / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let a = p as f64 * dtheta;
        for (x, w) in gx.iter().zip(gw.iter()) {
            let theta = a + 0.5 * dtheta * (1.0 + x);
            let weight = w * 0.5 * dtheta;
            let sec = 1.0 / theta.cos();
            let (i_term, j_term) = oracle_ij(&grid, k0, sec);
            integral += weight * (i_term * i_term + j_term * j_term) * sec * sec * sec;
        }
    }
    4.0 * RHO_WATER * GRAVITY * GRAVITY / (std::f64::consts::PI * speed * speed) * integral
}

#[test]
fn wigley_hull_matches_independent_oracle_within_two_percent() {
    let v = wigley_vector();
    let surface = HullSurface::feasible(&v).expect("wigley vector is feasible");
    let draft = 0.5;
    let froude = 0.30;

    let main = michell_resistance_with(&surface, draft, froude, &MichellSettings::default())
        .expect("resistance");
    let oracle = oracle_resistance(&surface, draft, froude);
    let rel = (main - oracle).abs() / oracle;
    println!("main = {main:.6e} N, oracle = {oracle:.6e} N, rel = {rel:.4}");
    assert!(rel < 0.02, "main {main}, oracle {oracle}, rel {rel}");

    // Also sensible as a coefficient.
    let (xa, xf) = surface.waterline_extent(draft);
    let speed = froude_speed(froude, (xf - xa) * surface.loa()).unwrap();
    let cw = wave_coefficient(main, speed, surface.loa()).unwrap();
    assert!(cw > 0.0 && cw < 0.1, "cw = {cw}");
}

#[test]
fn oracle_area_integrals_survive_monte_carlo_spot_check() {
    let v = wigley_vector();
    let surface = HullSurface::feasible(&v).unwrap();
    let draft = 0.5;
    let froude = 0.30;
    let loa = surface.loa();
    let depth = surface.depth();
    let t = draft * depth;
    let (xa, xf) = surface.waterline_extent(draft);
    let speed = froude_speed(froude, (xf - xa) * loa).unwrap();
    let k0 = GRAVITY / (speed * speed);

    let grid = oracle_grid(&surface, draft, 513, 257);
    let mut rng = derive_stream(4242, "michell.mc", 0);
    for lambda in [1.0, 1.5, 2.5] {
        let (i_q, j_q) = oracle_ij(&grid, k0, lambda);
        // Monte Carlo estimate of the same area integrals.
        let n = 2_000_000;
        let k_l = k0 * lambda;
        let k_l2 = k0 * lambda * lambda;
        let area = loa * t;
        let mut s_sin = 0.0;
        let mut s_cos = 0.0;
        let mut ss_sin = 0.0;
        let mut ss_cos = 0.0;
        for _ in 0..n {
            let x = rng.random::<f64>() * loa;
            let z = -t + rng.random::<f64>() * t;
            let y = surface.half_breadth(x / loa, (z + t) / depth);
            let kernel = y * (k_l2 * z).exp();
            let vs = kernel * (k_l * x).sin();
            let vc = kernel * (k_l * x).cos();
            s_sin += vs;
            s_cos += vc;
            ss_sin += vs * vs;
            ss_cos += vc * vc;
        }
        let nf = n as f64;
        let i_mc = k_l * area * s_sin / nf;
        let j_mc = -k_l * area * s_cos / nf;
        // Monte Carlo standard errors of the two estimates.
        let se_sin = k_l * area * ((ss_sin / nf - (s_sin / nf).powi(2)) / nf).sqrt();
        let se_cos = k_l * area * ((ss_cos / nf - (s_cos / nf).powi(2)) / nf).sqrt();
        println!(
            "lambda {lambda}: quad ({i_q:.5e},{j_q:.5e}) mc ({i_mc:.5e},{j_mc:.5e}) se ({se_sin:.2e},{se_cos:.2e})"
        );
        assert!(
            (i_mc - i_q).abs() < 4.0 * se_sin,
            "lambda {lambda}: I off by {} (se {se_sin})",
            (i_mc - i_q).abs()
        );
        assert!(
            (j_mc - j_q).abs() < 4.0 * se_cos,
            "lambda {lambda}: J off by {} (se {se_cos})",
            (j_mc - j_q).abs()
        );
    }
}

#[test]
fn production_quadrature_is_stable_under_refinement() {
    // Doubling panels and grid should not move the Wigley answer by > 1%.
    let v = wigley_vector();
    let surface = HullSurface::feasible(&v).unwrap();
    let base = MichellSettings::default();
    let fine = MichellSettings {
        x_panels: base.x_panels * 2,
        z_panels: base.z_panels * 2,
        theta_nodes: base.theta_nodes * 2,
        ..base
    };
    for (draft, froude) in [(0.25, 0.15), (0.5, 0.30), (0.67, 0.45)] {
        let a = michell_resistance_with(&surface, draft, froude, &base).unwrap();
        let b = michell_resistance_with(&surface, draft, froude, &fine).unwrap();
        let rel = (a - b).abs() / b;
        println!("draft {draft} froude {froude}: rel drift {rel:.5}");
        assert!(rel < 0.01, "draft {draft} froude {froude}: drift {rel}");
    }
}
