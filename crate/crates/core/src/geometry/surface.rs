//! Algebraic hull surface law for the reduced design space.
//!
//! The starboard shell is the graph `y(x, ζ) = LOA·Bd·b(x)·s(ζ)` over
//! normalized longitudinal position `x ∈ [0,1]` and section height fraction
//! `ζ ∈ [0,1]` measured between the local keel and the deck:
//!
//! - plan envelope `b`: 1 on the parallel midbody `[Ls, 1−Lb]`, `1 − u^pS`
//!   over the stern taper and `1 − u^pB` over the bow taper (`u` the local
//!   taper coordinate, 0 at the midbody end, 1 at the tip);
//! - keel elevation `K(x)` rises quadratically to `rS`/`rB` (fractions of
//!   depth) at the stern/bow tips and is 0 on the midbody;
//! - section profile `s(ζ) = Bk + (1−Bk)·(ζ/zk)^pC` below the bilge height
//!   `zk`, 1 above, so `Bk` is the flat-of-keel fraction of the local beam.
//!
//! Below the local keel the half-breadth is zero. All queries are available
//! both in meters and in LOA units; the unit form never multiplies by LOA,
//! which makes every normalized downstream measure exactly scale-invariant.

use crate::designspace::{constraint_mask, ConstraintReport, DesignVector};
use crate::geometry::GeometryError;

/// A design vector with its surface constants unpacked.
#[derive(Debug, Clone, Copy)]
pub struct HullSurface {
    source: DesignVector,
    loa: f64,
    bd: f64,
    dd: f64,
    lb: f64,
    ls: f64,
    pb: f64,
    ps: f64,
    bk: f64,
    zk: f64,
    pc: f64,
    rb: f64,
    rs: f64,
}

impl HullSurface {
    /// Build the surface of a feasible vector; infeasible input is an error
    /// because the surface law may self-intersect outside the feasible set.
    pub fn feasible(v: &DesignVector) -> Result<Self, GeometryError> {
        let report = crate::designspace::check_constraints(v)?;
        if !report.feasible() {
            return Err(GeometryError::Infeasible(report.violations()));
        }
        Ok(Self::raw(v))
    }

    /// Build the surface without any feasibility gate.
    ///
    /// Used by the tolerant mesher so constraint-violating vectors can be
    /// forced through the same discretization for the agreement studies.
    /// Only `zk` is clamped away from zero to keep the section profile
    /// evaluable.
    pub fn tolerant(v: &DesignVector) -> Self {
        let mut s = Self::raw(v);
        if s.zk <= 1.0e-9 {
            s.zk = 1.0e-9;
        }
        s
    }

    fn raw(v: &DesignVector) -> Self {
        HullSurface {
            source: *v,
            loa: v.loa(),
            bd: v.bd(),
            dd: v.dd(),
            lb: v.lb(),
            ls: v.ls(),
            pb: v.pb(),
            ps: v.ps(),
            bk: v.bk(),
            zk: v.zk(),
            pc: v.pc(),
            rb: v.rb(),
            rs: v.rs(),
        }
    }

    pub fn source(&self) -> &DesignVector {
        &self.source
    }

    /// Length overall in meters.
    pub fn loa(&self) -> f64 {
        self.loa
    }

    /// Hull depth in meters.
    pub fn depth(&self) -> f64 {
        self.dd * self.loa
    }

    /// Hull depth in LOA units.
    pub fn depth_unit(&self) -> f64 {
        self.dd
    }

    /// Maximum half-beam in LOA units.
    pub fn half_beam_unit(&self) -> f64 {
        self.bd
    }

    /// Plan envelope `b(x) ∈ [0,1]`; written as the product of the two taper
    /// factors so overlapping tapers (possible only for constraint-violating
    /// vectors) still evaluate to a single-valued graph.
    pub fn plan_envelope(&self, x: f64) -> f64 {
        let stern = if x < self.ls {
            let u = (self.ls - x) / self.ls;
            1.0 - u.powf(self.ps)
        } else {
            1.0
        };
        let bow = if x > 1.0 - self.lb {
            let u = (x - (1.0 - self.lb)) / self.lb;
            1.0 - u.powf(self.pb)
        } else {
            1.0
        };
        stern * bow
    }

    /// Keel elevation as a fraction of depth; quadratic rise in each taper.
    pub fn keel_frac(&self, x: f64) -> f64 {
        let stern = if x < self.ls {
            let u = (self.ls - x) / self.ls;
            self.rs * u * u
        } else {
            0.0
        };
        let bow = if x > 1.0 - self.lb {
            let u = (x - (1.0 - self.lb)) / self.lb;
            self.rb * u * u
        } else {
            0.0
        };
        stern.max(bow)
    }

    /// Section profile `s(ζ)` for `ζ ∈ [0,1]` between local keel and deck.
    pub fn section_profile(&self, zeta: f64) -> f64 {
        if zeta >= self.zk {
            1.0
        } else if zeta <= 0.0 {
            self.bk
        } else {
            self.bk + (1.0 - self.bk) * (zeta / self.zk).powf(self.pc)
        }
    }

    /// Half-breadth in LOA units at `(x, z_frac)`, zero below the local keel.
    pub fn half_breadth_unit(&self, x: f64, z_frac: f64) -> f64 {
        let k = self.keel_frac(x);
        if z_frac < k {
            return 0.0;
        }
        let zeta = if k >= 1.0 {
            1.0
        } else {
            (z_frac - k) / (1.0 - k)
        };
        self.bd * self.plan_envelope(x) * self.section_profile(zeta)
    }

    /// Half-breadth in meters at `(x, z_frac)`.
    pub fn half_breadth(&self, x: f64, z_frac: f64) -> f64 {
        self.loa * self.half_breadth_unit(x, z_frac)
    }

    /// Constraint report of the source vector (no box gate).
    pub fn constraint_report(&self) -> ConstraintReport {
        ConstraintReport::from_mask(constraint_mask(&self.source))
    }

    /// Longitudinal extent `[x_aft, x_fwd]` of the waterline at height
    /// `z_frac`, i.e. where the local keel sits at or below the waterline.
    pub fn waterline_extent(&self, z_frac: f64) -> (f64, f64) {
        let x_aft = if self.rs > 0.0 && z_frac < self.rs {
            self.ls * (1.0 - (z_frac / self.rs).sqrt())
        } else {
            0.0
        };
        let x_fwd = if self.rb > 0.0 && z_frac < self.rb {
            (1.0 - self.lb) + self.lb * (z_frac / self.rb).sqrt()
        } else {
            1.0
        };
        (x_aft, x_fwd)
    }
}

/// Half-beam in meters of the feasible hull `v` at normalized longitudinal
/// position `x ∈ [0,1]` and height fraction `z_frac ∈ [0,1]` of depth.
pub fn half_breadth(v: &DesignVector, x: f64, z_frac: f64) -> Result<f64, GeometryError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(GeometryError::ArgOutOfRange {
            name: "x",
            value: x,
        });
    }
    if !(0.0..=1.0).contains(&z_frac) {
        return Err(GeometryError::ArgOutOfRange {
            name: "z_frac",
            value: z_frac,
        });
    }
    Ok(HullSurface::feasible(v)?.half_breadth(x, z_frac))
}
