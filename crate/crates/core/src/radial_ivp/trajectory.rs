use crate::pfuncs::{phi_p_inv, Exponent};

use super::dopri::Segment;

/// Zeros closer than this to the right end are boundary zeros, not
/// interior ones.
pub const BOUNDARY_ZONE: f64 = 1e-8;

/// Relative threshold below which a zero counts as degenerate.
pub const SIMPLICITY_THRESHOLD: f64 = 1e-8;

/// A sign change of `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub r: f64,
    /// `u'(r)` at the zero.
    pub slope: f64,
}

/// One `(r, u, v)` sample with `v = r^(N-1) φ_p(u')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub v: f64,
}

/// Record of a single shot from the origin.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub(crate) exponent: Exponent,
    pub(crate) dim: u32,
    pub alpha: f64,
    /// Startup radius and the series values there.
    pub(crate) startup: Sample,
    /// Accepted step ends, starting with the startup point. Empty when the
    /// shot was taken without dense recording.
    pub samples: Vec<Sample>,
    pub(crate) segments: Vec<Segment>,
    /// All sign changes of `u` in `(0, r_end)`, increasing.
    pub zeros: Vec<Zero>,
    pub r_end: f64,
    pub terminal: Sample,
    pub max_abs_u: f64,
    pub max_abs_slope: f64,
    /// Set when a zero has `|u'| < 1e-8 max|u'|`.
    pub degenerate: bool,
    pub steps: usize,
}

impl Trajectory {
    /// `u(r_end)`.
    pub fn end_value(&self) -> f64 {
        self.terminal.u
    }

    /// Zeros with `r < r_end - BOUNDARY_ZONE`.
    pub fn interior_zeros(&self) -> impl Iterator<Item = &Zero> + '_ {
        let cut = self.r_end - BOUNDARY_ZONE;
        self.zeros.iter().filter(move |z| z.r < cut)
    }

    pub fn interior_zero_count(&self) -> usize {
        self.interior_zeros().count()
    }

    /// Every sign change, including one sitting in the boundary zone. The
    /// sign of `u(r_end)` equals `sign(alpha) * (-1)^crossings` whenever
    /// `u(r_end) != 0`.
    pub fn crossing_count(&self) -> usize {
        self.zeros.len()
    }

    /// Number of zeros inside `[a, b]`.
    pub fn zeros_in(&self, a: f64, b: f64) -> usize {
        self.zeros.iter().filter(|z| z.r >= a && z.r <= b).count()
    }

    /// Interior zeros whose slope falls below the simplicity threshold.
    pub fn degenerate_zeros(&self) -> Vec<Zero> {
        let floor = SIMPLICITY_THRESHOLD * self.max_abs_slope;
        self.interior_zeros()
            .filter(|z| z.slope.abs() < floor)
            .copied()
            .collect()
    }

    pub fn is_dense(&self) -> bool {
        !self.segments.is_empty()
    }

    /// `(u, v)` at radius `r` from the dense output. Inside the startup
    /// radius the leading-order series is used.
    ///
    /// # Panics
    /// If the trajectory was recorded without dense output.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        assert!(self.is_dense(), "trajectory has no dense output");
        let s = self.startup;
        if r <= s.r {
            if s.r == 0.0 {
                return (s.u, s.v);
            }
            let q = self.exponent.conjugate();
            let t = (r / s.r).max(0.0);
            let u = self.alpha + (s.u - self.alpha) * t.powf(q);
            let v = s.v * t.powi(self.dim as i32);
            return (u, v);
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.r1() < r)
            .min(self.segments.len() - 1);
        let y = self.segments[idx].eval(r);
        (y[0], y[1])
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// `u'(r) = φ_p^{-1}(v / r^(N-1))`.
    pub fn slope(&self, r: f64) -> f64 {
        let (_, v) = self.eval(r);
        slope_from_flux(v, r, self.dim, self.exponent)
    }

    /// `max |u|` over the recorded samples.
    pub fn sup_norm(&self) -> f64 {
        self.max_abs_u
    }

    /// Negated copy, `u -> -u`.
    pub fn negated(&self) -> Self {
        let neg = |s: &Sample| Sample {
            r: s.r,
            u: -s.u,
            v: -s.v,
        };
        Self {
            alpha: -self.alpha,
            startup: neg(&self.startup),
            samples: self.samples.iter().map(neg).collect(),
            segments: self
                .segments
                .iter()
                .map(|seg| Segment {
                    r0: seg.r0,
                    h: seg.h,
                    cont: seg.cont.map(|c| [-c[0], -c[1]]),
                })
                .collect(),
            zeros: self
                .zeros
                .iter()
                .map(|z| Zero {
                    r: z.r,
                    slope: -z.slope,
                })
                .collect(),
            terminal: neg(&self.terminal),
            ..self.clone()
        }
    }
}

/// Record of a shot from `r = 1` inward, stored in increasing `r`.
#[derive(Debug, Clone)]
pub struct InwardShot {
    pub(crate) exponent: Exponent,
    pub(crate) dim: u32,
    pub r_stop: f64,
    pub samples: Vec<Sample>,
    pub(crate) segments: Vec<Segment>,
    /// Sign changes in `(r_stop, 1)`, increasing.
    pub zeros: Vec<Zero>,
    /// State at `r_stop`.
    pub inner: Sample,
    pub max_abs_u: f64,
    pub max_abs_slope: f64,
}

impl InwardShot {
    /// `(u, v)` at `r` in `[r_stop, 1]` from the dense output.
    ///
    /// # Panics
    /// If the shot was recorded without dense output.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        assert!(!self.segments.is_empty(), "inward shot has no dense output");
        // segments run backwards, so each covers [r0 + h, r0]
        let idx = self
            .segments
            .partition_point(|seg| seg.r0 < r)
            .min(self.segments.len() - 1);
        let y = self.segments[idx].eval(r);
        (y[0], y[1])
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn slope(&self, r: f64) -> f64 {
        let (_, v) = self.eval(r);
        slope_from_flux(v, r, self.dim, self.exponent)
    }
}

#[inline]
pub(crate) fn slope_from_flux(v: f64, r: f64, dim: u32, p: Exponent) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    phi_p_inv(v / r.powi(dim as i32 - 1), p)
}
