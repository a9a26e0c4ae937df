//! Solution operator `G_p` of
//!
//! ```text
//! -(r^(N-1) φ_p(u'))' = r^(N-1) h(r),   u'(0) = u(1) = 0,
//! ```
//!
//! through the explicit double integral
//! `u(r) = ∫_r^1 φ_p^{-1}( t^(1-N) ∫_0^t s^(N-1) h(s) ds ) dt`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Error;
use crate::pfuncs::{phi_p, phi_p_inv, Exponent};
use crate::quad::{gk15, integrate, QuadTol};
use crate::weight::Weight;

/// Below this radius the inner integral uses `h(0) t^N / N`.
const SERIES_RADIUS: f64 = 1e-4;

/// An integrable source `h` on `(0, 1)`.
#[derive(Clone)]
pub struct SourceTerm {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breakpoints: Vec<f64>,
    label: String,
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceTerm")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints.len())
            .finish()
    }
}

impl SourceTerm {
    /// Arbitrary closure; `breakpoints` lists interior points where `h` or
    /// its derivatives jump.
    pub fn from_fn<F>(label: impl Into<String>, breakpoints: Vec<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut breakpoints: Vec<f64> = breakpoints
            .into_iter()
            .filter(|&b| b > 0.0 && b < 1.0)
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Self {
            f: Arc::new(f),
            breakpoints,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("{c}"), Vec::new(), move |_| c)
    }

    pub fn from_weight(m: &Weight) -> Self {
        let m = m.clone();
        let breaks = m.breakpoints().to_vec();
        Self::from_fn("weight", breaks, move |r| m.eval(r))
    }

    /// Piecewise-linear interpolant of `(grid[i], values[i])`, constant
    /// beyond the ends.
    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, Error> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "sampled source needs matching grids of length >= 2".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "sampled source grid must increase".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "sampled source has non-finite values".into(),
            ));
        }
        let breaks = grid.clone();
        Ok(Self::from_fn("sampled", breaks, move |r| {
            let i = grid.partition_point(|&g| g <= r);
            if i == 0 {
                values[0]
            } else if i >= grid.len() {
                values[grid.len() - 1]
            } else {
                let t = (r - grid[i - 1]) / (grid[i] - grid[i - 1]);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
        }))
    }

    /// `c * h`.
    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        Self {
            f: Arc::new(move |r| c * f(r)),
            breakpoints: self.breakpoints.clone(),
            label: format!("{c}*({})", self.label),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GreensOptions {
    /// Number of uniform output intervals on `[0, 1]`.
    pub intervals: usize,
    pub tol: QuadTol,
}

impl Default for GreensOptions {
    fn default() -> Self {
        Self {
            intervals: 400,
            tol: QuadTol {
                abs: 1e-14,
                rel: 1e-12,
                max_panels: 2000,
            },
        }
    }
}

/// `u = G_p(h)` sampled on a grid, with the exact derivative
/// `u'(r) = -φ_p^{-1}(r^(1-N) ∫_0^r s^(N-1) h)`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl Profile {
    /// Cubic Hermite interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        let i = self.r.partition_point(|&g| g <= x).clamp(1, n - 1);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let h = r1 - r0;
        let t = (x - r0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.u[i - 1] + h10 * h * self.du[i - 1] + h01 * self.u[i] + h11 * h * self.du[i]
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

struct Kernel<'a> {
    h: &'a SourceTerm,
    p: Exponent,
    dim: u32,
    /// Cell boundaries (uniform grid merged with the source breakpoints).
    nodes: Vec<f64>,
    /// `∫_0^{nodes[i]} s^(N-1) h(s) ds`.
    cumulative: Vec<f64>,
}

impl Kernel<'_> {
    fn weighted(&self, s: f64) -> f64 {
        s.powi(self.dim as i32 - 1) * self.h.eval(s)
    }

    /// `t^(1-N) ∫_0^t s^(N-1) h(s) ds` for `t` in cell `cell`.
    fn mean_flux(&self, t: f64, cell: usize) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.dim as f64;
        if t < SERIES_RADIUS {
            return self.h.eval(0.0) * t / n;
        }
        let a = self.nodes[cell];
        let partial = if t > a {
            gk15(&|s| self.weighted(s), a, t).0
        } else {
            0.0
        };
        (self.cumulative[cell] + partial) / t.powi(self.dim as i32 - 1)
    }

    fn slope(&self, t: f64, cell: usize) -> f64 {
        -phi_p_inv(self.mean_flux(t, cell), self.p)
    }
}

/// Applies `G_p` to `h`.
pub fn apply_gp(
    p: Exponent,
    dim: u32,
    h: &SourceTerm,
    opts: &GreensOptions,
) -> Result<Profile, Error> {
    if dim < 1 {
        return Err(Error::InvalidDimension);
    }
    let n = opts.intervals.max(2);
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut nodes: Vec<f64> = grid
        .iter()
        .copied()
        .chain(h.breakpoints().iter().copied())
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let pieces: Vec<f64> = nodes
        .par_windows(2)
        .map(|w| {
            let f = |s: f64| s.powi(dim as i32 - 1) * h.eval(s);
            integrate(&f, w[0], w[1], opts.tol)
        })
        .collect::<Result<_, _>>()?;
    let mut cumulative = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for piece in &pieces {
        acc += piece;
        cumulative.push(acc);
    }
    if !acc.is_finite() {
        return Err(Error::QuadratureFailure { a: 0.0, b: 1.0 });
    }

    let kernel = Kernel {
        h,
        p,
        dim,
        nodes,
        cumulative,
    };
    let cells = kernel.nodes.len() - 1;
    let outer: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let (a, b) = (kernel.nodes[c], kernel.nodes[c + 1]);
            integrate(&|t| kernel.slope(t, c), a, b, opts.tol)
        })
        .collect::<Result<_, _>>()?;

    // u(node_i) = -∫_{node_i}^1 u'(t) dt
    let mut u_nodes = vec![0.0; kernel.nodes.len()];
    for c in (0..cells).rev() {
        u_nodes[c] = u_nodes[c + 1] - outer[c];
    }
    let mut u = Vec::with_capacity(n + 1);
    let mut du = Vec::with_capacity(n + 1);
    for &r in &grid {
        let idx = kernel
            .nodes
            .iter()
            .position(|&x| (x - r).abs() < 1e-15)
            .expect("grid points are nodes");
        u.push(u_nodes[idx]);
        let cell = idx.min(cells - 1);
        du.push(kernel.slope(r, cell));
    }
    Ok(Profile { r: grid, u, du })
}

/// Sup-norm of `(r^(N-1) φ_p(u'))' + r^(N-1) h` on a uniform grid over
/// `[0, 1]`, both derivatives by five-point central differences. Points
/// with `r < r_min` are skipped (the flux is not smooth at the origin for
/// `p != 2`).
pub fn residual(p: Exponent, dim: u32, h: &SourceTerm, u: &[f64], r_min: f64) -> f64 {
    let n = u.len() - 1;
    if n < 8 {
        return f64::NAN;
    }
    let dx = 1.0 / n as f64;
    let five_point =
        |y: &[f64], i: usize| (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * dx);
    let mut flux = vec![0.0; n + 1];
    for i in 2..=n - 2 {
        let r = i as f64 * dx;
        flux[i] = r.powi(dim as i32 - 1) * phi_p(five_point(u, i), p);
    }
    let mut worst: f64 = 0.0;
    for i in 4..=n - 4 {
        let r = i as f64 * dx;
        if r < r_min {
            continue;
        }
        let value = five_point(&flux, i) + r.powi(dim as i32 - 1) * h.eval(r);
        worst = worst.max(value.abs());
    }
    worst
}

/// `max_i |G_p(h)(r_i) - u(r_i)|` on the profile grid.
pub fn fixed_point_defect<U: Fn(f64) -> f64>(profile: &Profile, u: U) -> f64 {
    profile
        .r
        .iter()
        .zip(&profile.u)
        .map(|(&r, &g)| (g - u(r)).abs())
        .fold(0.0, f64::max)
}
