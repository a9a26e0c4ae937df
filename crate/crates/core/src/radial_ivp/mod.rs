//! Shooting from the origin for radial problems of the form
//!
//! ```text
//! (r^(N-1) φ_p(u'))' = -r^(N-1) F(r, u),   u(0) = α,  u'(0) = 0,
//! ```
//!
//! integrated as the first-order system `u' = φ_p^{-1}(v / r^(N-1))`,
//! `v' = -r^(N-1) F(r, u)` with `v = r^(N-1) φ_p(u')`. The boundary
//! condition `u(1) = 0` is not imposed; callers read the miss `u(1)`.

mod dopri;
mod trajectory;

use crate::error::Error;
use crate::greens::SourceTerm;
use crate::nodal::Nonlinearity;
use crate::pfuncs::{phi_p, phi_p_inv, Exponent};
use crate::weight::Weight;

pub use trajectory::{InwardShot, Sample, Trajectory, Zero, BOUNDARY_ZONE, SIMPLICITY_THRESHOLD};

use dopri::*;

/// The weighted radial p-Laplacian `(p, N, m)` shared by every problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub exponent: Exponent,
    pub dim: u32,
    pub weight: Weight,
}

impl Operator {
    pub fn new(exponent: Exponent, dim: u32, weight: Weight) -> Result<Self, Error> {
        if dim < 1 {
            return Err(Error::InvalidDimension);
        }
        Ok(Self {
            exponent,
            dim,
            weight,
        })
    }

    /// Same exponent and dimension with another weight.
    pub fn with_weight(&self, weight: Weight) -> Self {
        Self {
            weight,
            ..self.clone()
        }
    }

    pub fn with_exponent(&self, exponent: Exponent) -> Self {
        Self {
            exponent,
            ..self.clone()
        }
    }

    pub fn p(&self) -> f64 {
        self.exponent.p()
    }

    /// The linear eigenvalue problem at parameter `mu`.
    pub fn linear(&self, mu: f64) -> Problem {
        Problem {
            op: self.clone(),
            rhs: Rhs::Linear { mu },
        }
    }

    pub fn nonlinear(&self, gamma: f64, f: Nonlinearity) -> Problem {
        Problem {
            op: self.clone(),
            rhs: Rhs::Nonlinear { gamma, f },
        }
    }

    pub fn perturbed(&self, mu: f64, g: Perturbation) -> Problem {
        Problem {
            op: self.clone(),
            rhs: Rhs::Perturbed { mu, g },
        }
    }

    pub fn source(&self, h: SourceTerm) -> Problem {
        Problem {
            op: self.clone(),
            rhs: Rhs::Source(h),
        }
    }
}

/// Perturbation `g(r, u) = c m(r) |u|^(p-1+δ) sign(u)` with `δ > 0`, so
/// that `g / |u|^(p-1) -> 0` as `u -> 0` uniformly in `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub coefficient: f64,
    pub delta: f64,
}

impl Perturbation {
    pub fn new(coefficient: f64, delta: f64) -> Result<Self, Error> {
        if !(delta > 0.0 && delta.is_finite() && coefficient.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "perturbation needs delta > 0 and finite coefficient, got c={coefficient}, delta={delta}"
            )));
        }
        Ok(Self { coefficient, delta })
    }

    /// `g ≡ 0`.
    pub fn zero() -> Self {
        Self {
            coefficient: 0.0,
            delta: 1.0,
        }
    }

    #[inline]
    pub fn eval(&self, m: f64, u: f64, p: Exponent) -> f64 {
        if self.coefficient == 0.0 || u == 0.0 {
            return 0.0;
        }
        self.coefficient * m * u.abs().powf(p.p() - 1.0 + self.delta).copysign(u)
    }
}

/// Right-hand side families.
#[derive(Debug, Clone)]
pub enum Rhs {
    /// `F = μ m(r) φ_p(u)`.
    Linear { mu: f64 },
    /// `F = γ m(r) f(u)`.
    Nonlinear { gamma: f64, f: Nonlinearity },
    /// `F = μ m(r) φ_p(u) + g(r, u)`.
    Perturbed { mu: f64, g: Perturbation },
    /// `F = h(r)`, independent of `u`.
    Source(SourceTerm),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub op: Operator,
    pub rhs: Rhs,
}

impl Problem {
    /// `F(r, u)`.
    #[inline]
    pub fn forcing(&self, r: f64, u: f64) -> f64 {
        let p = self.op.exponent;
        match &self.rhs {
            Rhs::Linear { mu } => mu * self.op.weight.eval(r) * phi_p(u, p),
            Rhs::Nonlinear { gamma, f } => gamma * self.op.weight.eval(r) * f.eval(u, p),
            Rhs::Perturbed { mu, g } => {
                let m = self.op.weight.eval(r);
                mu * m * phi_p(u, p) + g.eval(m, u, p)
            }
            Rhs::Source(h) => h.eval(r),
        }
    }

    /// True when `F(r, -u) = -F(r, u)`.
    pub fn is_odd(&self) -> bool {
        !matches!(self.rhs, Rhs::Source(_))
    }

    #[inline]
    fn derivs(&self, r: f64, y: &State) -> State {
        let dim = self.op.dim as i32;
        let rn = if dim == 1 { 1.0 } else { r.powi(dim - 1) };
        let du = phi_p_inv(y[1] / rn, self.op.exponent);
        let dv = -rn * self.forcing(r, y[0]);
        [du, dv]
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub rtol: f64,
    pub atol: f64,
    pub startup_radius: f64,
    /// Right end of the integration interval (at most 1).
    pub r_end: f64,
    pub blowup_limit: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Keep samples and dense output segments.
    pub dense: bool,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            startup_radius: 1e-6,
            r_end: 1.0,
            blowup_limit: 1e12,
            max_step: 0.02,
            max_steps: 2_000_000,
            dense: true,
        }
    }
}

impl IvpOptions {
    pub fn summary_only(mut self) -> Self {
        self.dense = false;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn until(mut self, r_end: f64) -> Self {
        self.r_end = r_end;
        self
    }
}

/// Leading-order values at `r = ε` of the solution with `u(0) = α`,
/// `u'(0) = 0`:
///
/// ```text
/// u(ε) = α - φ_p^{-1}(F(0, α) / N) ε^p' / p',   v(ε) = -F(0, α) ε^N / N.
/// ```
pub fn origin_startup(problem: &Problem, alpha: f64, eps: f64) -> (f64, f64) {
    let p = problem.op.exponent;
    let n = problem.op.dim as f64;
    let q = p.conjugate();
    let f0 = problem.forcing(0.0, alpha);
    let u = alpha - phi_p_inv(f0 / n, p) * eps.powf(q) / q;
    let v = -f0 * eps.powi(problem.op.dim as i32) / n;
    (u, v)
}

/// Shoots with default options.
pub fn shoot(problem: &Problem, alpha: f64) -> Result<Trajectory, Error> {
    shoot_with(problem, alpha, &IvpOptions::default())
}

/// Shoots from `u(0) = alpha`, `u'(0) = 0` to `opts.r_end`.
pub fn shoot_with(problem: &Problem, alpha: f64, opts: &IvpOptions) -> Result<Trajectory, Error> {
    if !(alpha.is_finite()) || (alpha == 0.0 && problem.is_odd()) {
        return Err(Error::InvalidArgument(format!(
            "initial value must be nonzero and finite, got {alpha}"
        )));
    }
    let eps = opts.startup_radius;
    if !(eps > 0.0 && eps <= 1e-4) {
        return Err(Error::InvalidArgument(format!(
            "startup radius must lie in (0, 1e-4], got {eps}"
        )));
    }
    if !(opts.r_end > eps && opts.r_end <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "integration end must lie in (eps, 1], got {}",
            opts.r_end
        )));
    }
    let p = problem.op.exponent;
    let dim = problem.op.dim;
    let (u0, v0) = origin_startup(problem, alpha, eps);
    let startup = Sample {
        r: eps,
        u: u0,
        v: v0,
    };
    let sign = sign_of(u0).or(sign_of(alpha));
    let run = integrate(
        problem,
        startup,
        opts.r_end,
        eps.min(opts.max_step),
        sign,
        opts,
    )?;
    let max_abs_u = run.max_abs_u.max(alpha.abs());

    let floor = SIMPLICITY_THRESHOLD * run.max_abs_slope;
    let cut = opts.r_end - BOUNDARY_ZONE;
    let degenerate = run.zeros.iter().any(|z| z.r < cut && z.slope.abs() < floor);

    Ok(Trajectory {
        exponent: p,
        dim,
        alpha,
        startup,
        samples: run.samples,
        segments: run.segments,
        zeros: run.zeros,
        r_end: opts.r_end,
        terminal: run.terminal,
        max_abs_u,
        max_abs_slope: run.max_abs_slope,
        degenerate,
        steps: run.steps,
    })
}

/// Shoots inward from `u(1) = 0`, `v(1) = flux` down to `r_stop`.
///
/// Only the sign of `u` and the zero set are meaningful to callers that
/// compare with an origin shot, since the scale is arbitrary.
pub fn shoot_inward(
    problem: &Problem,
    flux: f64,
    r_stop: f64,
    opts: &IvpOptions,
) -> Result<InwardShot, Error> {
    if !(flux.is_finite() && flux != 0.0) {
        return Err(Error::InvalidArgument(format!(
            "boundary flux must be nonzero and finite, got {flux}"
        )));
    }
    if !(r_stop > 0.0 && r_stop < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "inward shot must stop inside (0, 1), got {r_stop}"
        )));
    }
    let start = Sample {
        r: 1.0,
        u: 0.0,
        v: flux,
    };
    let h0 = opts.startup_radius.min(opts.max_step);
    let mut run = integrate(problem, start, r_stop, h0, None, opts)?;
    run.samples.reverse();
    run.segments.reverse();
    run.zeros.reverse();
    let slope_at_end = trajectory::slope_from_flux(flux, 1.0, problem.op.dim, problem.op.exponent);
    Ok(InwardShot {
        exponent: problem.op.exponent,
        dim: problem.op.dim,
        r_stop,
        samples: run.samples,
        segments: run.segments,
        zeros: run.zeros,
        inner: run.terminal,
        max_abs_u: run.max_abs_u,
        max_abs_slope: run.max_abs_slope.max(slope_at_end.abs()),
    })
}

struct Run {
    samples: Vec<Sample>,
    segments: Vec<Segment>,
    zeros: Vec<Zero>,
    terminal: Sample,
    max_abs_u: f64,
    max_abs_slope: f64,
    steps: usize,
}

/// DOPRI5 from `start` towards `r_end` in either direction. `sign` is the
/// sign of `u` at the start, or `None` when `u` starts at zero.
fn integrate(
    problem: &Problem,
    start: Sample,
    r_end: f64,
    h0: f64,
    sign: Option<f64>,
    opts: &IvpOptions,
) -> Result<Run, Error> {
    let p = problem.op.exponent;
    let dim = problem.op.dim;
    let dir = if r_end >= start.r { 1.0 } else { -1.0 };

    let mut r = start.r;
    let mut y: State = [start.u, start.v];
    let mut k1 = problem.derivs(r, &y);
    let mut h = h0;
    let mut last_rejected = false;
    let mut last_sign = sign;

    let mut samples = Vec::new();
    let mut segments = Vec::new();
    if opts.dense {
        samples.push(start);
    }
    let mut zeros = Vec::new();
    let mut max_abs_u = start.u.abs();
    let mut max_abs_slope = k1[0].abs();
    let mut steps = 0usize;

    while dir * (r_end - r) > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { r });
        }
        let remaining = (r_end - r).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let hs = dir * h;
        let k2 = problem.derivs(r + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
        let k3 = problem.derivs(r + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
        let k4 = problem.derivs(
            r + C4 * hs,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
        );
        let k5 = problem.derivs(
            r + C5 * hs,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
        );
        let r_new = if last { r_end } else { r + hs };
        let k6 = problem.derivs(
            r_new,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                hs,
            ),
        );
        let y_new = axpy(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            hs,
        );
        let k7 = problem.derivs(r_new, &y_new);

        let mut err_sq = 0.0;
        for i in 0..2 {
            let e =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (0.5 * err_sq).sqrt();

        if !err.is_finite() && !(y_new[0].is_finite() && y_new[1].is_finite()) {
            return Err(Error::BlowUp {
                r,
                limit: opts.blowup_limit,
            });
        }

        if err <= 1.0 {
            steps += 1;
            let ydiff = [y_new[0] - y[0], y_new[1] - y[1]];
            let bspl = [hs * k1[0] - ydiff[0], hs * k1[1] - ydiff[1]];
            let mut cont = [[0.0; 2]; 5];
            for i in 0..2 {
                cont[0][i] = y[i];
                cont[1][i] = ydiff[i];
                cont[2][i] = bspl[i];
                cont[3][i] = ydiff[i] - hs * k7[i] - bspl[i];
                cont[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let seg = Segment {
                r0: r,
                h: r_new - r,
                cont,
            };

            if let Some(s) = sign_of(y_new[0]) {
                if last_sign.is_some_and(|l| l != s) {
                    let rz = refine_zero(&seg);
                    let vz = seg.eval(rz)[1];
                    let slope = trajectory::slope_from_flux(vz, rz, dim, p);
                    max_abs_slope = max_abs_slope.max(slope.abs());
                    zeros.push(Zero { r: rz, slope });
                }
                last_sign = Some(s);
            }

            max_abs_u = max_abs_u.max(y_new[0].abs());
            max_abs_slope = max_abs_slope.max(k7[0].abs());
            if y_new[0].abs() > opts.blowup_limit || !y_new[0].is_finite() {
                return Err(Error::BlowUp {
                    r: r_new,
                    limit: opts.blowup_limit,
                });
            }

            if opts.dense {
                segments.push(seg);
                samples.push(Sample {
                    r: r_new,
                    u: y_new[0],
                    v: y_new[1],
                });
            }
            r = r_new;
            y = y_new;
            k1 = k7;

            let fac_max = if last_rejected { 1.0 } else { 5.0 };
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, fac_max);
            h = (h * fac).min(opts.max_step);
            last_rejected = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
            last_rejected = true;
        }
        if h <= 1e-14 * r.abs() {
            return Err(Error::StepUnderflow { r });
        }
    }

    Ok(Run {
        samples,
        segments,
        zeros,
        terminal: Sample {
            r: r_end,
            u: y[0],
            v: y[1],
        },
        max_abs_u,
        max_abs_slope,
        steps,
    })
}

#[inline]
fn sign_of(x: f64) -> Option<f64> {
    if x > 0.0 {
        Some(1.0)
    } else if x < 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

/// Bisection for the sign change of `u` inside one dense segment, in the
/// segment's own coordinate so that backward steps work too.
fn refine_zero(seg: &Segment) -> f64 {
    let at = |s: f64| seg.eval(seg.r0 + s * seg.h)[0];
    let ua = at(0.0);
    if ua == 0.0 {
        return seg.r0;
    }
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) * seg.h.abs() <= 1e-14 {
            break;
        }
        let um = at(mid);
        if um == 0.0 {
            return seg.r0 + mid * seg.h;
        }
        if (um > 0.0) == (ua > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    seg.r0 + 0.5 * (a + b) * seg.h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn op(p: f64, dim: u32, m: Weight) -> Operator {
        Operator::new(Exponent::new(p).unwrap(), dim, m).unwrap()
    }

    fn unit(p: f64, dim: u32) -> Operator {
        op(p, dim, Weight::constant(1.0).unwrap())
    }

    /// Classical RK4 at fixed step from the same startup point; the
    /// refinement oracle for the adaptive integrator.
    fn fixed_step(problem: &Problem, alpha: f64, steps: usize) -> (f64, usize) {
        let eps = 1e-6;
        let (u0, v0) = origin_startup(problem, alpha, eps);
        let mut y = [u0, v0];
        let mut r = eps;
        let h = (1.0 - eps) / steps as f64;
        let mut zeros = 0;
        for _ in 0..steps {
            let k1 = problem.derivs(r, &y);
            let k2 = problem.derivs(
                r + 0.5 * h,
                &[y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
            );
            let k3 = problem.derivs(
                r + 0.5 * h,
                &[y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
            );
            let k4 = problem.derivs(r + h, &[y[0] + h * k3[0], y[1] + h * k3[1]]);
            let next = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if next[0] * y[0] < 0.0 {
                zeros += 1;
            }
            y = next;
            r += h;
        }
        (y[0], zeros)
    }

    #[test]
    fn cosine_shot_hits_the_boundary() {
        let t = shoot(&unit(2.0, 1).linear((PI / 2.0).powi(2)), 1.0).unwrap();
        assert!(t.end_value().abs() <= 1e-9, "{}", t.end_value());
        assert_eq!(t.interior_zero_count(), 0);
    }

    #[test]
    fn third_harmonic_zero_location() {
        let t = shoot(&unit(2.0, 1).linear((1.5 * PI).powi(2)), 1.0).unwrap();
        assert_eq!(t.interior_zero_count(), 1);
        let z = t.interior_zeros().next().unwrap();
        assert!((z.r - 1.0 / 3.0).abs() <= 1e-9, "{}", z.r);
        assert!((z.slope + 1.5 * PI).abs() < 1e-7);
        assert!(!t.degenerate);
    }

    #[test]
    fn matches_fixed_step_refinement() {
        let problem = unit(3.0, 2).linear(10.0);
        let t = shoot(&problem, 1.0).unwrap();
        let (coarse, zc) = fixed_step(&problem, 1.0, 20_000);
        let (fine, zf) = fixed_step(&problem, 1.0, 200_000);
        assert_eq!(zc, zf);
        assert!(
            (coarse - fine).abs() < 1e-7,
            "oracle not converged: {coarse} vs {fine}"
        );
        assert_eq!(t.interior_zero_count(), zf);
        assert!(
            (t.end_value() - fine).abs() < 1e-7,
            "{} vs {fine}",
            t.end_value()
        );
    }

    #[test]
    fn startup_series_example() {
        let problem = unit(2.0, 1).linear(1.0);
        let eps = 1e-6;
        let (u, v) = origin_startup(&problem, 1.0, eps);
        assert!((u - (1.0 - eps * eps / 2.0)).abs() < 1e-17);
        assert!((v + eps).abs() < 1e-20);
    }

    #[test]
    fn startup_radius_insensitivity() {
        // p < 2 needs tighter tolerances: the flux passes through zero
        // non-smoothly and default-tolerance noise reaches 1e-8.
        for (p, dim, rtol, atol) in [
            (2.0, 1, 1e-10, 1e-12),
            (3.0, 2, 1e-10, 1e-12),
            (2.5, 3, 1e-10, 1e-12),
            (1.5, 1, 1e-13, 1e-15),
        ] {
            let problem = unit(p, dim).linear(20.0);
            let a = IvpOptions {
                startup_radius: 1e-4,
                ..Default::default()
            }
            .with_tolerances(rtol, atol);
            let b = IvpOptions {
                startup_radius: 5e-5,
                ..Default::default()
            }
            .with_tolerances(rtol, atol);
            let ua = shoot_with(&problem, 1.0, &a).unwrap().end_value();
            let ub = shoot_with(&problem, 1.0, &b).unwrap().end_value();
            assert!((ua - ub).abs() <= 1e-9, "p={p} N={dim}: {ua} vs {ub}");
        }
        // m'(0) != 0 adds an O(ε^(N+1)) startup error; measured at tight
        // tolerance so that integrator noise does not mask it.
        let problem = op(2.5, 1, Weight::polynomial(vec![1.0, -2.0]).unwrap()).linear(20.0);
        let tight = IvpOptions::default().with_tolerances(1e-13, 1e-15);
        let half = IvpOptions {
            startup_radius: 5e-7,
            ..tight
        };
        let ua = shoot_with(&problem, 1.0, &tight).unwrap().end_value();
        let ub = shoot_with(&problem, 1.0, &half).unwrap().end_value();
        assert!((ua - ub).abs() <= 1e-10, "{ua} vs {ub}");
    }

    #[test]
    fn odd_symmetry_is_exact() {
        let problem = op(2.5, 3, Weight::cos_pi(3.0)).linear(40.0);
        let a = shoot(&problem, 1.0).unwrap();
        let b = shoot(&problem, -1.0).unwrap();
        assert_eq!(a.end_value(), -b.end_value());
        assert_eq!(a.zeros.len(), b.zeros.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.r, y.r);
            assert_eq!(x.u, -y.u);
            assert_eq!(x.v, -y.v);
        }
    }

    #[test]
    fn linear_homogeneity() {
        let problem = op(2.5, 1, Weight::polynomial(vec![1.0, -2.0]).unwrap()).linear(30.0);
        let a = shoot(&problem, 1.0).unwrap();
        for c in [0.1, 3.0, 250.0] {
            let b = shoot(&problem, c).unwrap();
            for i in 0..=50 {
                let r = i as f64 / 50.0;
                let (ua, ub) = (a.value(r), b.value(r));
                assert!(
                    (c * ua - ub).abs() <= 1e-9 * c.max(1.0),
                    "c={c} r={r}: {} vs {ub}",
                    c * ua
                );
            }
        }
    }

    #[test]
    fn zero_count_stable_under_tighter_tolerance() {
        let battery = [
            (2.0, 1, Weight::polynomial(vec![1.0, -2.0]).unwrap(), 300.0),
            (2.5, 3, Weight::cos_pi(3.0), 500.0),
            (1.5, 1, Weight::constant(1.0).unwrap(), 80.0),
            (3.0, 2, Weight::cos_pi(3.0), -200.0),
        ];
        for (p, dim, m, mu) in battery {
            let problem = op(p, dim, m).linear(mu);
            let loose = shoot(&problem, 1.0).unwrap();
            let tight = shoot_with(
                &problem,
                1.0,
                &IvpOptions::default().with_tolerances(1e-11, 1e-13),
            )
            .unwrap();
            assert_eq!(
                loose.crossing_count(),
                tight.crossing_count(),
                "p={p} mu={mu}"
            );
        }
    }

    #[test]
    fn closed_form_zeros_for_general_p() {
        use crate::pfuncs::{pi_p, unit_interval_eigenvalue};
        for p in [1.5, 2.5, 3.0] {
            let pe = Exponent::new(p).unwrap();
            let k = 3;
            let lambda = unit_interval_eigenvalue(k, pe);
            let t = shoot(&unit(p, 1).linear(lambda), 1.0).unwrap();
            assert_eq!(t.interior_zero_count(), k - 1);
            // u(r) ∝ sin_p(ω (1 - r)), zeros where ω (1 - r) = j π_p
            let omega = (2 * k - 1) as f64 * 0.5 * pi_p(pe);
            for (j, z) in t.interior_zeros().enumerate() {
                let expected = 1.0 - (k - 1 - j) as f64 * pi_p(pe) / omega;
                assert!(
                    (z.r - expected).abs() < 1e-8,
                    "p={p} j={j}: {} vs {expected}",
                    z.r
                );
            }
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let problem = op(2.0, 1, Weight::constant(-1.0).unwrap()).linear(2000.0);
        match shoot(&problem, 1.0) {
            Err(Error::BlowUp { r, .. }) => assert!(r > 0.0 && r < 1.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn rejects_zero_initial_value() {
        assert!(shoot(&unit(2.0, 1).linear(1.0), 0.0).is_err());
    }

    #[test]
    fn dense_output_tracks_the_solution() {
        let t = shoot(&unit(2.0, 1).linear(4.0), 1.0).unwrap();
        for i in 0..=40 {
            let r = i as f64 / 40.0;
            assert!((t.value(r) - (2.0 * r).cos()).abs() < 1e-9);
            assert!((t.slope(r) + 2.0 * (2.0 * r).sin()).abs() < 1e-8);
        }
        assert!((t.end_value() - 2f64.cos()).abs() < 1e-10);
        let z = t.interior_zeros().next().unwrap();
        assert!((z.r - PI / 4.0).abs() < 1e-10);
    }
}
