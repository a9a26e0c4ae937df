//! Scalar p-calculus: the power map `φ_p`, its inverse, the half period
//! `π_p` and the generalized sine `sin_p`.
//!
//! `sin_p` is the solution of `(φ_p(u'))' + (p-1) φ_p(u) = 0` with
//! `u(0) = 0`, `u'(0) = 1`. With this normalization the energy identity
//! `|sin_p|^p + |sin_p'|^p = 1` holds exactly, and on the first quarter
//! period the function is the inverse of
//!
//! ```text
//! x = ∫_0^u (1 - s^p)^(-1/p) ds .
//! ```
//!
//! Other conventions in use (for instance `(φ_p(u'))' + φ_p(u) = 0`) differ
//! by a rescaling of the argument: if `S` solves the unit-coefficient
//! equation then `S(x) = (p-1)^(-1/p) sin_p((p-1)^(1/p) x)`, up to the
//! normalization of `S'(0)`.

use std::f64::consts::PI;

use crate::error::Error;

/// A Lebesgue exponent `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self, Error> {
        if p.is_finite() && p > 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }

    /// Hölder conjugate `p' = p / (p - 1)`.
    #[inline]
    pub fn conjugate(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }

    /// The conjugate exponent as an `Exponent`.
    pub fn dual(self) -> Exponent {
        Exponent(self.conjugate())
    }
}

/// `φ_p(s) = |s|^(p-2) s`, evaluated as `|s|^(p-1) sign(s)`.
#[inline]
pub fn phi_p(s: f64, p: Exponent) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s.abs().powf(p.0 - 1.0).copysign(s)
}

/// Inverse of [`phi_p`], which is `φ_{p'}`.
#[inline]
pub fn phi_p_inv(s: f64, p: Exponent) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s.abs().powf(1.0 / (p.0 - 1.0)).copysign(s)
}

/// Half period of `sin_p`: `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: Exponent) -> f64 {
    2.0 * PI / (p.0 * (PI / p.0).sin())
}

/// `sin_p(x)` and its derivative.
///
/// Builds a fresh table for every call; use [`PTrigTable`] when evaluating
/// many points at the same exponent.
pub fn sin_p(x: f64, p: Exponent) -> (f64, f64) {
    PTrigTable::new(p).eval(x)
}

/// `F_q(u) = ∫_0^u (1 - s^q)^(-1/q) ds` for `0 <= u`, `u^q <= 1/2`.
///
/// Binomial series `(1 - t)^(-1/q) = Σ (1/q)_n t^n / n!` integrated term by
/// term; with `u^q <= 1/2` the terms decay at least like `2^-n`.
fn quarter_integral(u: f64, q: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let t = u.powf(q);
    let a = 1.0 / q;
    let mut coeff = 1.0; // (1/q)_n / n!
    let mut tn = 1.0;
    let mut sum = 0.0;
    for n in 0..400 {
        let term = coeff * tn / (q * n as f64 + 1.0);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        coeff *= (a + n as f64) / (n as f64 + 1.0);
        tn *= t;
    }
    u * sum
}

/// Solves `F_q(u) = target` on `[0, upper]` by safeguarded Newton.
/// `F_q` is increasing with derivative `(1 - u^q)^(-1/q)`.
fn invert_quarter_integral(target: f64, q: f64, upper: f64, guess: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, upper);
    let mut u = guess.clamp(0.0, upper);
    for _ in 0..100 {
        let resid = quarter_integral(u, q) - target;
        if resid > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let slope = (1.0 - u.powf(q)).powf(-1.0 / q);
        let mut next = u - resid / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-16 * u.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return next;
        }
        u = next;
    }
    u
}

/// Cached samples of `sin_p` on the first quarter period.
///
/// The table stores exact values (to round-off) at equispaced abscissae; an
/// evaluation interpolates linearly for a starting guess and then polishes
/// by Newton on the integral representation, so table resolution only
/// affects cost.
#[derive(Debug, Clone)]
pub struct PTrigTable {
    p: Exponent,
    pi_p: f64,
    /// Abscissa where `sin_p^p = 1/2`; below it the value is recovered from
    /// the `F_p` branch, above it from the derivative via `F_{p'}`.
    x_split: f64,
    /// `(x, sin_p(x), sin_p'(x))` on `[0, π_p/2]`.
    samples: Vec<(f64, f64, f64)>,
}

const TABLE_INTERVALS: usize = 256;

impl PTrigTable {
    pub fn new(p: Exponent) -> Self {
        let pi_p = pi_p(p);
        let half_root = 0.5f64.powf(1.0 / p.0);
        let x_split = quarter_integral(half_root, p.0);
        let mut table = Self {
            p,
            pi_p,
            x_split,
            samples: Vec::with_capacity(TABLE_INTERVALS + 1),
        };
        let quarter = 0.5 * pi_p;
        let mut prev = (0.0, 0.0);
        for i in 0..=TABLE_INTERVALS {
            let x = quarter * i as f64 / TABLE_INTERVALS as f64;
            let (u, w) = table.quarter_eval(x, prev);
            table.samples.push((x, u, w));
            prev = (u, w);
        }
        table
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn pi_p(&self) -> f64 {
        self.pi_p
    }

    pub fn samples(&self) -> &[(f64, f64, f64)] {
        &self.samples
    }

    /// `(sin_p(x), sin_p'(x))` for `x` in `[0, π_p/2]`, with a guess for
    /// `(u, w)`.
    fn quarter_eval(&self, x: f64, guess: (f64, f64)) -> (f64, f64) {
        let p = self.p.0;
        let quarter = 0.5 * self.pi_p;
        let half_root = 0.5f64.powf(1.0 / p);
        if x <= self.x_split {
            let u = invert_quarter_integral(x, p, half_root, guess.0);
            (u, (1.0 - u.powf(p)).max(0.0).powf(1.0 / p))
        } else {
            // π_p/2 - x = F_{p'}(w^(p-1)) / (p-1), with w = sin_p'(x).
            let q = self.p.conjugate();
            let rest = ((quarter - x).max(0.0)) * (p - 1.0);
            let z_upper = 0.5f64.powf(1.0 / q);
            let z = invert_quarter_integral(rest, q, z_upper, guess.1.powf(p - 1.0));
            let w = z.powf(1.0 / (p - 1.0));
            ((1.0 - w.powf(p)).max(0.0).powf(1.0 / p), w)
        }
    }

    /// `(sin_p(x), sin_p'(x))` for any real `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if x < 0.0 {
            let (u, w) = self.eval(-x);
            return (-u, w);
        }
        let period = 2.0 * self.pi_p;
        let mut y = x % period;
        let mut sign = 1.0;
        if y >= self.pi_p {
            y -= self.pi_p;
            sign = -1.0;
        }
        let quarter = 0.5 * self.pi_p;
        let (reflected, y) = if y > quarter {
            (true, self.pi_p - y)
        } else {
            (false, y)
        };
        let (u, w) = self.quarter_eval(y, self.guess(y));
        let w = if reflected { -w } else { w };
        (sign * u, sign * w)
    }

    fn guess(&self, x: f64) -> (f64, f64) {
        let quarter = 0.5 * self.pi_p;
        let t = (x / quarter * TABLE_INTERVALS as f64).clamp(0.0, TABLE_INTERVALS as f64);
        let i = (t.floor() as usize).min(TABLE_INTERVALS - 1);
        let frac = t - i as f64;
        let (_, u0, w0) = self.samples[i];
        let (_, u1, w1) = self.samples[i + 1];
        (u0 + frac * (u1 - u0), w0 + frac * (w1 - w0))
    }
}

/// `λ_k = (p-1) ((2k-1) π_p / 2)^p`: the k-th eigenvalue of
/// `(φ_p(u'))' + λ φ_p(u) = 0`, `u'(0) = u(1) = 0`.
pub fn unit_interval_eigenvalue(k: usize, p: Exponent) -> f64 {
    let omega = (2 * k - 1) as f64 * 0.5 * pi_p(p);
    (p.0 - 1.0) * omega.powf(p.0)
}
