//! Variational oracle for `μ_1^±`: minimizes
//!
//! ```text
//! Q(u) = ∫ r^(N-1) |u'|^p dr / ∫ r^(N-1) m |u|^p dr
//! ```
//!
//! over continuous piecewise-linear `u` with `u(1) = 0` and a positive
//! denominator. Independent of the shooting code: it never integrates the
//! ODE. Descent directions are preconditioned by the tridiagonal Hessian of
//! the numerator, each step is followed by a line search on `Q` and the
//! projection `u -> |u|` (which cannot increase `Q`).

use crate::error::Error;
use crate::radial_ivp::Operator;

use super::Sign;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighOptions {
    /// Finest grid, in intervals.
    pub intervals: usize,
    /// Coarsest grid of the nested solve.
    pub coarse_intervals: usize,
    pub max_iter: usize,
    /// Stop once an iteration lowers `Q` by less than this, relatively.
    pub stall_tol: f64,
    /// Richardson extrapolation from the two finest grids.
    pub extrapolate: bool,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        Self {
            intervals: 1 << 12,
            coarse_intervals: 64,
            max_iter: 4000,
            stall_tol: 1e-15,
            extrapolate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighEstimate {
    /// Best estimate of `μ_1^ν`.
    pub value: f64,
    /// Quotient on the finest grid.
    pub fine: f64,
    /// Quotient on the grid with half as many intervals.
    pub coarse: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

struct Grid {
    n: usize,
    h: f64,
    p: f64,
    /// `∫ r^(N-1)` over each element.
    elem: Vec<f64>,
    /// Lumped mass `m(r_i) ∫ r^(N-1) hat_i`, for the free nodes `0..n`.
    mass: Vec<f64>,
}

const GL_NODES: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_9,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

impl Grid {
    fn new(op: &Operator, n: usize) -> Self {
        let h = 1.0 / n as f64;
        let dim = op.dim as i32;
        let rn = |r: f64| r.powi(dim - 1);
        // 4-point Gauss on [0, 1], weights sum to 1
        let gauss = |a: f64, f: &dyn Fn(f64) -> f64| -> f64 {
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(&s, w)| w * f(a + h * s))
                .sum::<f64>()
                * h
        };
        let elem: Vec<f64> = (0..n).map(|e| gauss(e as f64 * h, &rn)).collect();
        let mut mass = vec![0.0; n];
        for (i, c) in mass.iter_mut().enumerate() {
            let ri = i as f64 * h;
            let mut s = 0.0;
            if i > 0 {
                let a = ri - h;
                s += gauss(a, &|r| rn(r) * (r - a) / h);
            }
            s += gauss(ri, &|r| rn(r) * (ri + h - r) / h);
            *c = s * op.weight.eval(ri);
        }
        Self {
            n,
            h,
            p: op.p(),
            elem,
            mass,
        }
    }

    fn value(&self, u: &[f64], i: usize) -> f64 {
        if i < self.n {
            u[i]
        } else {
            0.0
        }
    }

    fn numerator(&self, u: &[f64]) -> f64 {
        (0..self.n)
            .map(|e| self.elem[e] * ((self.value(u, e + 1) - u[e]) / self.h).abs().powf(self.p))
            .sum()
    }

    fn denominator(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.mass)
            .map(|(x, c)| c * x.abs().powf(self.p))
            .sum()
    }

    fn quotient(&self, u: &[f64]) -> f64 {
        let d = self.denominator(u);
        if d > 0.0 {
            self.numerator(u) / d
        } else {
            f64::INFINITY
        }
    }

    /// `∇E - Q ∇M` and the tridiagonal preconditioner `(diag, off)`.
    fn gradient(&self, u: &[f64], q: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (n, h, p) = (self.n, self.h, self.p);
        let mut g = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let slopes: Vec<f64> = (0..n).map(|e| (self.value(u, e + 1) - u[e]) / h).collect();
        let smax = slopes.iter().fold(0.0f64, |a, s| a.max(s.abs()));
        let floor = 1e-3 * smax.max(f64::MIN_POSITIVE);
        for e in 0..n {
            let s = slopes[e];
            let flux = p * self.elem[e] * s.abs().powf(p - 1.0).copysign(s) / h;
            let k = p * (p - 1.0) * self.elem[e] * s.abs().max(floor).powf(p - 2.0) / (h * h);
            g[e] -= flux;
            diag[e] += k;
            if e + 1 < n {
                g[e + 1] += flux;
                diag[e + 1] += k;
                off[e] -= k;
            }
        }
        for i in 0..n {
            g[i] -= q * p * self.mass[i] * u[i].abs().powf(p - 1.0).copysign(u[i]);
        }
        (g, diag, off)
    }
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut b = diag[0];
    d[0] = rhs[0] / b;
    for i in 1..n {
        c[i - 1] = off[i - 1] / b;
        b = diag[i] - off[i - 1] * c[i - 1];
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

fn normalize(u: &mut [f64]) {
    let s = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if s > 0.0 {
        u.iter_mut().for_each(|x| *x /= s);
    }
}

fn trial(u: &[f64], d: &[f64], tau: f64) -> Vec<f64> {
    u.iter().zip(d).map(|(x, y)| (x - tau * y).abs()).collect()
}

/// Descends on one grid from `u`. Returns `(Q, gradient norm, iterations)`.
fn descend(grid: &Grid, u: &mut Vec<f64>, opts: &RayleighOptions) -> (f64, f64, usize) {
    let mut q = grid.quotient(u);
    let mut gnorm = f64::INFINITY;
    let mut stalls = 0;
    for it in 0..opts.max_iter {
        let (g, diag, off) = grid.gradient(u, q);
        let m = grid.denominator(u);
        gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt() / m;
        let d = solve_tridiagonal(&diag, &off, &g);
        let phi = |tau: f64| grid.quotient(&trial(u, &d, tau));

        // Bracket a minimum along the ray, then refine by golden section.
        let mut tau = 1.0;
        let mut f = phi(tau);
        let (mut a, mut b, mut c);
        if f < q {
            let mut prev = (0.0, q);
            loop {
                let next = phi(2.0 * tau);
                if next >= f || tau > 1e6 {
                    a = prev.0;
                    b = tau;
                    c = 2.0 * tau;
                    break;
                }
                prev = (tau, f);
                tau *= 2.0;
                f = next;
            }
        } else {
            let mut found = false;
            for _ in 0..40 {
                tau *= 0.25;
                f = phi(tau);
                if f < q {
                    found = true;
                    break;
                }
            }
            if !found {
                return (q, gnorm, it);
            }
            a = 0.0;
            b = tau;
            c = 4.0 * tau;
        }
        let mut fb = f;
        const GOLD: f64 = 0.381_966_011_250_105_1;
        for _ in 0..12 {
            let (x, left) = if b - a > c - b {
                (b - GOLD * (b - a), true)
            } else {
                (b + GOLD * (c - b), false)
            };
            let fx = phi(x);
            if fx < fb {
                if left {
                    c = b;
                } else {
                    a = b;
                }
                b = x;
                fb = fx;
            } else if left {
                a = x;
            } else {
                c = x;
            }
        }
        *u = trial(u, &d, b);
        normalize(u);
        let q_new = grid.quotient(u);
        let drop = (q - q_new) / q.abs();
        q = q_new.min(q);
        if drop < opts.stall_tol {
            stalls += 1;
            if stalls >= 3 {
                return (q, gnorm, it + 1);
            }
        } else {
            stalls = 0;
        }
    }
    (q, gnorm, opts.max_iter)
}

fn prolong(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let next = if i + 1 < n { u[i + 1] } else { 0.0 };
        out.push(u[i]);
        out.push(0.5 * (u[i] + next));
    }
    out
}

/// Minimal quotient for the sequence `sign`: `μ_1^+` directly, `μ_1^-` as
/// `-μ_1^+` of the negated weight.
pub fn rayleigh_mu1(
    op: &Operator,
    sign: Sign,
    opts: &RayleighOptions,
) -> Result<RayleighEstimate, Error> {
    if sign == Sign::Minus {
        let flipped = op.with_weight(op.weight.negated());
        let est = rayleigh_mu1(&flipped, Sign::Plus, opts)?;
        return Ok(RayleighEstimate {
            value: -est.value,
            fine: -est.fine,
            coarse: -est.coarse,
            ..est
        });
    }
    if op.weight.positive_measure() <= 0.0 {
        return Err(Error::PositiveSequenceAbsent);
    }
    if !opts.intervals.is_power_of_two()
        || opts.coarse_intervals > opts.intervals / 2
        || opts.coarse_intervals < 4
    {
        return Err(Error::InvalidArgument(
            "grid sizes must be powers of two with coarse <= fine / 2".into(),
        ));
    }
    let mut n = opts.coarse_intervals.next_power_of_two();
    let grid = Grid::new(op, n);
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let r = i as f64 * grid.h;
            op.weight.eval(r).max(0.0) * (1.0 - r)
        })
        .collect();
    if grid.denominator(&u) <= 0.0 {
        // positive part sits between grid nodes; fall back to a flat start
        u.iter_mut().for_each(|x| *x = 1.0);
    }
    normalize(&mut u);

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut gnorm;
    loop {
        let grid = Grid::new(op, n);
        let (q, g, it) = descend(&grid, &mut u, opts);
        iterations += it;
        gnorm = g;
        if !q.is_finite() || it >= opts.max_iter {
            return Err(Error::RayleighNotConverged {
                best: q,
                gradient_norm: g,
            });
        }
        history.push(q);
        if n >= opts.intervals {
            break;
        }
        u = prolong(&u);
        n *= 2;
    }
    let fine = history[history.len() - 1];
    let coarse = history[history.len() - 2];
    // two grids this fine must already agree closely
    if !((coarse - fine).abs() <= 1e-3 * fine.abs()) {
        return Err(Error::RayleighNotConverged {
            best: fine,
            gradient_norm: gnorm,
        });
    }
    let value = if opts.extrapolate {
        (4.0 * fine - coarse) / 3.0
    } else {
        fine
    };
    Ok(RayleighEstimate {
        value,
        fine,
        coarse,
        gradient_norm: gnorm,
        iterations,
    })
}
