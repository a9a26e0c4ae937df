//! Nodal solutions of
//!
//! ```text
//! (r^(N-1) φ_p(u'))' + γ m(r) r^(N-1) f(u) = 0,  u'(0) = 0,  u(1) = 0,
//! ```
//!
//! and the branches they lie on. A solution is found by shooting in the
//! amplitude `α = u(0)` at fixed `γ`; a branch point by shooting in `γ` at
//! fixed `α`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bracket::{brent, isolate, Probe};
use crate::error::Error;
use crate::greens::{apply_gp, fixed_point_defect, GreensOptions, SourceTerm};
use crate::pfuncs::{phi_p, Exponent};
use crate::radial_ivp::{shoot_with, IvpOptions, Operator, Perturbation, Trajectory};
use crate::spectrum::{Sign, Spectrum};

/// The nonlinearity `f`, odd in `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = c φ_p(u)`.
    Homogeneous { scale: f64 },
    /// `f(u) = φ_p(u) (f0 + f_inf |u|^q) / (1 + |u|^q)`.
    Saturating { f0: f64, f_inf: f64, q: f64 },
}

impl Nonlinearity {
    pub fn homogeneous(scale: f64) -> Result<Self, Error> {
        let f = Nonlinearity::Homogeneous { scale };
        f.check_limits()?;
        Ok(f)
    }

    pub fn saturating(f0: f64, f_inf: f64, q: f64) -> Result<Self, Error> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidNonlinearity(format!(
                "q must be positive, got {q}"
            )));
        }
        let f = Nonlinearity::Saturating { f0, f_inf, q };
        f.check_limits()?;
        Ok(f)
    }

    /// `u (1 + 2u²) / (1 + u²)` at `p = 2`: `f_0 = 1`, `f_∞ = 2`.
    pub fn reference() -> Self {
        Nonlinearity::Saturating {
            f0: 1.0,
            f_inf: 2.0,
            q: 2.0,
        }
    }

    fn check_limits(&self) -> Result<(), Error> {
        let (a, b) = (self.f0(), self.f_inf());
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidNonlinearity(format!(
                "limits must lie in (0, inf), got f0={a}, f_inf={b}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, u: f64, p: Exponent) -> f64 {
        match *self {
            Nonlinearity::Homogeneous { scale } => scale * phi_p(u, p),
            Nonlinearity::Saturating { f0, f_inf, q } => {
                let t = u.abs().powf(q);
                let ratio = if t.is_finite() {
                    (f0 + f_inf * t) / (1.0 + t)
                } else {
                    f_inf
                };
                ratio * phi_p(u, p)
            }
        }
    }

    /// `lim f(s)/φ_p(s)` as `s -> 0`.
    pub fn f0(&self) -> f64 {
        match *self {
            Nonlinearity::Homogeneous { scale } => scale,
            Nonlinearity::Saturating { f0, .. } => f0,
        }
    }

    /// `lim f(s)/φ_p(s)` as `|s| -> ∞`.
    pub fn f_inf(&self) -> f64 {
        match *self {
            Nonlinearity::Homogeneous { scale } => scale,
            Nonlinearity::Saturating { f_inf, .. } => f_inf,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, Nonlinearity::Homogeneous { .. })
    }

    /// Sampled checks: `f(s) s > 0` for `s != 0`, and `f(s)/φ_p(s)` within
    /// 5% of the declared limits at `|s| = 1e-6` and `1e6`.
    pub fn validate(&self, p: Exponent) -> Result<(), Error> {
        self.check_limits()?;
        for i in -80..=80 {
            let s = 10f64.powf(i as f64 / 10.0);
            for x in [s, -s] {
                let v = self.eval(x, p);
                if !(v * x > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidNonlinearity(format!(
                        "f(s) s > 0 fails at s = {x}"
                    )));
                }
            }
        }
        for (s, want, name) in [(1e-6, self.f0(), "f0"), (1e6, self.f_inf(), "f_inf")] {
            for x in [s, -s] {
                let ratio = self.eval(x, p) / phi_p(x, p);
                if (ratio / want - 1.0).abs() > 0.05 {
                    return Err(Error::InvalidNonlinearity(format!(
                        "f(s)/phi_p(s) = {ratio} at s = {x}, declared {name} = {want}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Nonlinearity::Homogeneous { scale } => write!(f, "{scale}*phi_p(u)"),
            Nonlinearity::Saturating { f0, f_inf, q } => {
                write!(f, "phi_p(u)*({f0}+{f_inf}|u|^{q})/(1+|u|^{q})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NodalOptions {
    pub ivp: IvpOptions,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_ratio: f64,
    /// Required `|u(1)|`.
    pub boundary_tol: f64,
    /// Allowed `sup |G_p(γ m f(u)) - u| / sup |u|`.
    pub residual_tol: f64,
    pub greens: GreensOptions,
}

impl Default for NodalOptions {
    fn default() -> Self {
        Self {
            ivp: IvpOptions {
                rtol: 1e-12,
                atol: 1e-14,
                blowup_limit: 1e250,
                ..IvpOptions::default()
            }
            .summary_only(),
            alpha_min: 1e-4,
            alpha_max: 1e4,
            alpha_ratio: 1.25,
            boundary_tol: 1e-9,
            residual_tol: 1e-6,
            greens: GreensOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodalSolution {
    pub k: usize,
    pub sigma: Sign,
    pub gamma: f64,
    pub alpha: f64,
    pub trajectory: Trajectory,
    /// Relative fixed-point defect through `G_p`.
    pub residual: f64,
    /// Set for `f = c φ_p`, where every multiple of a solution solves.
    pub homogeneous_degeneracy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanNode {
    pub alpha: f64,
    pub end_value: f64,
    pub zeros: usize,
}

/// What a failed amplitude scan saw.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub alpha_range: (f64, f64),
    pub nodes: Vec<ScanNode>,
    /// Shots that failed in the integrator.
    pub failed: usize,
    pub notes: Vec<String>,
}

impl ScanReport {
    pub fn zero_counts(&self) -> Vec<usize> {
        let mut z: Vec<usize> = self.nodes.iter().map(|n| n.zeros).collect();
        z.sort_unstable();
        z.dedup();
        z
    }
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "none found: scanned |alpha| in [{:e}, {:e}] ({} shots, {} failed), interior zero counts seen {:?}",
            self.alpha_range.0,
            self.alpha_range.1,
            self.nodes.len(),
            self.failed,
            self.zero_counts()
        )?;
        for n in &self.notes {
            write!(f, "; {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum NodalOutcome {
    Found(Box<NodalSolution>),
    NotFound(ScanReport),
}

impl NodalOutcome {
    pub fn found(self) -> Option<NodalSolution> {
        match self {
            NodalOutcome::Found(s) => Some(*s),
            NodalOutcome::NotFound(_) => None,
        }
    }
}

fn geometric(min: f64, max: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let a = min * ratio.powi(j);
        if a >= max * (1.0 - 1e-12) {
            out.push(max);
            break;
        }
        out.push(a);
        j += 1;
    }
    out
}

fn check_common(op: &Operator, f: &Nonlinearity, k: usize) -> Result<(), Error> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    f.validate(op.exponent)?;
    if !op.weight.is_admissible() {
        return Err(Error::InvalidWeight("weight needs a positive part".into()));
    }
    Ok(())
}

/// `sup |G_p(γ m f(u)) - u| / sup |u|` for a dense trajectory.
pub fn nodal_residual(
    op: &Operator,
    f: &Nonlinearity,
    gamma: f64,
    trajectory: &Trajectory,
    greens: &GreensOptions,
) -> Result<f64, Error> {
    let traj = Arc::new(trajectory.clone());
    let weight = op.weight.clone();
    let (p, f) = (op.exponent, *f);
    let mut breaks: Vec<f64> = op.weight.breakpoints().to_vec();
    breaks.extend(trajectory.zeros.iter().map(|z| z.r));
    let t = traj.clone();
    let h = SourceTerm::from_fn("gamma*m*f(u)", breaks, move |r| {
        gamma * weight.eval(r) * f.eval(t.value(r), p)
    });
    let profile = apply_gp(p, op.dim, &h, greens)?;
    Ok(fixed_point_defect(&profile, |r| traj.value(r)) / trajectory.sup_norm())
}

/// A solution with `k - 1` interior zeros and `sign(u(0)) = sigma`.
pub fn find_nodal(
    op: &Operator,
    f: &Nonlinearity,
    gamma: f64,
    k: usize,
    sigma: Sign,
    opts: &NodalOptions,
) -> Result<NodalOutcome, Error> {
    check_common(op, f, k)?;
    if !(gamma != 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be nonzero and finite, got {gamma}"
        )));
    }
    let problem = op.nonlinear(gamma, *f);
    let s = sigma.factor();
    // Scan nodes are shot at their exact amplitude; Brent works in ln α.
    let shot_at = |a: f64| -> Result<(Probe, Trajectory), Error> {
        let t = shoot_with(&problem, s * a, &opts.ivp)?;
        Ok((
            Probe {
                x: a.ln(),
                miss: s * t.end_value(),
                count: t.crossing_count(),
            },
            t,
        ))
    };
    let shot = |x: f64| shot_at(x.exp());

    let amplitudes = geometric(opts.alpha_min, opts.alpha_max, opts.alpha_ratio);
    let shots: Vec<Option<(Probe, Trajectory)>> =
        amplitudes.par_iter().map(|&a| shot_at(a).ok()).collect();
    let mut report = ScanReport {
        alpha_range: (opts.alpha_min, opts.alpha_max),
        nodes: Vec::new(),
        failed: shots.iter().filter(|x| x.is_none()).count(),
        notes: Vec::new(),
    };
    let ok: Vec<&(Probe, Trajectory)> = shots.iter().flatten().collect();
    if ok.is_empty() {
        return Err(shot_at(amplitudes[0])
            .err()
            .unwrap_or(Error::DegenerateShots));
    }
    if ok.iter().all(|(_, t)| t.degenerate) {
        return Err(Error::DegenerateShots);
    }
    report.nodes = ok
        .iter()
        .map(|(_, t)| ScanNode {
            alpha: t.alpha,
            end_value: t.end_value(),
            zeros: t.interior_zero_count(),
        })
        .collect();

    // first event in amplitude order: a direct hit or a bracket
    let mut candidate = None;
    for (i, (pr, t)) in ok.iter().enumerate() {
        if t.end_value().abs() <= opts.boundary_tol
            && t.interior_zero_count() == k - 1
            && !t.degenerate
        {
            candidate = Some(t.alpha);
            break;
        }
        if let Some((next, _)) = ok.get(i + 1) {
            let lo = pr.count.min(next.count);
            let hi = pr.count.max(next.count);
            if (pr.miss > 0.0) != (next.miss > 0.0) && lo + 1 == k && hi == k {
                let root = brent(
                    &|x| shot(x).map(|r| r.0),
                    *pr,
                    *next,
                    1e-15,
                    0.1 * opts.boundary_tol,
                    200,
                )?;
                candidate = Some(s * root.x.exp());
                break;
            }
        }
    }
    let Some(alpha) = candidate else {
        report.notes.push(format!(
            "no sign change of u(1) between shots with {} and {} zeros",
            k - 1,
            k
        ));
        return Ok(NodalOutcome::NotFound(report));
    };

    let dense = IvpOptions {
        dense: true,
        ..opts.ivp
    };
    let trajectory = shoot_with(&problem, alpha, &dense)?;
    if trajectory.end_value().abs() > opts.boundary_tol {
        report.notes.push(format!(
            "refinement stalled at alpha = {alpha}, u(1) = {:e}",
            trajectory.end_value()
        ));
        return Ok(NodalOutcome::NotFound(report));
    }
    if trajectory.interior_zero_count() != k - 1 || trajectory.degenerate {
        report.notes.push(format!(
            "candidate at alpha = {alpha} has {} interior zeros (degenerate: {})",
            trajectory.interior_zero_count(),
            trajectory.degenerate
        ));
        return Ok(NodalOutcome::NotFound(report));
    }
    let residual = nodal_residual(op, f, gamma, &trajectory, &opts.greens)?;
    if residual > opts.residual_tol {
        report.notes.push(format!(
            "candidate at alpha = {alpha} has residual {residual:e}"
        ));
        return Ok(NodalOutcome::NotFound(report));
    }
    Ok(NodalOutcome::Found(Box::new(NodalSolution {
        k,
        sigma,
        gamma,
        alpha,
        trajectory,
        residual,
        homogeneous_degeneracy: f.is_homogeneous(),
    })))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub gamma: f64,
    pub alpha: f64,
    pub sup_norm: f64,
    pub zeros: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub k: usize,
    pub sigma: Sign,
    pub nu: Sign,
    /// Ordered by increasing `|α|`.
    pub points: Vec<BranchPoint>,
    /// `μ_k^ν / f_0`, where the branch leaves the trivial line.
    pub gamma_zero_limit: f64,
    /// `μ_k^ν / f_∞`, approached at large amplitude.
    pub gamma_inf_limit: f64,
    /// Set when tracing stopped early.
    pub truncated: bool,
    pub diagnostics: Vec<String>,
}

impl Branch {
    /// `γ` at the smallest traced amplitude.
    pub fn gamma_0(&self) -> Option<f64> {
        self.points.first().map(|p| p.gamma)
    }

    /// `γ` at the largest traced amplitude.
    pub fn gamma_inf(&self) -> Option<f64> {
        self.points.last().map(|p| p.gamma)
    }

    /// Traced up to sup-norm 1e3 without losing the bracket.
    pub fn reaches_large_norm(&self) -> bool {
        !self.truncated && self.points.iter().any(|p| p.sup_norm >= 1e3)
    }
}

/// Solves `u(1; γ, α) = 0` for `|γ|` near `center` on the `k`-th count
/// interval. Counts are of sign changes, nondecreasing in `|γ|`.
fn solve_parameter<F>(shoot_at: &F, center: f64, k: usize) -> Result<Option<Probe>, Error>
where
    F: Fn(f64) -> Result<Probe, Error>,
{
    let mut lo = shoot_at(0.9 * center)?;
    let mut hi = shoot_at(1.1 * center)?;
    let mut tries = 0;
    while lo.count >= k {
        tries += 1;
        if tries > 60 {
            return Ok(None);
        }
        hi = lo;
        lo = shoot_at(lo.x * 0.8)?;
    }
    while hi.count < k {
        tries += 1;
        if tries > 60 {
            return Ok(None);
        }
        lo = hi;
        hi = shoot_at(hi.x * 1.25)?;
    }
    let (lo, hi) = match isolate(shoot_at, lo, hi, k, 200) {
        Ok(b) => b,
        Err(_) => return Ok(None),
    };
    brent(shoot_at, lo, hi, 1e-14, 0.0, 200).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeGrid {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

impl AmplitudeGrid {
    pub fn points(&self) -> Vec<f64> {
        geometric(self.min, self.max, self.ratio)
    }
}

/// Traces the branch of `k`-th nodal solutions with `sign(α) = sigma` and
/// `sign(γ) = nu`, starting near `γ = mu_k / f_0`.
pub fn trace_branch(
    op: &Operator,
    f: &Nonlinearity,
    k: usize,
    sigma: Sign,
    nu: Sign,
    mu_k: f64,
    grid: &AmplitudeGrid,
    opts: &NodalOptions,
) -> Result<Branch, Error> {
    check_common(op, f, k)?;
    if mu_k.signum() != nu.factor() {
        return Err(Error::InvalidArgument(format!(
            "mu_k = {mu_k} does not have sign {nu}"
        )));
    }
    if !(grid.min > 0.0 && grid.max > grid.min && grid.ratio > 1.0) {
        return Err(Error::InvalidArgument(
            "amplitude grid needs 0 < min < max and ratio > 1".into(),
        ));
    }
    let s = sigma.factor();
    let mut branch = Branch {
        k,
        sigma,
        nu,
        points: Vec::new(),
        gamma_zero_limit: mu_k / f.f0(),
        gamma_inf_limit: mu_k / f.f_inf(),
        truncated: false,
        diagnostics: Vec::new(),
    };
    let mut center = mu_k.abs() / f.f0();
    for a in grid.points() {
        let alpha = s * a;
        let shoot_at = |g: f64| -> Result<Probe, Error> {
            let t = shoot_with(&op.nonlinear(nu.factor() * g, *f), alpha, &opts.ivp)?;
            Ok(Probe {
                x: g,
                miss: s * t.end_value(),
                count: t.crossing_count(),
            })
        };
        let root = match solve_parameter(&shoot_at, center, k) {
            Ok(Some(r)) => r,
            Ok(None) => {
                branch.truncated = true;
                branch
                    .diagnostics
                    .push(format!("gamma bracket lost at alpha = {alpha}"));
                break;
            }
            Err(e) => {
                branch.truncated = true;
                branch
                    .diagnostics
                    .push(format!("integrator failed at alpha = {alpha}: {e}"));
                break;
            }
        };
        let gamma = nu.factor() * root.x;
        let t = shoot_with(&op.nonlinear(gamma, *f), alpha, &opts.ivp)?;
        let zeros = t.interior_zero_count();
        if zeros != k - 1 {
            branch.truncated = true;
            branch.diagnostics.push(format!(
                "zero count changed from {} to {zeros} at alpha = {alpha}; branch split here",
                k - 1
            ));
            break;
        }
        branch.points.push(BranchPoint {
            gamma,
            alpha,
            sup_norm: t.sup_norm(),
            zeros,
        });
        center = root.x;
    }
    Ok(branch)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationRow {
    pub k: usize,
    pub nu: Sign,
    pub sigma: Sign,
    pub alpha: f64,
    /// Parameter at which the amplitude-`alpha` shot solves the problem.
    pub mu: f64,
    /// `|mu - μ_k^ν| / |μ_k^ν|`.
    pub offset: f64,
    pub zeros: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationCheck {
    pub k: usize,
    pub nu: Sign,
    pub sigma: Sign,
    pub eigenvalue: f64,
    /// Rows in the order of the requested amplitudes.
    pub rows: Vec<BifurcationRow>,
    pub located: bool,
    pub shrinking: bool,
    pub counts_ok: bool,
    pub note: Option<String>,
}

impl BifurcationCheck {
    pub fn passed(&self) -> bool {
        self.located && self.shrinking && self.counts_ok && self.note.is_none()
    }
}

/// Relative offsets below this are taken as zero when checking shrinkage.
const OFFSET_FLOOR: f64 = 1e-12;

/// Small-amplitude solutions of `Δ_p u + μ m φ_p(u) + g(r, u) = 0` near
/// each `μ_k^ν`. Amplitudes should be listed in decreasing order; the check
/// at `locate_at` uses tolerance `locate_tol` (relative).
#[allow(clippy::too_many_arguments)]
pub fn verify_bifurcation_points(
    op: &Operator,
    g: Perturbation,
    ks: &[usize],
    nu: Sign,
    spectrum: &Spectrum,
    amplitudes: &[f64],
    locate_at: f64,
    locate_tol: f64,
) -> Result<Vec<BifurcationCheck>, Error> {
    let ivp = NodalOptions::default().ivp;
    let mut jobs = Vec::new();
    for &k in ks {
        let mu_k = spectrum
            .get(k, nu)
            .ok_or_else(|| Error::InvalidArgument(format!("spectrum lacks mu_{k}^{nu}")))?;
        for sigma in [Sign::Plus, Sign::Minus] {
            jobs.push((k, sigma, mu_k));
        }
    }
    let checks = jobs
        .par_iter()
        .map(|&(k, sigma, mu_k)| {
            let s = sigma.factor();
            let mut rows = Vec::new();
            let mut note = None;
            let mut center = mu_k.abs();
            for &a in amplitudes {
                let alpha = s * a;
                let shoot_at = |t: f64| -> Result<Probe, Error> {
                    let tr = shoot_with(&op.perturbed(nu.factor() * t, g), alpha, &ivp)?;
                    Ok(Probe {
                        x: t,
                        miss: s * tr.end_value(),
                        count: tr.crossing_count(),
                    })
                };
                match solve_parameter(&shoot_at, center, k) {
                    Ok(Some(root)) => {
                        let mu = nu.factor() * root.x;
                        let zeros =
                            shoot_with(&op.perturbed(mu, g), alpha, &ivp)?.interior_zero_count();
                        rows.push(BifurcationRow {
                            k,
                            nu,
                            sigma,
                            alpha,
                            mu,
                            offset: (mu - mu_k).abs() / mu_k.abs(),
                            zeros,
                        });
                        center = root.x;
                    }
                    Ok(None) => {
                        note = Some(format!("no solution bracketed at alpha = {alpha}"));
                        break;
                    }
                    Err(e) => {
                        note = Some(format!("integrator failed at alpha = {alpha}: {e}"));
                        break;
                    }
                }
            }
            let located = rows
                .iter()
                .find(|r| (r.alpha.abs() / locate_at - 1.0).abs() < 1e-12)
                .is_some_and(|r| r.offset <= locate_tol);
            let shrinking = rows
                .windows(2)
                .all(|w| w[1].offset <= w[0].offset || w[1].offset <= OFFSET_FLOOR);
            let counts_ok = rows.iter().all(|r| r.zeros == k - 1);
            Ok(BifurcationCheck {
                k,
                nu,
                sigma,
                eigenvalue: mu_k,
                rows,
                located,
                shrinking,
                counts_ok,
                note,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(checks)
}

/// An open interval of `γ`; empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaInterval {
    pub nu: Sign,
    pub lo: f64,
    pub hi: f64,
}

impl GammaInterval {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, gamma: f64) -> bool {
        self.lo < gamma && gamma < self.hi
    }
}

impl fmt::Display for GammaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "nu={}: empty ({}, {})", self.nu, self.lo, self.hi)
        } else {
            write!(f, "nu={}: ({}, {})", self.nu, self.lo, self.hi)
        }
    }
}

/// The `γ`-interval on which the problem has `n - k + 1` pairs of nodal
/// solutions, one pair for each index `k..=n`, for each sign `ν` present in
/// the spectrum. With `f0 < f∞` it is `(μ_n / f∞, μ_k / f0)`, with the roles
/// of `f0` and `f∞` swapped otherwise; for `ν = -` it is mirrored through
/// zero. `n = k` gives the single-index interval. An interval whose ends
/// come out in the wrong order is returned as is and reports
/// [`GammaInterval::is_empty`].
pub fn interval_for_gamma(
    spectrum: &Spectrum,
    f: &Nonlinearity,
    k: usize,
    n: usize,
) -> Result<Vec<GammaInterval>, Error> {
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let (f0, fi) = (f.f0(), f.f_inf());
    let mut out = Vec::new();
    for (nu, exists) in [
        (Sign::Plus, spectrum.has_positive),
        (Sign::Minus, spectrum.has_negative),
    ] {
        if !exists {
            continue;
        }
        let get = |j: usize| {
            spectrum
                .get(j, nu)
                .map(f64::abs)
                .ok_or_else(|| Error::InvalidArgument(format!("spectrum lacks mu_{j}^{nu}")))
        };
        let (mk, mn) = (get(k)?, get(n)?);
        if f0 == fi {
            let v = nu.factor() * mk / f0;
            out.push(GammaInterval { nu, lo: v, hi: v });
            continue;
        }
        // |γ| ranges over (|μ_n| / max f, |μ_k| / min f) with the max/min
        // taken the way round that puts every index k..n inside.
        let (small, large) = if f0 < fi {
            (mn / fi, mk / f0)
        } else {
            (mn / f0, mk / fi)
        };
        let (lo, hi) = match nu {
            Sign::Plus => (small, large),
            Sign::Minus => (-large, -small),
        };
        out.push(GammaInterval { nu, lo, hi });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{find_eigenvalues, SpectrumOptions};
    use crate::weight::Weight;
    use std::f64::consts::PI;

    fn unit_op() -> Operator {
        Operator::new(
            Exponent::new(2.0).unwrap(),
            1,
            Weight::constant(1.0).unwrap(),
        )
        .unwrap()
    }

    const LAMBDA1: f64 = PI * PI / 4.0;

    #[test]
    fn reference_nonlinearity_values() {
        let f = Nonlinearity::reference();
        let p = Exponent::new(2.0).unwrap();
        assert_eq!(f.eval(1.0, p), 1.5);
        assert_eq!(f.eval(-1.0, p), -1.5);
        assert!((f.eval(2.0, p) - 2.0 * 9.0 / 5.0).abs() < 1e-15);
        f.validate(p).unwrap();
    }

    #[test]
    fn validation_catches_slow_limits() {
        let f = Nonlinearity::saturating(1.0, 2.0, 0.05).unwrap();
        assert!(f.validate(Exponent::new(2.0).unwrap()).is_err());
        assert!(Nonlinearity::saturating(0.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn finds_positive_solution_in_the_interval() {
        let f = Nonlinearity::reference();
        let sol = find_nodal(&unit_op(), &f, 2.0, 1, Sign::Plus, &NodalOptions::default())
            .unwrap()
            .found()
            .unwrap();
        assert!(sol.alpha > 0.0);
        assert_eq!(sol.trajectory.interior_zero_count(), 0);
        assert!(sol.trajectory.end_value().abs() <= 1e-9);
        assert!(sol.residual <= 1e-6, "{}", sol.residual);
        assert!(!sol.homogeneous_degeneracy);
    }

    #[test]
    fn reports_absence_above_the_interval() {
        let f = Nonlinearity::reference();
        match find_nodal(&unit_op(), &f, 3.0, 1, Sign::Plus, &NodalOptions::default()).unwrap() {
            NodalOutcome::NotFound(rep) => {
                assert!(!rep.nodes.is_empty());
                assert!(rep.to_string().starts_with("none found"));
            }
            NodalOutcome::Found(s) => panic!("unexpected solution at alpha {}", s.alpha),
        }
    }

    #[test]
    fn homogeneous_case_is_flagged() {
        let op = unit_op();
        let mu = find_eigenvalues(&op, 1, Sign::Plus, &SpectrumOptions::default())
            .unwrap()
            .values()[0];
        let f = Nonlinearity::homogeneous(1.0).unwrap();
        let sol = find_nodal(&op, &f, mu, 1, Sign::Plus, &NodalOptions::default())
            .unwrap()
            .found()
            .unwrap();
        assert!(sol.homogeneous_degeneracy);
        assert_eq!(sol.alpha, 1e-4);
    }

    #[test]
    fn homogeneous_branch_is_flat() {
        let op = unit_op();
        let mu = find_eigenvalues(&op, 2, Sign::Plus, &SpectrumOptions::default())
            .unwrap()
            .values()[1];
        let f = Nonlinearity::homogeneous(1.0).unwrap();
        let grid = AmplitudeGrid {
            min: 1e-2,
            max: 1e2,
            ratio: 10.0,
        };
        let b = trace_branch(
            &op,
            &f,
            2,
            Sign::Plus,
            Sign::Plus,
            mu,
            &grid,
            &NodalOptions::default(),
        )
        .unwrap();
        assert_eq!(b.points.len(), 5);
        for pt in &b.points {
            assert!((pt.gamma / mu - 1.0).abs() < 1e-9, "{pt:?}");
            assert_eq!(pt.zeros, 1);
        }
    }

    #[test]
    fn reference_branch_endpoints_and_mirror() {
        let f = Nonlinearity::reference();
        let grid = AmplitudeGrid {
            min: 1e-3,
            max: 1e3,
            ratio: 1.25,
        };
        let opts = NodalOptions::default();
        let plus = trace_branch(
            &unit_op(),
            &f,
            1,
            Sign::Plus,
            Sign::Plus,
            LAMBDA1,
            &grid,
            &opts,
        )
        .unwrap();
        let minus = trace_branch(
            &unit_op(),
            &f,
            1,
            Sign::Minus,
            Sign::Plus,
            LAMBDA1,
            &grid,
            &opts,
        )
        .unwrap();
        assert!(!plus.truncated, "{:?}", plus.diagnostics);
        assert!((plus.gamma_0().unwrap() / LAMBDA1 - 1.0).abs() <= 0.02);
        assert!((plus.gamma_inf().unwrap() * 2.0 / LAMBDA1 - 1.0).abs() <= 0.05);
        assert!(plus.reaches_large_norm());
        assert!(plus.points.windows(2).all(|w| w[1].alpha > w[0].alpha));
        for (a, b) in plus.points.iter().zip(&minus.points) {
            assert_eq!(a.gamma, b.gamma);
            assert_eq!(a.alpha, -b.alpha);
        }
    }

    #[test]
    fn bifurcation_without_perturbation() {
        let op = unit_op();
        let spec = Spectrum::compute(&op, 1, &SpectrumOptions::default()).unwrap();
        let checks = verify_bifurcation_points(
            &op,
            Perturbation::zero(),
            &[1],
            Sign::Plus,
            &spec,
            &[1e-1, 1e-3],
            1e-3,
            1e-2,
        )
        .unwrap();
        for c in checks {
            assert!(c.passed(), "{c:?}");
            for r in c.rows {
                assert!(r.offset < 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn bifurcation_with_power_perturbation() {
        let op = unit_op();
        let spec = Spectrum::compute(&op, 1, &SpectrumOptions::default()).unwrap();
        let g = Perturbation::new(1.0, 1.0).unwrap();
        let checks = verify_bifurcation_points(
            &op,
            g,
            &[1],
            Sign::Plus,
            &spec,
            &[1e-1, 1e-2, 1e-3, 1e-4],
            1e-3,
            1e-3,
        )
        .unwrap();
        for c in checks {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn gamma_interval_examples() {
        let op = unit_op();
        let spec = Spectrum::from_values(
            &op,
            (1..=3)
                .map(|k| ((2 * k - 1) as f64 * PI / 2.0).powi(2))
                .collect(),
            Vec::new(),
        );
        let f = Nonlinearity::reference();
        let iv = interval_for_gamma(&spec, &f, 1, 1).unwrap();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].lo - 1.2337005501361697).abs() < 1e-12);
        assert!((iv[0].hi - LAMBDA1).abs() < 1e-12);

        let flat = Nonlinearity::homogeneous(1.0).unwrap();
        assert!(interval_for_gamma(&spec, &flat, 1, 1).unwrap()[0].is_empty());

        let steep = Nonlinearity::saturating(1.0, 10.0, 2.0).unwrap();
        let iv = interval_for_gamma(&spec, &steep, 1, 3).unwrap();
        assert!(iv[0].is_empty());
        assert!((iv[0].lo - 6.168502750680849).abs() < 1e-12);
        assert!((iv[0].hi - 2.4674011002723395).abs() < 1e-12);

        assert!(interval_for_gamma(&spec, &f, 1, 5).is_err());
    }

    #[test]
    fn negative_interval_mirrors() {
        let op = Operator::new(
            Exponent::new(2.0).unwrap(),
            1,
            Weight::polynomial(vec![1.0, -2.0]).unwrap(),
        )
        .unwrap();
        let spec = Spectrum::from_values(&op, vec![10.0], vec![-12.0]);
        let iv = interval_for_gamma(&spec, &Nonlinearity::reference(), 1, 1).unwrap();
        assert_eq!(iv.len(), 2);
        assert_eq!((iv[1].lo, iv[1].hi), (-12.0, -6.0));
    }
}
