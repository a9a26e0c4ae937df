//! The two eigenvalue sequences `μ_k^±` of
//!
//! ```text
//! (r^(N-1) φ_p(u'))' + μ m(r) r^(N-1) φ_p(u) = 0,  u'(0) = 0,  u(1) = 0.
//! ```
//!
//! Eigenvalues are found by shooting with `u(0) = 1`. The number of sign
//! changes `Z(μ)` of the shot on `(0, 1]` counts the eigenvalues of the
//! requested sign lying strictly between 0 and `μ`, so the `k`-th one is
//! isolated by the count alone; the miss `u(1)` then has opposite signs at
//! the ends of the isolating interval and is refined with Brent's method.

mod rayleigh;
mod verify;

use rayon::prelude::*;

use crate::bracket::{brent, isolate, Probe};
use crate::error::Error;
use crate::radial_ivp::{
    shoot_inward, shoot_with, InwardShot, IvpOptions, Operator, Trajectory, BOUNDARY_ZONE,
    SIMPLICITY_THRESHOLD,
};

pub use rayleigh::{rayleigh_mu1, RayleighEstimate, RayleighOptions};
pub use verify::{
    crossing_index, verify_p_continuity, verify_sturm, verify_weight_monotonicity,
    verify_zero_proliferation, ContinuityReport, ContinuityRow, MonotonicityReport,
    MonotonicityRow, ProliferationReport, SturmReport,
};

/// Which sequence: `ν = +` (positive eigenvalues) or `ν = −`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "+" | "plus" | "pos" => Ok(Sign::Plus),
            "-" | "minus" | "neg" => Ok(Sign::Minus),
            other => Err(Error::InvalidArgument(format!(
                "unknown sign {other:?}, expected \"+\" or \"-\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Shots used during the scan and root refinement.
    pub ivp: IvpOptions,
    /// Ratio between consecutive scan nodes.
    pub scan_ratio: f64,
    /// Scan stops at `ceiling_factor * (1 + |μ_1|)`.
    pub ceiling_factor: f64,
    /// Relative bracket width at which Brent stops.
    pub rel_tol: f64,
    pub max_scan_nodes: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            // The shot crosses regions where m has the wrong sign and grows
            // exponentially there; for the linear problem that is harmless.
            ivp: IvpOptions {
                blowup_limit: 1e250,
                ..IvpOptions::default()
            }
            .summary_only(),
            scan_ratio: 1.25,
            ceiling_factor: 1e4,
            rel_tol: 1e-14,
            max_scan_nodes: 4000,
        }
    }
}

impl SpectrumOptions {
    /// Same options with the scan ratio square-rooted (twice the density).
    pub fn denser(mut self) -> Self {
        self.scan_ratio = self.scan_ratio.sqrt();
        self
    }
}

/// `(u(1), interior zero count)` of the `u(0) = 1` shot at parameter `mu`.
/// At `mu = 0` the shot is the constant 1.
pub fn miss_and_count(op: &Operator, mu: f64) -> Result<(f64, usize), Error> {
    miss_and_count_with(op, mu, &IvpOptions::default().summary_only())
}

pub fn miss_and_count_with(
    op: &Operator,
    mu: f64,
    ivp: &IvpOptions,
) -> Result<(f64, usize), Error> {
    if mu == 0.0 {
        return Ok((1.0, 0));
    }
    let t = shoot_with(&op.linear(mu), 1.0, ivp)?;
    Ok((t.end_value(), t.interior_zero_count()))
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub k: usize,
    pub sign: Sign,
    pub mu: f64,
    /// Shot with `u(0) = 1`, trusted on `[0, r_match]`.
    pub eigenfunction: Trajectory,
    /// Shot from `u(1) = 0` inward, trusted on `[r_match, 1]` after
    /// multiplying by `tail_scale`.
    pub tail: InwardShot,
    pub tail_scale: f64,
    pub r_match: f64,
    /// Interior zeros of the matched eigenfunction.
    pub zeros: Vec<f64>,
    /// `|u(1)| / max|u|`.
    pub residual: f64,
}

impl Eigenpair {
    /// `(u, u')` of the matched eigenfunction, normalised by `u(0) = 1`.
    pub fn profile(&self, r: f64) -> (f64, f64) {
        if r <= self.r_match {
            (self.eigenfunction.value(r), self.eigenfunction.slope(r))
        } else {
            (
                self.tail_scale * self.tail.value(r),
                self.tail_scale * self.tail.slope(r),
            )
        }
    }
}

/// Result of one `find_eigenvalues` run.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    pub sign: Sign,
    pub requested: usize,
    /// `μ_1 … μ_K'` with `K' ≤ requested`.
    pub eigenpairs: Vec<Eigenpair>,
    /// Largest `|μ|` at which the count was established.
    pub scanned_to: f64,
    /// Scan nodes used, for diagnostics.
    pub scan_nodes: usize,
}

impl SpectrumSlice {
    pub fn is_complete(&self) -> bool {
        self.eigenpairs.len() >= self.requested
    }

    pub fn values(&self) -> Vec<f64> {
        self.eigenpairs.iter().map(|e| e.mu).collect()
    }

    /// Fails with `ScanBudgetExhausted` when fewer than requested were found.
    pub fn into_complete(self) -> Result<Self, Error> {
        if self.is_complete() {
            Ok(self)
        } else {
            Err(Error::ScanBudgetExhausted {
                validated: self.eigenpairs.len(),
                requested: self.requested,
            })
        }
    }
}

fn check_sequence_exists(op: &Operator, sign: Sign) -> Result<(), Error> {
    match sign {
        Sign::Plus if op.weight.positive_measure() <= 0.0 => Err(Error::PositiveSequenceAbsent),
        Sign::Minus if op.weight.negative_measure() <= 0.0 => Err(Error::NegativeSequenceAbsent),
        _ => Ok(()),
    }
}

fn probe_at(op: &Operator, sign: Sign, t: f64, ivp: &IvpOptions) -> Result<Probe, Error> {
    let traj = shoot_with(&op.linear(sign.factor() * t), 1.0, ivp)?;
    Ok(Probe {
        x: t,
        miss: traj.end_value(),
        count: traj.crossing_count(),
    })
}

/// Scan nodes in `|μ|`, increasing, ending at the first node whose count
/// reaches `k_max` or at the ceiling. The flag reports an integrator
/// failure that cut the scan short.
fn scan(op: &Operator, sign: Sign, k_max: usize, opts: &SpectrumOptions) -> (Vec<Probe>, bool) {
    let sup = op.weight.sup_norm().max(f64::MIN_POSITIVE);
    let mut t0 = 0.1 / sup;
    let mut nodes = Vec::new();
    for _ in 0..60 {
        match probe_at(op, sign, t0, &opts.ivp) {
            Ok(pr) if pr.count == 0 => {
                nodes.push(pr);
                break;
            }
            Ok(_) => t0 /= 10.0,
            Err(_) => return (nodes, true),
        }
    }
    if nodes.is_empty() {
        return (nodes, true);
    }
    let batch = 16;
    let mut ceiling = 1e12 / sup;
    loop {
        let last = *nodes.last().unwrap();
        if last.count >= k_max || last.x > ceiling || nodes.len() >= opts.max_scan_nodes {
            return (nodes, false);
        }
        let ts: Vec<f64> = (1..=batch)
            .map(|j| last.x * opts.scan_ratio.powi(j))
            .collect();
        let results: Vec<Result<Probe, Error>> = ts
            .par_iter()
            .map(|&t| probe_at(op, sign, t, &opts.ivp))
            .collect();
        for res in results {
            match res {
                Ok(pr) => {
                    if pr.count >= 1 && nodes.last().unwrap().count == 0 {
                        ceiling = ceiling.min(opts.ceiling_factor * (1.0 + pr.x));
                    }
                    nodes.push(pr);
                    if pr.count >= k_max || pr.x > ceiling {
                        return (nodes, false);
                    }
                }
                Err(_) => return (nodes, true),
            }
        }
    }
}

fn refine(
    op: &Operator,
    sign: Sign,
    k: usize,
    nodes: &[Probe],
    opts: &SpectrumOptions,
) -> Result<Eigenpair, Error> {
    let j = nodes
        .iter()
        .position(|n| n.count >= k)
        .ok_or(Error::ScanBudgetExhausted {
            validated: k - 1,
            requested: k,
        })?;
    debug_assert!(j > 0);
    let probe = |t: f64| probe_at(op, sign, t, &opts.ivp);
    let (lo, hi) = isolate(&probe, nodes[j - 1], nodes[j], k, 200)?;
    let root = brent(&probe, lo, hi, opts.rel_tol, 0.0, 200)?;
    let mu = sign.factor() * root.x;

    let dense = IvpOptions {
        dense: true,
        ..opts.ivp
    };
    let problem = op.linear(mu);
    let eigenfunction = shoot_with(&problem, 1.0, &dense)?;
    let r_match = matching_radius(&eigenfunction);
    let tail = shoot_inward(&problem, -1.0, r_match, &dense)?;
    let tail_scale = eigenfunction.value(r_match) / tail.inner.u;
    if !tail_scale.is_finite() {
        return Err(Error::EigenvalueValidation {
            k,
            reason: format!("inward shot vanishes at the matching radius {r_match}"),
        });
    }

    let cut = 1.0 - BOUNDARY_ZONE;
    let inner = eigenfunction.zeros.iter().filter(|z| z.r < r_match);
    let outer = tail.zeros.iter().filter(|z| z.r > r_match && z.r < cut);
    let max_slope = eigenfunction
        .max_abs_slope
        .max(tail_scale.abs() * tail.max_abs_slope);
    let floor = SIMPLICITY_THRESHOLD * max_slope;
    let degenerate = inner.clone().any(|z| z.slope.abs() < floor)
        || outer.clone().any(|z| (tail_scale * z.slope).abs() < floor);
    let zeros: Vec<f64> = inner.chain(outer).map(|z| z.r).collect();
    if zeros.len() != k - 1 {
        return Err(Error::EigenvalueValidation {
            k,
            reason: format!(
                "eigenfunction at mu = {mu} has {} interior zeros",
                zeros.len()
            ),
        });
    }
    if degenerate {
        return Err(Error::EigenvalueValidation {
            k,
            reason: format!("eigenfunction at mu = {mu} has a degenerate zero"),
        });
    }
    let residual = eigenfunction.end_value().abs() / eigenfunction.sup_norm();
    Ok(Eigenpair {
        k,
        sign,
        mu,
        eigenfunction,
        tail,
        tail_scale,
        r_match,
        zeros,
        residual,
    })
}

/// Where the origin shot hands over to the inward shot: the largest `|u|`
/// on `[0.1, 0.9]`. Each shot is then integrated in the direction in which
/// the eigenfunction grows, so neither carries an exponentially amplified
/// error into the other's range.
fn matching_radius(forward: &Trajectory) -> f64 {
    let mut best = (0.5, -1.0);
    for s in forward.samples.iter().filter(|s| s.r >= 0.1 && s.r <= 0.9) {
        if s.u.abs() > best.1 {
            best = (s.r, s.u.abs());
        }
    }
    best.0
}

/// `μ_1^ν … μ_K^ν` with their eigenfunctions.
///
/// A scan that runs out of budget is not an error: the slice then holds
/// the validated prefix and [`SpectrumSlice::is_complete`] is false.
pub fn find_eigenvalues(
    op: &Operator,
    k_max: usize,
    sign: Sign,
    opts: &SpectrumOptions,
) -> Result<SpectrumSlice, Error> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    check_sequence_exists(op, sign)?;
    let (nodes, _cut_short) = scan(op, sign, k_max, opts);
    let reached = nodes.last().map_or(0, |n| n.count.min(k_max));
    let scanned_to = nodes.last().map_or(0.0, |n| n.x);
    let pairs: Vec<Result<Eigenpair, Error>> = (1..=reached)
        .into_par_iter()
        .map(|k| refine(op, sign, k, &nodes, opts))
        .collect();
    let mut eigenpairs = Vec::with_capacity(reached);
    for pair in pairs {
        match pair {
            Ok(e) => eigenpairs.push(e),
            // Validation failures are real findings; surface them.
            Err(e @ Error::EigenvalueValidation { .. }) => return Err(e),
            Err(_) => break,
        }
    }
    Ok(SpectrumSlice {
        sign,
        requested: k_max,
        eigenpairs,
        scanned_to,
        scan_nodes: nodes.len(),
    })
}

/// Identifies the problem a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub p_bits: u64,
    pub dim: u32,
    pub weight: u64,
}

impl Fingerprint {
    pub fn of(op: &Operator) -> Self {
        Self {
            p_bits: op.p().to_bits(),
            dim: op.dim,
            weight: op.weight.fingerprint(),
        }
    }
}

/// Both sequences, as far as they were validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub fingerprint: Fingerprint,
    /// `μ_1^+ < μ_2^+ < …`
    pub positive: Vec<f64>,
    /// `μ_1^- > μ_2^- > …`
    pub negative: Vec<f64>,
    /// False when the weight has no negative part (so `negative` is empty
    /// by theorem rather than by truncation); likewise for `positive`.
    pub has_positive: bool,
    pub has_negative: bool,
}

impl Spectrum {
    /// Computes up to `k_max` eigenvalues of each existing sign.
    pub fn compute(op: &Operator, k_max: usize, opts: &SpectrumOptions) -> Result<Self, Error> {
        let has_positive = op.weight.positive_measure() > 0.0;
        let has_negative = op.weight.negative_measure() > 0.0;
        let (pos, neg) = rayon::join(
            || {
                has_positive
                    .then(|| find_eigenvalues(op, k_max, Sign::Plus, opts))
                    .transpose()
            },
            || {
                has_negative
                    .then(|| find_eigenvalues(op, k_max, Sign::Minus, opts))
                    .transpose()
            },
        );
        Ok(Self {
            fingerprint: Fingerprint::of(op),
            positive: pos?.map(|s| s.values()).unwrap_or_default(),
            negative: neg?.map(|s| s.values()).unwrap_or_default(),
            has_positive,
            has_negative,
        })
    }

    pub fn from_values(op: &Operator, positive: Vec<f64>, negative: Vec<f64>) -> Self {
        Self {
            fingerprint: Fingerprint::of(op),
            has_positive: op.weight.positive_measure() > 0.0,
            has_negative: op.weight.negative_measure() > 0.0,
            positive,
            negative,
        }
    }

    pub fn get(&self, k: usize, sign: Sign) -> Option<f64> {
        let list = match sign {
            Sign::Plus => &self.positive,
            Sign::Minus => &self.negative,
        };
        k.checked_sub(1).and_then(|i| list.get(i)).copied()
    }

    /// Strict ordering in both lists and the right signs.
    pub fn is_well_ordered(&self) -> bool {
        self.positive.iter().all(|&m| m > 0.0)
            && self.negative.iter().all(|&m| m < 0.0)
            && self.positive.windows(2).all(|w| w[0] < w[1])
            && self.negative.windows(2).all(|w| w[0] > w[1])
    }
}
