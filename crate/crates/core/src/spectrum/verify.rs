//! Structural checks on computed spectra: weight monotonicity, continuity
//! in `p`, Sturm comparison, zero proliferation and the crossing index.

use rayon::prelude::*;

use crate::error::Error;
use crate::pfuncs::{unit_interval_eigenvalue, Exponent};
use crate::radial_ivp::{shoot_with, IvpOptions, Operator, BOUNDARY_ZONE};
use crate::weight::Weight;

use super::{find_eigenvalues, Sign, Spectrum, SpectrumOptions};

/// Relative distance under which `μ` counts as sitting on an eigenvalue.
pub const EIGENVALUE_PROXIMITY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityRow {
    pub k: usize,
    pub sign: Sign,
    pub mu_lower: f64,
    pub mu_upper: f64,
    /// `(μ_k(m1) - μ_k(m2)) / |μ_k(m1)|`, positive when the inequality holds.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub applicable: bool,
    pub rows: Vec<MonotonicityRow>,
    pub notes: Vec<String>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// For `m1 ≤ m2`, checks `μ_k^ν(m1) > μ_k^ν(m2)` by more than `min_margin`
/// (relative) for `k ≤ k_max` and each sign that both weights support.
pub fn verify_weight_monotonicity(
    exponent: Exponent,
    dim: u32,
    m1: &Weight,
    m2: &Weight,
    k_max: usize,
    min_margin: f64,
    opts: &SpectrumOptions,
) -> Result<MonotonicityReport, Error> {
    let (le, strict) = m1.pointwise_le(m2);
    if !le {
        return Err(Error::Precondition(
            "m1 <= m2 fails at a sample point".into(),
        ));
    }
    if !strict {
        return Ok(MonotonicityReport {
            applicable: false,
            rows: Vec::new(),
            notes: vec!["not applicable (equal weights)".into()],
        });
    }
    if !(m1.is_admissible() && m2.is_admissible()) {
        return Err(Error::Precondition(
            "both weights must have a positive part".into(),
        ));
    }
    let lower = Operator::new(exponent, dim, m1.clone())?;
    let upper = lower.with_weight(m2.clone());
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let exists = |m: &Weight| match sign {
            Sign::Plus => m.positive_measure() > 0.0,
            Sign::Minus => m.negative_measure() > 0.0,
        };
        if !(exists(m1) && exists(m2)) {
            notes.push(format!(
                "nu={sign}: sequence absent for one of the weights, skipped"
            ));
            continue;
        }
        let (a, b) = rayon::join(
            || find_eigenvalues(&lower, k_max, sign, opts),
            || find_eigenvalues(&upper, k_max, sign, opts),
        );
        let (a, b) = (a?.into_complete()?, b?.into_complete()?);
        for (x, y) in a.eigenpairs.iter().zip(&b.eigenpairs) {
            let margin = (x.mu - y.mu) / x.mu.abs();
            rows.push(MonotonicityRow {
                k: x.k,
                sign,
                mu_lower: x.mu,
                mu_upper: y.mu,
                margin,
                pass: margin > min_margin,
            });
        }
    }
    Ok(MonotonicityReport {
        applicable: true,
        rows,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityRow {
    pub k: usize,
    pub sign: Sign,
    /// `μ_k^ν` along the grid.
    pub values: Vec<f64>,
    pub max_jump: f64,
    /// Same on the grid with every step halved.
    pub max_jump_refined: Option<f64>,
    /// `max_jump_refined / max_jump`.
    pub halving_ratio: Option<f64>,
    /// `C |Δp|` with `C` taken from the constant-weight closed form.
    pub jump_bound: f64,
    /// No jump exceeds 10 times the larger neighbouring jump.
    pub locally_consistent: bool,
    /// Max relative deviation from the closed form, when `m ≡ 1, N = 1`.
    pub closed_form_error: Option<f64>,
}

impl ContinuityRow {
    pub fn within_bound(&self) -> bool {
        self.max_jump <= self.jump_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub grid: Vec<f64>,
    pub rows: Vec<ContinuityRow>,
}

fn max_jump(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Traces `μ_k^ν(p)` over `p_grid` (and over the grid with halved steps).
pub fn verify_p_continuity(
    dim: u32,
    m: &Weight,
    k_max: usize,
    p_grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<ContinuityReport, Error> {
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "p grid must be nonempty and increasing".into(),
        ));
    }
    let exps = p_grid
        .iter()
        .map(|&p| Exponent::new(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut fine = Vec::with_capacity(2 * p_grid.len());
    for w in p_grid.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(*p_grid.last().unwrap());
    let fine_exps = fine
        .iter()
        .map(|&p| Exponent::new(p))
        .collect::<Result<Vec<_>, _>>()?;

    let base = Operator::new(exps[0], dim, m.clone())?;
    let spectra = |grid: &[Exponent]| -> Result<Vec<Spectrum>, Error> {
        grid.par_iter()
            .map(|&p| Spectrum::compute(&base.with_exponent(p), k_max, opts))
            .collect()
    };
    let coarse_spectra = spectra(&exps)?;
    let fine_spectra = if p_grid.len() > 1 {
        Some(spectra(&fine_exps)?)
    } else {
        None
    };
    let unit = dim == 1 && *m == Weight::constant(1.0)?;

    let mut rows = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        for k in 1..=k_max {
            let column = |sp: &[Spectrum]| -> Option<Vec<f64>> {
                sp.iter().map(|s| s.get(k, sign)).collect()
            };
            let Some(values) = column(&coarse_spectra) else {
                continue;
            };
            let jump = max_jump(&values);
            let refined = fine_spectra
                .as_deref()
                .and_then(column)
                .map(|v| max_jump(&v));
            let halving_ratio = refined.map(|r| if jump > 0.0 { r / jump } else { 0.0 });

            // C from the closed form: the log-derivative of λ_k(p) on the
            // grid, applied to the observed magnitude of μ_k.
            let log_slope = exps
                .windows(2)
                .map(|w| {
                    let (a, b) = (
                        unit_interval_eigenvalue(k, w[0]),
                        unit_interval_eigenvalue(k, w[1]),
                    );
                    ((b / a).ln() / (w[1].p() - w[0].p())).abs()
                })
                .fold(0.0, f64::max);
            let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let step = p_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            let jump_bound = 10.0 * log_slope * scale * step;

            let jumps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            let locally_consistent = jumps.iter().enumerate().all(|(i, &j)| {
                let left = if i > 0 { jumps[i - 1] } else { 0.0 };
                let right = jumps.get(i + 1).copied().unwrap_or(0.0);
                let neighbour = left.max(right);
                jumps.len() < 2 || j <= 10.0 * neighbour
            });

            let closed_form_error = (unit && sign == Sign::Plus).then(|| {
                values
                    .iter()
                    .zip(&exps)
                    .map(|(v, &p)| (v / unit_interval_eigenvalue(k, p) - 1.0).abs())
                    .fold(0.0, f64::max)
            });
            rows.push(ContinuityRow {
                k,
                sign,
                values,
                max_jump: jump,
                max_jump_refined: refined,
                halving_ratio,
                jump_bound,
                locally_consistent,
                closed_form_error,
            });
        }
    }
    Ok(ContinuityReport {
        grid: p_grid.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmReport {
    pub zeros_lower: usize,
    pub zeros_upper: usize,
}

impl SturmReport {
    pub fn passed(&self) -> bool {
        self.zeros_upper > self.zeros_lower
    }
}

const SAMPLES: usize = 1000;

/// Shoots `(r^(N-1) φ_p(u'))' + r^(N-1) b_i φ_p(u) = 0` from `u(0) = 1` for
/// both coefficients and compares interior zero counts on `(0, 1)`.
pub fn verify_sturm(
    exponent: Exponent,
    dim: u32,
    b1: &Weight,
    b2: &Weight,
) -> Result<SturmReport, Error> {
    for i in 1..SAMPLES {
        let r = i as f64 / SAMPLES as f64;
        let (x, y) = (b1.eval(r), b2.eval(r));
        if !(0.0 < x && x < y) {
            return Err(Error::Precondition(format!(
                "need 0 < b1 < b2 on (0, 1); at r = {r}: b1 = {x}, b2 = {y}"
            )));
        }
    }
    let opts = IvpOptions {
        blowup_limit: 1e250,
        ..IvpOptions::default()
    }
    .summary_only();
    let count = |b: &Weight| -> Result<usize, Error> {
        let op = Operator::new(exponent, dim, b.clone())?;
        Ok(shoot_with(&op.linear(1.0), 1.0, &opts)?.interior_zero_count())
    };
    Ok(SturmReport {
        zeros_lower: count(b1)?,
        zeros_upper: count(b2)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProliferationReport {
    pub interval: (f64, f64),
    pub multipliers: Vec<f64>,
    pub counts: Vec<usize>,
    pub monotone: bool,
    /// `count(t_J) >= count(t_1) + J/2`; vacuous for a single multiplier.
    pub growing: bool,
}

impl ProliferationReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.growing
    }
}

/// Zero counts on `[a, b]` of the shots with coefficient `t_j m`.
pub fn verify_zero_proliferation(
    exponent: Exponent,
    dim: u32,
    m: &Weight,
    a: f64,
    b: f64,
    multipliers: &[f64],
) -> Result<ProliferationReport, Error> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Precondition(format!(
            "need 0 <= a < b <= 1, got [{a}, {b}]"
        )));
    }
    if !m.is_positive_on(a, b) {
        return Err(Error::Precondition(format!(
            "[{a}, {b}] is not inside the positive set of m"
        )));
    }
    if multipliers.is_empty()
        || multipliers[0] <= 0.0
        || multipliers.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument(
            "multipliers must be positive and increasing".into(),
        ));
    }
    let op = Operator::new(exponent, dim, m.clone())?;
    let opts = IvpOptions {
        blowup_limit: 1e250,
        r_end: b,
        ..IvpOptions::default()
    }
    .summary_only();
    let cut = b - BOUNDARY_ZONE;
    let counts = multipliers
        .par_iter()
        .map(|&t| {
            let traj = shoot_with(&op.linear(t), 1.0, &opts)?;
            Ok(traj.zeros.iter().filter(|z| z.r >= a && z.r < cut).count())
        })
        .collect::<Result<Vec<usize>, Error>>()?;
    let monotone = counts.windows(2).all(|w| w[1] >= w[0]);
    let j = counts.len();
    let growing = j < 2 || (counts[j - 1] - counts[0].min(counts[j - 1])) as f64 >= j as f64 / 2.0;
    Ok(ProliferationReport {
        interval: (a, b),
        multipliers: multipliers.to_vec(),
        counts,
        monotone,
        growing,
    })
}

/// `(-1)^β` where `β` counts the eigenvalues of the same sign as `μ`
/// lying strictly between 0 and `μ`.
pub fn crossing_index(spectrum: &Spectrum, mu: f64) -> Result<i32, Error> {
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mu must be finite, got {mu}"
        )));
    }
    let (list, exists) = if mu > 0.0 {
        (&spectrum.positive, spectrum.has_positive)
    } else {
        (&spectrum.negative, spectrum.has_negative)
    };
    if let Some(near) = list
        .iter()
        .find(|&&e| (mu - e).abs() <= EIGENVALUE_PROXIMITY * e.abs())
    {
        return Err(Error::TooCloseToEigenvalue {
            mu,
            distance: (mu - near).abs(),
        });
    }
    if mu == 0.0 || !exists {
        return Ok(1);
    }
    match list.last() {
        Some(&last) if mu.abs() < last.abs() => {}
        _ => return Err(Error::BeyondValidatedRange { mu }),
    }
    let beta = list.iter().filter(|&&e| e.abs() < mu.abs()).count();
    Ok(if beta % 2 == 0 { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(x: f64) -> Exponent {
        Exponent::new(x).unwrap()
    }

    fn linear_weight() -> Weight {
        Weight::polynomial(vec![1.0, -2.0]).unwrap()
    }

    #[test]
    fn monotonicity_under_scaling() {
        let one = Weight::constant(1.0).unwrap();
        let two = Weight::constant(2.0).unwrap();
        let rep = verify_weight_monotonicity(p(2.0), 1, &one, &two, 3, 1e-8, &Default::default())
            .unwrap();
        assert!(rep.passed() && rep.applicable);
        for row in &rep.rows {
            assert!((row.mu_upper * 2.0 / row.mu_lower - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn monotonicity_for_sign_changing_weights() {
        let m1 = linear_weight();
        let m2 = Weight::polynomial(vec![1.0, -1.0]).unwrap();
        let rep =
            verify_weight_monotonicity(p(2.0), 1, &m1, &m2, 3, 1e-8, &Default::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        // m2 = 1 - r has no negative part
        assert!(rep.rows.iter().all(|r| r.sign == Sign::Plus));
        assert_eq!(rep.rows.len(), 3);
    }

    #[test]
    fn monotonicity_equal_weights_not_applicable() {
        let m = linear_weight();
        let rep =
            verify_weight_monotonicity(p(2.0), 1, &m, &m, 3, 1e-8, &Default::default()).unwrap();
        assert!(!rep.applicable);
        assert_eq!(
            rep.notes,
            vec!["not applicable (equal weights)".to_string()]
        );
    }

    #[test]
    fn monotonicity_rejects_unordered_weights() {
        let r = verify_weight_monotonicity(
            p(2.0),
            1,
            &Weight::constant(2.0).unwrap(),
            &Weight::constant(1.0).unwrap(),
            1,
            1e-8,
            &Default::default(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn continuity_tracks_closed_form() {
        let grid: Vec<f64> = (0..7).map(|i| 1.5 + 0.25 * i as f64).collect();
        let rep = verify_p_continuity(
            1,
            &Weight::constant(1.0).unwrap(),
            2,
            &grid,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(rep.rows.len(), 2);
        for row in &rep.rows {
            assert!(row.closed_form_error.unwrap() < 1e-8, "{row:?}");
            assert!(row.within_bound() && row.locally_consistent);
        }
    }

    #[test]
    fn continuity_single_point_is_trivial() {
        let rep =
            verify_p_continuity(1, &Weight::cos_pi(3.0), 1, &[2.0], &Default::default()).unwrap();
        for row in &rep.rows {
            assert_eq!(row.max_jump, 0.0);
            assert!(row.halving_ratio.is_none());
            assert!(row.within_bound() && row.locally_consistent);
        }
    }

    #[test]
    fn sturm_cosines() {
        let b1 = Weight::constant((1.5 * PI).powi(2)).unwrap();
        let b2 = Weight::constant((2.5 * PI).powi(2)).unwrap();
        let rep = verify_sturm(p(2.0), 1, &b1, &b2).unwrap();
        assert_eq!((rep.zeros_lower, rep.zeros_upper), (1, 2));
        assert!(rep.passed());
    }

    #[test]
    fn sturm_general_p() {
        let lam = unit_interval_eigenvalue(3, p(2.5));
        let b1 = Weight::constant(lam).unwrap();
        let b2 = Weight::constant(1.5 * lam).unwrap();
        assert!(verify_sturm(p(2.5), 1, &b1, &b2).unwrap().passed());
    }

    #[test]
    fn sturm_from_zero_zeros() {
        let b1 = Weight::constant(1.0).unwrap();
        let b2 = Weight::constant(unit_interval_eigenvalue(1, p(3.0)) * 1.2).unwrap();
        let rep = verify_sturm(p(3.0), 1, &b1, &b2).unwrap();
        assert_eq!(rep.zeros_lower, 0);
        assert!(rep.zeros_upper >= 1);
    }

    #[test]
    fn sturm_precondition() {
        let b = Weight::constant(1.0).unwrap();
        assert!(matches!(
            verify_sturm(p(2.0), 1, &b, &b),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn proliferation_closed_form_counts() {
        let m = Weight::constant(1.0).unwrap();
        let ts: Vec<f64> = (1..=4)
            .map(|k| ((2 * k - 1) as f64 * PI / 2.0).powi(2))
            .collect();
        let rep = verify_zero_proliferation(p(2.0), 1, &m, 0.0, 1.0, &ts).unwrap();
        assert_eq!(rep.counts, vec![0, 1, 2, 3]);
        assert!(rep.passed());
    }

    #[test]
    fn proliferation_on_positive_part() {
        let ts: Vec<f64> = (0..=6).map(|j| 10.0 * 4f64.powi(j)).collect();
        let rep = verify_zero_proliferation(p(2.0), 1, &linear_weight(), 0.1, 0.4, &ts).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.counts.last().unwrap() > rep.counts.first().unwrap());
    }

    #[test]
    fn proliferation_single_multiplier() {
        let rep =
            verify_zero_proliferation(p(2.0), 1, &linear_weight(), 0.1, 0.4, &[10.0]).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn proliferation_outside_positive_set() {
        let r = verify_zero_proliferation(p(2.0), 1, &linear_weight(), 0.4, 0.6, &[10.0]);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn crossing_index_table() {
        let s = Spectrum {
            fingerprint: super::super::Fingerprint {
                p_bits: 0,
                dim: 1,
                weight: 0,
            },
            positive: vec![1.0, 4.0, 9.0],
            negative: vec![-2.0, -5.0, -7.0],
            has_positive: true,
            has_negative: true,
        };
        assert_eq!(crossing_index(&s, 0.5).unwrap(), 1);
        assert_eq!(crossing_index(&s, -1.0).unwrap(), 1);
        assert_eq!(crossing_index(&s, 2.0).unwrap(), -1);
        assert_eq!(crossing_index(&s, 5.0).unwrap(), 1);
        assert_eq!(crossing_index(&s, -3.0).unwrap(), -1);
        assert_eq!(crossing_index(&s, -6.0).unwrap(), 1);
        assert!(matches!(
            crossing_index(&s, 4.0),
            Err(Error::TooCloseToEigenvalue { .. })
        ));
        assert!(matches!(
            crossing_index(&s, 10.0),
            Err(Error::BeyondValidatedRange { .. })
        ));
    }
}
