use anyhow::Result;
use rayon::prelude::*;

use pspect::nodal::{find_nodal, interval_for_gamma, verify_bifurcation_points, NodalOutcome};
use pspect::radial_ivp::Perturbation;
use pspect::spectrum::{
    crossing_index, find_eigenvalues, rayleigh_mu1, verify_p_continuity, verify_sturm,
    verify_weight_monotonicity, verify_zero_proliferation, RayleighOptions, Sign, Spectrum,
};

use super::nodal::nodal_options;
use super::Context;
use crate::config::{Check, Task};
use crate::output::write_atomic;
use crate::{Outcome, RunError, Status};

/// One report line.
struct Line {
    pass: bool,
    name: &'static str,
    text: String,
}

impl Line {
    fn new(pass: bool, name: &'static str, text: impl Into<String>) -> Self {
        Self {
            pass,
            name,
            text: text.into(),
        }
    }

    fn error(name: &'static str, e: impl std::fmt::Display) -> Self {
        Self::new(false, name, e.to_string())
    }

    fn render(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.text)
    }
}

/// Writes `verify_report.txt`; exit status 3 when any line fails.
pub fn cmd_verify(ctx: &Context) -> Result<Outcome, RunError> {
    let Task::Verify(task) = &ctx.loaded.config.task else {
        unreachable!("dispatched on task name")
    };
    run(ctx, &task.checks).map_err(RunError::Failed)
}

fn run(ctx: &Context, checks: &[Check]) -> Result<Outcome> {
    let lines: Vec<Vec<Line>> = checks.iter().map(|c| run_check(ctx, c)).collect();
    let mut text = ctx.header(Vec::new()).render();
    let mut outcome = Outcome::new();
    for line in lines.iter().flatten() {
        text.push_str(&line.render());
        text.push('\n');
        if !line.pass {
            outcome.status = Status::VerificationFailed;
            outcome.messages.push(line.render());
        }
    }
    outcome
        .files
        .push(write_atomic(&ctx.out_dir, "verify_report.txt", &text)?);
    Ok(outcome)
}

fn present_signs(ctx: &Context) -> Vec<Sign> {
    let w = &ctx.op().weight;
    let mut v = Vec::new();
    if w.positive_measure() > 0.0 {
        v.push(Sign::Plus);
    }
    if w.negative_measure() > 0.0 {
        v.push(Sign::Minus);
    }
    v
}

fn run_check(ctx: &Context, check: &Check) -> Vec<Line> {
    let op = ctx.op();
    let opts = ctx.loaded.config.tolerances.spectrum();
    let exponent = op.exponent;
    let dim = op.dim;
    match check {
        Check::NodalCount { k_max } => present_signs(ctx)
            .par_iter()
            .map(|&s| match find_eigenvalues(op, *k_max, s, &opts) {
                Ok(slice) if slice.is_complete() => {
                    let counts: Vec<String> = slice
                        .eigenpairs
                        .iter()
                        .map(|e| e.zeros.len().to_string())
                        .collect();
                    let ok = slice.eigenpairs.iter().all(|e| e.zeros.len() == e.k - 1);
                    Line::new(
                        ok,
                        "nodal_count",
                        format!(
                            "nu={s} k=1..{k_max} interior zeros [{}], all simple",
                            counts.join(" ")
                        ),
                    )
                }
                Ok(slice) => Line::new(
                    false,
                    "nodal_count",
                    format!(
                        "nu={s}: only {} of {k_max} eigenvalues validated",
                        slice.eigenpairs.len()
                    ),
                ),
                Err(e) => Line::new(false, "nodal_count", format!("nu={s}: {e}")),
            })
            .collect(),
        Check::Monotonicity {
            m1,
            m2,
            k_max,
            margin,
        } => {
            match verify_weight_monotonicity(exponent, dim, &m1.0, &m2.0, *k_max, *margin, &opts) {
                Ok(rep) if !rep.applicable => {
                    vec![Line::new(true, "monotonicity", rep.notes.join("; "))]
                }
                Ok(rep) => {
                    let worst = rep
                        .rows
                        .iter()
                        .map(|r| r.margin)
                        .fold(f64::INFINITY, f64::min);
                    let mut text = format!(
                        "{} rows, smallest relative margin {worst:e} (need > {margin:e})",
                        rep.rows.len()
                    );
                    if !rep.notes.is_empty() {
                        text.push_str(&format!("; {}", rep.notes.join("; ")));
                    }
                    vec![Line::new(rep.passed(), "monotonicity", text)]
                }
                Err(e) => vec![Line::error("monotonicity", e)],
            }
        }
        Check::Continuity {
            k_max,
            p_min,
            p_max,
            p_step,
            require_halving,
            closed_form_tol,
        } => {
            let n = ((p_max - p_min) / p_step).round();
            if !(n >= 1.0 && *p_min > 1.0 && (p_min + n * p_step - p_max).abs() < 1e-9) {
                return vec![Line::new(
                    false,
                    "continuity",
                    format!("grid {p_min}..{p_max} step {p_step} is not a whole number of steps above 1"),
                )];
            }
            let grid: Vec<f64> = (0..=n as usize)
                .map(|i| p_min + i as f64 * p_step)
                .collect();
            match verify_p_continuity(dim, &op.weight, *k_max, &grid, &opts) {
                Ok(rep) => rep
                    .rows
                    .iter()
                    .map(|r| {
                        let ratio = r.halving_ratio.unwrap_or(f64::NAN);
                        let mut ok = r.within_bound() && r.locally_consistent;
                        let mut text = format!(
                            "k={} nu={} max jump {:e} (bound {:e}), halving ratio {ratio:.4}",
                            r.k, r.sign, r.max_jump, r.jump_bound
                        );
                        if *require_halving {
                            ok &= ratio <= 0.5;
                            text.push_str(" (need <= 0.5)");
                        }
                        if let Some(err) = r.closed_form_error {
                            ok &= err <= *closed_form_tol;
                            text.push_str(&format!(", closed-form error {err:e}"));
                        }
                        Line::new(ok, "continuity", text)
                    })
                    .collect(),
                Err(e) => vec![Line::error("continuity", e)],
            }
        }
        Check::Sturm { b1, b2 } => match verify_sturm(exponent, dim, &b1.0, &b2.0) {
            Ok(rep) => vec![Line::new(
                rep.passed(),
                "sturm",
                format!(
                    "interior zeros {} under b1, {} under b2",
                    rep.zeros_lower, rep.zeros_upper
                ),
            )],
            Err(e) => vec![Line::error("sturm", e)],
        },
        Check::Proliferation {
            interval,
            multipliers,
        } => {
            match verify_zero_proliferation(
                exponent,
                dim,
                &op.weight,
                interval[0],
                interval[1],
                multipliers,
            ) {
                Ok(rep) => vec![Line::new(
                    rep.passed(),
                    "proliferation",
                    format!(
                        "zeros on [{}, {}]: {:?} for t = {:?}",
                        interval[0], interval[1], rep.counts, rep.multipliers
                    ),
                )],
                Err(e) => vec![Line::error("proliferation", e)],
            }
        }
        Check::Index { k_max } => index_lines(ctx, *k_max),
        Check::Rayleigh { tol } => present_signs(ctx)
            .par_iter()
            .map(|&s| {
                let shot = find_eigenvalues(op, 1, s, &opts).and_then(|sl| sl.into_complete());
                let ray = rayleigh_mu1(op, s, &RayleighOptions::default());
                match (shot, ray) {
                    (Ok(sl), Ok(r)) => {
                        let mu = sl.eigenpairs[0].mu;
                        let rel = (r.value - mu).abs() / mu.abs();
                        Line::new(
                            rel <= *tol,
                            "rayleigh",
                            format!(
                                "nu={s} shooting {mu} quotient {} relative difference {rel:e}",
                                r.value
                            ),
                        )
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        Line::new(false, "rayleigh", format!("nu={s}: {e}"))
                    }
                }
            })
            .collect(),
        Check::Bifurcation {
            k,
            coefficient,
            delta,
            amplitudes,
            tol,
        } => bifurcation_lines(ctx, k, *coefficient, *delta, amplitudes, *tol),
        Check::Intervals {
            f,
            k,
            gammas,
            residual_tol,
        } => intervals_lines(ctx, f.0, *k, gammas.as_deref(), *residual_tol),
    }
}

fn index_lines(ctx: &Context, k_max: usize) -> Vec<Line> {
    let op = ctx.op();
    let spec = match Spectrum::compute(op, k_max + 1, &ctx.loaded.config.tolerances.spectrum()) {
        Ok(s) => s,
        Err(e) => return vec![Line::error("index", e)],
    };
    present_signs(ctx)
        .into_iter()
        .map(|s| {
            let mut values = vec![0.0];
            for j in 1..=k_max + 1 {
                match spec.get(j, s) {
                    Some(mu) => values.push(mu),
                    None => {
                        return Line::new(false, "index", format!("nu={s}: mu_{j} not validated"))
                    }
                }
            }
            let mut got = Vec::new();
            for w in values.windows(2) {
                match crossing_index(&spec, 0.5 * (w[0] + w[1])) {
                    Ok(i) => got.push(i),
                    Err(e) => return Line::error("index", format!("nu={s}: {e}")),
                }
            }
            let ok = got
                .iter()
                .enumerate()
                .all(|(j, &i)| i == if j % 2 == 0 { 1 } else { -1 });
            let shown: Vec<String> = got.iter().map(|i| format!("{i:+}")).collect();
            Line::new(
                ok,
                "index",
                format!("nu={s} across mu_1..mu_{}: [{}]", k_max, shown.join(" ")),
            )
        })
        .collect()
}

fn bifurcation_lines(
    ctx: &Context,
    ks: &[usize],
    c: f64,
    delta: f64,
    amplitudes: &[f64],
    tol: f64,
) -> Vec<Line> {
    let op = ctx.op();
    let g = match Perturbation::new(c, delta) {
        Ok(g) => g,
        Err(e) => return vec![Line::error("bifurcation", e)],
    };
    let Some(&k_top) = ks.iter().max() else {
        return Vec::new();
    };
    let Some(&smallest) = amplitudes.iter().min_by(|a, b| a.total_cmp(b)) else {
        return vec![Line::new(false, "bifurcation", "no amplitudes given")];
    };
    let spec = match Spectrum::compute(op, k_top, &ctx.loaded.config.tolerances.spectrum()) {
        Ok(s) => s,
        Err(e) => return vec![Line::error("bifurcation", e)],
    };
    let mut lines = Vec::new();
    for nu in present_signs(ctx) {
        match verify_bifurcation_points(op, g, ks, nu, &spec, amplitudes, smallest, tol) {
            Ok(checks) => {
                for ch in checks {
                    let offsets: Vec<String> = ch
                        .rows
                        .iter()
                        .map(|r| format!("{:.3e}", r.offset))
                        .collect();
                    let mut text = format!(
                        "k={} nu={} sigma={} offsets [{}] (need <= {tol:e} at alpha {smallest:e}, shrinking)",
                        ch.k,
                        ch.nu,
                        ch.sigma,
                        offsets.join(" ")
                    );
                    if let Some(n) = &ch.note {
                        text.push_str(&format!("; {n}"));
                    }
                    lines.push(Line::new(ch.passed(), "bifurcation", text));
                }
            }
            Err(e) => lines.push(Line::error("bifurcation", format!("nu={nu}: {e}"))),
        }
    }
    lines
}

fn intervals_lines(
    ctx: &Context,
    f: pspect::nodal::Nonlinearity,
    k: usize,
    gammas: Option<&[f64]>,
    residual_tol: f64,
) -> Vec<Line> {
    let op = ctx.op();
    let spec = match Spectrum::compute(op, k, &ctx.loaded.config.tolerances.spectrum()) {
        Ok(s) => s,
        Err(e) => return vec![Line::error("intervals", e)],
    };
    let intervals = match interval_for_gamma(&spec, &f, k, k) {
        Ok(v) => v,
        Err(e) => return vec![Line::error("intervals", e)],
    };
    let mut jobs = Vec::new();
    let mut lines = Vec::new();
    match gammas {
        Some(list) => {
            for &g in list {
                match intervals.iter().find(|iv| iv.contains(g)) {
                    Some(_) => jobs.push(g),
                    None => lines.push(Line::new(
                        false,
                        "intervals",
                        format!("gamma {g} lies in no interval of index {k}"),
                    )),
                }
            }
        }
        None => {
            for iv in &intervals {
                if iv.is_empty() {
                    lines.push(Line::new(
                        true,
                        "intervals",
                        format!("k={k} {iv}: nothing to check"),
                    ));
                } else {
                    jobs.push(0.5 * (iv.lo + iv.hi));
                }
            }
        }
    }
    let opts = nodal_options(ctx, None);
    let pairs: Vec<(f64, Sign)> = jobs
        .iter()
        .flat_map(|&g| [(g, Sign::Plus), (g, Sign::Minus)])
        .collect();
    let found: Vec<Line> = pairs
        .par_iter()
        .map(|&(g, sigma)| match find_nodal(op, &f, g, k, sigma, &opts) {
            Ok(NodalOutcome::Found(sol)) => {
                let zeros = sol.trajectory.interior_zero_count();
                let ok = zeros == k - 1 && sol.residual <= residual_tol;
                Line::new(
                    ok,
                    "intervals",
                    format!(
                        "k={k} gamma={g} sigma={sigma}: alpha {} with {zeros} interior zeros, residual {:e}",
                        sol.alpha, sol.residual
                    ),
                )
            }
            Ok(NodalOutcome::NotFound(rep)) => Line::new(false, "intervals", format!("k={k} gamma={g} sigma={sigma}: {rep}")),
            Err(e) => Line::new(false, "intervals", format!("k={k} gamma={g} sigma={sigma}: {e}")),
        })
        .collect();
    lines.extend(found);
    lines
}
