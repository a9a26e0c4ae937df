use anyhow::Result;
use rayon::prelude::*;

use pspect::nodal::{find_nodal, interval_for_gamma, NodalOptions, NodalOutcome};
use pspect::spectrum::{Sign, Spectrum};

use super::{dedup_signs, sign_word, Context};
use crate::config::{NodalTask, Task};
use crate::output::{num, write_atomic, Csv};
use crate::{Outcome, RunError};

/// Writes `nodal.csv` with one row per solution found, a profile for each,
/// and the existence interval for `γ` as header comments.
pub fn cmd_nodal(ctx: &Context) -> Result<Outcome, RunError> {
    let Task::Nodal(task) = &ctx.loaded.config.task else {
        unreachable!("dispatched on task name")
    };
    run(ctx, task).map_err(RunError::Failed)
}

pub(super) fn nodal_options(
    ctx: &Context,
    alpha: Option<crate::config::AlphaRange>,
) -> NodalOptions {
    let mut opts = NodalOptions::default();
    let tol = &ctx.loaded.config.tolerances;
    // Nodal shots default to tighter tolerances than the spectrum; only an
    // explicit override loosens them.
    opts.ivp.rtol = opts.ivp.rtol.min(tol.ivp_rtol);
    opts.ivp.atol = opts.ivp.atol.min(tol.ivp_atol);
    if let Some(a) = alpha {
        opts.alpha_min = a.min;
        opts.alpha_max = a.max;
        opts.alpha_ratio = a.ratio;
    }
    opts
}

fn run(ctx: &Context, task: &NodalTask) -> Result<Outcome> {
    let op = ctx.op();
    let f = task.f.0;
    let opts = nodal_options(ctx, task.alpha);
    let mut outcome = Outcome::new();

    let mut extra = vec![format!("k={} gamma={} f={}", task.k, num(task.gamma), f)];
    match Spectrum::compute(op, task.k, &ctx.loaded.config.tolerances.spectrum()) {
        Ok(spec) => match interval_for_gamma(&spec, &f, task.k, task.k) {
            Ok(list) => {
                for iv in list {
                    let inside = if iv.contains(task.gamma) {
                        "contains gamma"
                    } else {
                        "gamma outside"
                    };
                    extra.push(format!("interval {iv} {inside}"));
                }
            }
            Err(e) => extra.push(format!("interval unavailable: {e}")),
        },
        Err(e) => extra.push(format!("interval unavailable: {e}")),
    }
    let header = ctx.header(extra);

    let signs = dedup_signs(&task.sigma);
    let results: Vec<(Sign, Result<NodalOutcome, pspect::Error>)> = signs
        .par_iter()
        .map(|&s| (s, find_nodal(op, &f, task.gamma, task.k, s, &opts)))
        .collect();

    let mut csv = Csv::new(
        &header,
        &["k", "sigma", "gamma", "alpha", "zeros", "residual"],
    );
    for (sigma, res) in &results {
        match res {
            Ok(NodalOutcome::Found(sol)) => {
                csv.row(&[
                    sol.k.to_string(),
                    sigma.symbol().to_string(),
                    num(sol.gamma),
                    num(sol.alpha),
                    sol.trajectory.interior_zero_count().to_string(),
                    num(sol.residual),
                ]);
                if sol.homogeneous_degeneracy {
                    outcome
                        .messages
                        .push(format!("sigma={sigma}: f is homogeneous, every multiple of this solution also solves"));
                }
                let h = ctx.header(vec![format!(
                    "k={} sigma={} gamma={} alpha={}",
                    sol.k,
                    sigma,
                    num(sol.gamma),
                    num(sol.alpha)
                )]);
                let mut prof = Csv::new(&h, &["r", "u", "du"]);
                let n = task.profile_points.max(2) - 1;
                for i in 0..=n {
                    let r = i as f64 / n as f64;
                    prof.row(&[
                        num(r),
                        num(sol.trajectory.value(r)),
                        num(sol.trajectory.slope(r)),
                    ]);
                }
                let name = format!("nodal_k{}_{}.csv", sol.k, sign_word(*sigma));
                outcome
                    .files
                    .push(write_atomic(&ctx.out_dir, &name, prof.as_str())?);
            }
            Ok(NodalOutcome::NotFound(report)) => {
                outcome.partial(format!("sigma={sigma}: {report}"))
            }
            Err(e) => outcome.partial(format!("sigma={sigma}: {e}")),
        }
    }
    outcome
        .files
        .insert(0, write_atomic(&ctx.out_dir, "nodal.csv", csv.as_str())?);
    Ok(outcome)
}
