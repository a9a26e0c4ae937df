use anyhow::{anyhow, Result};
use rayon::prelude::*;

use pspect::nodal::{trace_branch, AmplitudeGrid, Branch};
use pspect::spectrum::{find_eigenvalues, Sign};

use super::nodal::nodal_options;
use super::{dedup_signs, sign_word, Context};
use crate::config::{BranchTask, Task};
use crate::output::{num, write_atomic, Csv, Plot};
use crate::{Outcome, RunError};

/// Writes `branch_k{K}_{sigma}.csv` and a matching SVG for each `σ`.
pub fn cmd_branch(ctx: &Context) -> Result<Outcome, RunError> {
    let Task::Branch(task) = &ctx.loaded.config.task else {
        unreachable!("dispatched on task name")
    };
    run(ctx, task).map_err(RunError::Failed)
}

fn run(ctx: &Context, task: &BranchTask) -> Result<Outcome> {
    let op = ctx.op();
    let f = task.f.0;
    let nu = task.nu.0;
    let slice = find_eigenvalues(op, task.k, nu, &ctx.loaded.config.tolerances.spectrum())?;
    let mu_k = slice
        .eigenpairs
        .get(task.k - 1)
        .map(|e| e.mu)
        .ok_or_else(|| {
            anyhow!(
                "mu_{}^{} not reached: {} of {} eigenvalues validated",
                task.k,
                nu,
                slice.eigenpairs.len(),
                task.k
            )
        })?;
    let grid = AmplitudeGrid {
        min: task.alpha.min,
        max: task.alpha.max,
        ratio: task.alpha.ratio,
    };
    let opts = nodal_options(ctx, None);
    let signs = dedup_signs(&task.sigma);
    let branches: Vec<(Sign, Result<Branch, pspect::Error>)> = signs
        .par_iter()
        .map(|&s| (s, trace_branch(op, &f, task.k, s, nu, mu_k, &grid, &opts)))
        .collect();

    let mut outcome = Outcome::new();
    for (sigma, b) in branches {
        let b = match b {
            Ok(b) => b,
            Err(e) => {
                outcome.partial(format!("sigma={sigma}: {e}"));
                continue;
            }
        };
        if b.truncated {
            outcome.partial(format!(
                "sigma={sigma}: branch truncated after {} points",
                b.points.len()
            ));
        }
        for d in &b.diagnostics {
            outcome.messages.push(format!("sigma={sigma}: {d}"));
        }
        let header = ctx.header(vec![
            format!(
                "k={} sigma={} nu={} f={} mu_k={}",
                task.k,
                sigma,
                nu,
                f,
                num(mu_k)
            ),
            format!(
                "limits mu_k/f0={} mu_k/f_inf={}",
                num(b.gamma_zero_limit),
                num(b.gamma_inf_limit)
            ),
        ]);
        let mut csv = Csv::new(&header, &["gamma", "alpha", "sup_norm", "zeros"]);
        for p in &b.points {
            csv.row(&[
                num(p.gamma),
                num(p.alpha),
                num(p.sup_norm),
                p.zeros.to_string(),
            ]);
        }
        csv.comment(&format!(
            "gamma_0={}",
            b.gamma_0().map_or("nan".into(), num)
        ));
        csv.comment(&format!(
            "gamma_inf={}",
            b.gamma_inf().map_or("nan".into(), num)
        ));
        let stem = format!("branch_k{}_{}", task.k, sign_word(sigma));
        outcome.files.push(write_atomic(
            &ctx.out_dir,
            &format!("{stem}.csv"),
            csv.as_str(),
        )?);

        let title = format!("k = {}, sigma = {}, nu = {}", task.k, sigma, nu);
        let plot = Plot {
            title: &title,
            x_label: "gamma",
            y_label: "sup |u|",
            series: vec![(
                format!("sigma {sigma}"),
                "#1f4e9c",
                b.points.iter().map(|p| (p.gamma, p.sup_norm)).collect(),
            )],
            marks: vec![
                (b.gamma_zero_limit, "mu_k/f0".into()),
                (b.gamma_inf_limit, "mu_k/f_inf".into()),
            ],
        };
        outcome.files.push(write_atomic(
            &ctx.out_dir,
            &format!("{stem}.svg"),
            &plot.render(),
        )?);
    }
    Ok(outcome)
}
