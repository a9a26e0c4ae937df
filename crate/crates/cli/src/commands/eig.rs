use anyhow::Result;
use rayon::prelude::*;

use pspect::spectrum::{find_eigenvalues, Sign, SpectrumSlice};
use pspect::Error;

use super::{dedup_signs, sign_word, Context};
use crate::config::Task;
use crate::output::{num, write_atomic, Csv};
use crate::{Outcome, RunError};

/// Writes `spectrum.csv` and one profile per eigenpair.
pub fn cmd_eig(ctx: &Context) -> Result<Outcome, RunError> {
    let Task::Eig(task) = &ctx.loaded.config.task else {
        unreachable!("dispatched on task name")
    };
    run(ctx, task).map_err(RunError::Failed)
}

fn run(ctx: &Context, task: &crate::config::EigTask) -> Result<Outcome> {
    let op = ctx.op();
    let opts = ctx.loaded.config.tolerances.spectrum();
    let signs = dedup_signs(&task.nu);
    let slices: Vec<(Sign, Result<SpectrumSlice, Error>)> = signs
        .par_iter()
        .map(|&s| (s, find_eigenvalues(op, task.k_max, s, &opts)))
        .collect();

    let mut outcome = Outcome::new();
    let header = ctx.header(vec![format!(
        "p={} N={} K={}",
        num(op.p()),
        op.dim,
        task.k_max
    )]);
    let mut csv = Csv::new(&header, &["k", "nu", "mu", "zero_count", "residual"]);
    for (sign, slice) in &slices {
        let slice = match slice {
            Ok(s) => s,
            Err(e) => {
                outcome.partial(format!("nu={sign}: {e}"));
                continue;
            }
        };
        if !slice.is_complete() {
            outcome.partial(format!(
                "nu={sign}: {}",
                Error::ScanBudgetExhausted {
                    validated: slice.eigenpairs.len(),
                    requested: task.k_max
                }
            ));
        }
        for e in &slice.eigenpairs {
            csv.row(&[
                e.k.to_string(),
                sign.symbol().to_string(),
                num(e.mu),
                e.zeros.len().to_string(),
                num(e.residual),
            ]);
        }
    }
    for (sign, slice) in &slices {
        if let Ok(s) = slice {
            csv.comment(&format!(
                "nu={sign}: scanned to |mu|={} with {} nodes; completeness holds only at that resolution",
                num(s.scanned_to.abs()),
                s.scan_nodes
            ));
        }
    }
    outcome
        .files
        .push(write_atomic(&ctx.out_dir, "spectrum.csv", csv.as_str())?);

    if task.profiles {
        for (sign, slice) in &slices {
            let Ok(slice) = slice else { continue };
            for e in &slice.eigenpairs {
                let h = ctx.header(vec![format!(
                    "k={} nu={} mu={} r_match={}",
                    e.k,
                    sign,
                    num(e.mu),
                    num(e.r_match)
                )]);
                let mut prof = Csv::new(&h, &["r", "u", "du"]);
                let n = task.profile_points - 1;
                for i in 0..=n {
                    let r = i as f64 / n as f64;
                    let (u, du) = e.profile(r);
                    prof.row(&[num(r), num(u), num(du)]);
                }
                let name = format!("profile_k{}_{}.csv", e.k, sign_word(*sign));
                outcome
                    .files
                    .push(write_atomic(&ctx.out_dir, &name, prof.as_str())?);
            }
        }
    }
    Ok(outcome)
}
