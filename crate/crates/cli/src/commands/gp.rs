use anyhow::Result;

use pspect::greens::{apply_gp, GreensOptions, SourceTerm};

use super::Context;
use crate::config::Task;
use crate::output::{num, write_atomic, Csv};
use crate::{Outcome, RunError};

/// Writes `gp.csv` with `u = G_p(h)` and `u'` on a uniform grid.
pub fn cmd_gp(ctx: &Context) -> Result<Outcome, RunError> {
    let Task::Gp(task) = &ctx.loaded.config.task else {
        unreachable!("dispatched on task name")
    };
    run(ctx, task).map_err(RunError::Failed)
}

fn run(ctx: &Context, task: &crate::config::GpTask) -> Result<Outcome> {
    let p = ctx.loaded.exponent()?;
    let dim = ctx.loaded.config.problem.dim;
    let h = SourceTerm::from_weight(&task.source.0);
    let opts = GreensOptions {
        intervals: task.intervals,
        ..GreensOptions::default()
    };
    let prof = apply_gp(p, dim, &h, &opts)?;
    let header = ctx.header(vec![format!(
        "p={} N={} intervals={}",
        num(p.p()),
        dim,
        task.intervals
    )]);
    let mut csv = Csv::new(&header, &["r", "u", "du"]);
    for i in 0..prof.r.len() {
        csv.row(&[num(prof.r[i]), num(prof.u[i]), num(prof.du[i])]);
    }
    let mut outcome = Outcome::new();
    outcome
        .files
        .push(write_atomic(&ctx.out_dir, "gp.csv", csv.as_str())?);
    Ok(outcome)
}
