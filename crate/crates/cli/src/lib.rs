//! Front end for `pspect`: JSON-configured batch runs writing CSV, SVG and
//! plain-text reports.
//!
//! Each `cmd_*` function takes a loaded config and an output directory and
//! returns an [`Outcome`]; the binary maps it to an exit code.

pub mod config;
pub mod output;

mod commands;

use std::path::{Path, PathBuf};

pub use commands::{cmd_branch, cmd_eig, cmd_gp, cmd_nodal, cmd_verify, Context};
pub use config::{ConfigError, Loaded};

/// Overall result of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Partial,
    VerificationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Partial => 2,
            Status::VerificationFailed => 3,
        }
    }

    fn worst(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Ok => 0,
            Status::Partial => 1,
            Status::VerificationFailed => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            status: Status::Ok,
            files: Vec::new(),
            messages: Vec::new(),
        }
    }

    fn partial(&mut self, msg: impl Into<String>) {
        self.status = self.status.worst(Status::Partial);
        self.messages.push(msg.into());
    }
}

#[derive(Debug)]
pub enum RunError {
    /// Exit code 1.
    Config(ConfigError),
    /// Nothing usable was produced; exit code 2.
    Failed(anyhow::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Failed(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Failed(_) => 2,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// Loads `config`, checks that its task is `command`, applies overrides and
/// runs it.
pub fn run(
    command: &str,
    config: &Path,
    out: Option<&Path>,
    tol_rel: Option<f64>,
) -> Result<Outcome, RunError> {
    let mut loaded = config::load(config)?;
    let task = loaded.config.task.name();
    if task != command {
        return Err(ConfigError(format!(
            "{}: task block is `{task}` but the command is `{command}`",
            config.display()
        ))
        .into());
    }
    if let Some(t) = tol_rel {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError(format!("--tol-rel must be positive, got {t}")).into());
        }
        loaded.config.tolerances.ivp_rtol = t;
    }
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| loaded.config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("pspect-out"));
    let ctx = Context::new(loaded, out_dir)?;
    match command {
        "eig" => cmd_eig(&ctx),
        "nodal" => cmd_nodal(&ctx),
        "branch" => cmd_branch(&ctx),
        "verify" => cmd_verify(&ctx),
        "gp" => cmd_gp(&ctx),
        other => Err(ConfigError(format!("unknown command `{other}`")).into()),
    }
}
