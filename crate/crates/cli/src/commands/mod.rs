mod branch;
mod eig;
mod gp;
mod nodal;
mod verify;

use std::path::PathBuf;

use pspect::radial_ivp::Operator;
use pspect::spectrum::Sign;

use crate::config::{ConfigError, Loaded};
use crate::output::Header;

pub use branch::cmd_branch;
pub use eig::cmd_eig;
pub use gp::cmd_gp;
pub use nodal::cmd_nodal;
pub use verify::cmd_verify;

/// A validated config and where to write.
#[derive(Debug, Clone)]
pub struct Context {
    pub loaded: Loaded,
    pub out_dir: PathBuf,
    /// Present for every task that needs a weight.
    pub operator: Option<Operator>,
}

impl Context {
    pub fn new(loaded: Loaded, out_dir: PathBuf) -> Result<Self, ConfigError> {
        loaded.exponent()?;
        let needs_weight = loaded.config.task.name() != "gp";
        let operator = if needs_weight || loaded.config.problem.weight.is_some() {
            Some(loaded.operator()?)
        } else {
            None
        };
        Ok(Self {
            loaded,
            out_dir,
            operator,
        })
    }

    fn op(&self) -> &Operator {
        self.operator.as_ref().expect("operator checked at load")
    }

    fn header(&self, extra: Vec<String>) -> Header {
        Header {
            command: self.loaded.config.task.name().to_string(),
            config_sha256: self.loaded.sha256.clone(),
            tolerances: self.loaded.config.tolerances.describe(),
            extra,
        }
    }
}

fn sign_word(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

/// First occurrence of each sign, in the given order.
fn dedup_signs(list: &[crate::config::SignSpec]) -> Vec<Sign> {
    let mut out = Vec::new();
    for s in list {
        if !out.contains(&s.0) {
            out.push(s.0);
        }
    }
    out
}
