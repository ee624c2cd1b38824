//! Config-driven pipeline from a pair potential to the Gaussian limit law of
//! one-particle observables, plus the Fock-space verification suite.
//!
//! Every stage writes plot-ready tables and a JSON bundle `<out>/<stage>.json`
//! carrying the config hash, the seed and every thresholded check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
mod error;
pub mod pipeline;

use std::path::PathBuf;

pub use bundle::ReportBundle;
pub use config::{Format, RunConfig};
pub use error::CliError;
pub use pipeline::{run_coefficients, run_limit, run_report, run_scattering, run_sweep, run_verify, Context};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Scattering,
    Coefficients,
    Limit,
    Verify,
    Sweep,
    Report,
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.verify.seed = seed;
        }
        if let Some(format) = self.format {
            cfg.output.format = format;
        }
    }
}

/// Runs one stage; a bundle with a failed check becomes [`CliError::Acceptance`].
pub fn run_stage(stage: Stage, cfg: &RunConfig, ctx: &Context) -> Result<ReportBundle, CliError> {
    let bundle = match stage {
        Stage::Scattering => run_scattering(cfg, ctx)?,
        Stage::Coefficients => run_coefficients(cfg, ctx)?,
        Stage::Limit => run_limit(cfg, ctx)?,
        Stage::Verify => run_verify(cfg)?,
        Stage::Sweep => run_sweep(cfg, ctx)?,
        Stage::Report => run_report(cfg)?,
    };
    if !bundle.passed {
        let failed: Vec<&str> = bundle.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::Acceptance(format!(
            "{}: failed checks {}",
            bundle.stage,
            failed.join(", ")
        )));
    }
    Ok(bundle)
}
