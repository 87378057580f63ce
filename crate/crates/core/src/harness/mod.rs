//! Seeded experiment runner.
//!
//! An [`ExperimentPlan`] names an experiment kind and its parameters. Running
//! it yields one or more [`BoundReport`]s, each pairing an estimate with the
//! closed-form value it is checked against. Trial `i` draws its randomness from
//! `trial_stream(seed, i)`, so reports are byte-identical across runs and
//! thread counts. `wall_time_ms` is 0 unless timing is requested.

mod experiments;
mod report;
mod stats;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adversary::JunkKind;
use crate::error::{Error, Result};

pub use report::{ci_consistent, render, write_csv, write_json, Bound, BoundReport, Format, Relation, COMPARE_TOL};
pub use stats::{Estimate, Z99};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spectrum,
    LrBound,
    Selftest,
    Parity,
    Veto,
    Notify,
    Authenticate,
    Collision,
    Aeg,
    Guess,
    BoundsSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::LrBound => "lr-bound",
            ExperimentKind::Selftest => "selftest",
            ExperimentKind::Parity => "parity",
            ExperimentKind::Veto => "veto",
            ExperimentKind::Notify => "notify",
            ExperimentKind::Authenticate => "authenticate",
            ExperimentKind::Collision => "collision",
            ExperimentKind::Aeg => "aeg",
            ExperimentKind::Guess => "guess",
            ExperimentKind::BoundsSweep => "bounds-sweep",
        }
    }

    /// Kinds that sample trials.
    pub fn is_stochastic(self) -> bool {
        !matches!(
            self,
            ExperimentKind::Spectrum | ExperimentKind::LrBound | ExperimentKind::Guess | ExperimentKind::BoundsSweep
        )
    }
}

fn default_n() -> usize {
    5
}

fn default_security() -> usize {
    3
}

fn default_trials() -> u64 {
    10_000
}

fn default_max_repetitions() -> u64 {
    1_000
}

/// Experiment parameters. Unused fields are ignored by kinds that do not need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(rename = "S", default = "default_security")]
    pub security: usize,
    /// Target violation deficit; the noise weight is solved from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Defaults to the `(n-3)` eigenspace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junk: Option<JunkKind>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_repetitions")]
    pub max_repetitions: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Bit string, agent 1 first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sender: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Mismatch count for `authenticate`, failure fraction for `aeg`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n: default_n(),
            security: default_security(),
            epsilon: None,
            delta: None,
            junk: None,
            trials: default_trials(),
            seed: 0,
            max_repetitions: default_max_repetitions(),
            k: None,
            inputs: None,
            sender: None,
            receiver: None,
            threshold: None,
            tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Where to write the transcripts of trial 0 (protocol kinds only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript_path: Option<PathBuf>,
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn new(kind: ExperimentKind, params: Params) -> Self {
        Self {
            kind,
            params,
            output_path: None,
            format: Format::Json,
            transcript_path: None,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub reports: Vec<BoundReport>,
}

impl ExperimentResult {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        render(&self.reports, format)
    }
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    if plan.kind.is_stochastic() && plan.params.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let mut reports = experiments::run(plan.kind, &plan.params, plan.transcript_path.as_deref())?;
    if plan.timing {
        let ms = start.elapsed().as_millis() as u64;
        reports.iter_mut().for_each(|r| r.wall_time_ms = ms);
    }
    let result = ExperimentResult { reports };
    if let Some(path) = &plan.output_path {
        fs::write(path, result.render(plan.format)?)?;
    }
    Ok(result)
}
