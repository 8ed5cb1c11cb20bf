//! Output files: trajectory logs, configuration files, evaluation reports
//! and run summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use paramils_core::evaluation::EvaluationReport;
use paramils_core::objective::TrajectoryEntry;
use paramils_core::{Configuration, ConfigurationSpace};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: &str = "wall_s,target_s,iteration,incumbent_id,n_runs,train_estimate";

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Write { path: path.into(), source })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.into(), source })
}

/// Trajectory log; the first line records the master seed for replay.
pub fn trajectory_csv(master_seed: u64, entries: &[TrajectoryEntry]) -> String {
    let mut out = format!("# master_seed={master_seed}\n{TRAJECTORY_HEADER}\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.wall_s,
            e.target_s,
            e.iteration,
            e.incumbent_id(),
            e.n_runs,
            e.train_estimate
        );
    }
    out
}

/// `name = value` for every parameter.
pub fn config_text(space: &ConfigurationSpace, config: &Configuration) -> String {
    let mut out = String::new();
    for (name, value) in space.full_assignment(config) {
        let _ = writeln!(out, "{name} = {value}");
    }
    out
}

/// Reads a configuration file; unlisted parameters take their defaults.
pub fn parse_config(space: &ConfigurationSpace, text: &str, origin: &Path) -> Result<Configuration> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.into(),
            line: i + 1,
            message: "expected `name = value`".into(),
        })?;
        pairs.push((k.trim(), v.trim()));
    }
    space.configuration(pairs).map_err(|source| Error::Space { path: origin.into(), source })
}

pub fn evaluation_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("instance,cost,status\n");
    for r in &report.runs {
        let _ = writeln!(out, "{},{},{}", r.instance, r.cost, r.outcome.status);
    }
    out
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub configuration_id: String,
    pub configuration: BTreeMap<String, String>,
    pub train_par: Option<f64>,
    pub test_par: f64,
    pub test_runs: usize,
    pub timeouts: usize,
    pub cutoff_time: f64,
    pub penalty: f64,
}

impl EvaluationSummary {
    pub fn new(space: &ConfigurationSpace, report: &EvaluationReport) -> Self {
        EvaluationSummary {
            configuration_id: report.configuration.id(),
            configuration: assignment(space, &report.configuration),
            train_par: report.train_par.and_then(finite),
            test_par: report.test_par,
            test_runs: report.runs.len(),
            timeouts: report.timeouts,
            cutoff_time: report.cutoff,
            penalty: report.penalty,
        }
    }
}

pub fn assignment(space: &ConfigurationSpace, config: &Configuration) -> BTreeMap<String, String> {
    space.active_assignment(config).into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub incumbent_id: String,
    pub incumbent: BTreeMap<String, String>,
    pub train_par: Option<f64>,
    pub train_runs: usize,
    pub iterations: u64,
    pub stop: String,
    pub target_s: f64,
    pub executed_runs: u64,
    pub test_par: Option<f64>,
    pub test_timeouts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub master_seed: u64,
    pub strategy: String,
    pub capping: String,
    pub best_run: usize,
    pub runs: Vec<RunSummary>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}
