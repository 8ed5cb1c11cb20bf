//! Target runs, their records, and the per-configuration run cache.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::blocking::InstanceSeedList;
use crate::error::BackendError;
use crate::space::{Configuration, ConfigurationSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Success,
    Timeout,
    Crashed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Success => "SUCCESS",
            RunStatus::Timeout => "TIMEOUT",
            RunStatus::Crashed => "CRASHED",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for RunStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "SUCCESS" => Ok(RunStatus::Success),
            "TIMEOUT" => Ok(RunStatus::Timeout),
            "CRASHED" => Ok(RunStatus::Crashed),
            _ => Err(()),
        }
    }
}

/// Result of one target run.
///
/// `cost` is the runtime for a success and the captime used otherwise; crashes
/// are charged like timeouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub cost: f64,
}

impl RunOutcome {
    pub fn success(runtime: f64) -> Self {
        RunOutcome { status: RunStatus::Success, cost: runtime }
    }

    pub fn timeout(captime: f64) -> Self {
        RunOutcome { status: RunStatus::Timeout, cost: captime }
    }

    pub fn crashed(captime: f64) -> Self {
        RunOutcome { status: RunStatus::Crashed, cost: captime }
    }

    pub fn is_success(&self) -> bool {
        self.status == RunStatus::Success
    }

    /// Contribution to a PAR-p mean: the runtime, or `penalty * cutoff` for
    /// unsuccessful runs.
    pub fn penalized(&self, penalty: f64, cutoff: f64) -> f64 {
        if self.is_success() {
            self.cost
        } else {
            penalty * cutoff
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
}

impl Instance {
    pub fn new(name: impl Into<String>) -> Self {
        Instance { name: name.into() }
    }
}

/// A run slot of some configuration's sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    /// 1-based position in the instance/seed list.
    pub index: usize,
    pub seed: u32,
    pub captime: f64,
    pub outcome: RunOutcome,
}

impl RunRecord {
    /// Whether this record answers a request at `captime`: an unsuccessful run
    /// that had at least that much time, or a success that finished within it.
    pub fn reusable_at(&self, captime: f64) -> bool {
        if self.outcome.is_success() {
            self.captime < captime || self.outcome.cost <= captime
        } else {
            self.captime >= captime
        }
    }
}

/// Something that can execute the target algorithm.
pub trait TargetRunner {
    fn run(
        &mut self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
        captime: f64,
    ) -> Result<RunOutcome, BackendError>;
}

impl<R: TargetRunner + ?Sized> TargetRunner for &mut R {
    fn run(
        &mut self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
        captime: f64,
    ) -> Result<RunOutcome, BackendError> {
        (**self).run(space, config, instance, seed, captime)
    }
}

/// Per-configuration run sequences plus target-time accounting.
#[derive(Debug, Clone, Default)]
pub struct RunCache {
    runs: BTreeMap<Configuration, Vec<RunRecord>>,
    consumed: f64,
    executed: u64,
    reused: u64,
}

impl RunCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `N(θ)`: number of filled slots.
    pub fn n_runs(&self, config: &Configuration) -> usize {
        self.runs.get(config).map_or(0, Vec::len)
    }

    pub fn records(&self, config: &Configuration) -> &[RunRecord] {
        self.runs.get(config).map_or(&[], Vec::as_slice)
    }

    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        self.runs.keys()
    }

    /// Target seconds charged by executed (non-reused) runs.
    pub fn consumed(&self) -> f64 {
        self.consumed
    }

    pub fn executed_runs(&self) -> u64 {
        self.executed
    }

    pub fn reused_runs(&self) -> u64 {
        self.reused
    }

    /// The cached record at 1-based `index` if it can stand in for a run
    /// at `captime`.
    pub fn reusable(&self, config: &Configuration, index: usize, captime: f64) -> Option<RunRecord> {
        let rec = self.records(config).get(index.checked_sub(1)?)?;
        rec.reusable_at(captime).then_some(*rec)
    }

    /// Counts reuses that bypassed [`RunCache::get_or_run`].
    pub(crate) fn note_reused(&mut self, count: usize) {
        self.reused += count as u64;
    }

    /// Writes slot `index` (1-based), which must be an existing slot or the
    /// next free one.
    pub fn store(&mut self, config: &Configuration, record: RunRecord) {
        let seq = self.runs.entry(config.clone()).or_default();
        let slot = record.index - 1;
        assert!(slot <= seq.len(), "run slots must be filled in order");
        if slot == seq.len() {
            seq.push(record);
        } else {
            seq[slot] = record;
        }
    }

    /// Returns the record for slot `index`, reusing the cached one when it is
    /// valid at `captime` and otherwise executing a fresh run at `captime`.
    /// The second element tells whether the record was reused.
    #[allow(clippy::too_many_arguments)]
    pub fn get_or_run<R: TargetRunner + ?Sized>(
        &mut self,
        space: &ConfigurationSpace,
        runner: &mut R,
        config: &Configuration,
        index: usize,
        captime: f64,
        list: &mut InstanceSeedList,
        instances: &[Instance],
    ) -> Result<(RunRecord, bool), BackendError> {
        assert!(index >= 1 && index <= self.n_runs(config) + 1, "slot {index} out of order");
        if let Some(rec) = self.reusable(config, index, captime) {
            self.reused += 1;
            return Ok((rec, true));
        }
        let (inst, seed) = list.pair(index);
        let outcome = runner.run(space, config, &instances[inst], seed, captime)?;
        let outcome = normalize(outcome, captime);
        self.consumed += outcome.cost;
        self.executed += 1;
        let rec = RunRecord { index, seed, captime, outcome };
        self.store(config, rec);
        Ok((rec, false))
    }
}

/// Enforces the outcome invariants: successes never exceed the captime and
/// unsuccessful runs cost exactly the captime.
fn normalize(outcome: RunOutcome, captime: f64) -> RunOutcome {
    match outcome.status {
        RunStatus::Success if outcome.cost > captime => RunOutcome::timeout(captime),
        RunStatus::Success => RunOutcome::success(outcome.cost.max(0.0)),
        RunStatus::Timeout => RunOutcome::timeout(captime),
        RunStatus::Crashed => RunOutcome::crashed(captime),
    }
}
