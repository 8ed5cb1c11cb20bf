//! Bounded evaluation of configurations with adaptive capping.
//!
//! [`Evaluator::objective`] computes the PAR-p estimate of a configuration
//! over the first `N` entries of the blocked instance list. Runs are taken
//! from the cache whenever a cached run answers the request, and the
//! evaluation stops as soon as the running lower bound `Σ costs / N` exceeds
//! the bound handed in by the caller. A stopped evaluation returns
//! `p·κ_max + (N + 1) − i`, where `i` is the run at which the bound was
//! exceeded, so stopped evaluations still order by how far they got.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::blocking::InstanceSeedList;
use crate::error::EngineError;
use crate::run::{Instance, RunCache, RunRecord, TargetRunner};
use crate::space::{Configuration, ConfigurationSpace};

pub const DEFAULT_PENALTY: f64 = 10.0;
pub const DEFAULT_BOUND_MULTIPLIER: f64 = 2.0;

/// Relative slack added to capped captimes so that floating-point rounding
/// of `N·bound − sum` never cuts a run that would exactly meet the bound.
const CAPTIME_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capping {
    None,
    /// Bounds from the comparison partner only; never changes a decision.
    TrajectoryPreserving,
    /// Additionally bounds every evaluation by `bound_multiplier` times the
    /// incumbent's estimate.
    Aggressive { bound_multiplier: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSettings {
    /// κ_max in seconds
    pub cutoff: f64,
    /// PAR penalty factor p
    pub penalty: f64,
    pub capping: Capping,
}

impl ObjectiveSettings {
    pub fn new(cutoff: f64, penalty: f64, capping: Capping) -> Self {
        ObjectiveSettings { cutoff, penalty, capping }
    }

    /// Largest value a real PAR estimate can take.
    pub fn max_possible_objective(&self) -> f64 {
        self.penalty * self.cutoff
    }
}

/// Details of an evaluation that was stopped by its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapInfo {
    /// `(N + 1) − i` for the run `i` that exceeded the bound
    pub unsolved: usize,
    /// penalized cost of runs `1..=i`
    pub partial_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub value: f64,
    pub n_runs: usize,
    pub capped: Option<CapInfo>,
}

impl CostEstimate {
    pub fn is_capped(&self) -> bool {
        self.capped.is_some()
    }

    /// Total preorder used by all comparisons: by value, and between two
    /// stopped evaluations with the same value by their partial cost.
    pub fn compare(&self, other: &CostEstimate) -> Ordering {
        let by_value = self.value.total_cmp(&other.value);
        match (by_value, self.capped, other.capped) {
            (Ordering::Equal, Some(a), Some(b)) => a.partial_sum.total_cmp(&b.partial_sum),
            (o, _, _) => o,
        }
    }

    /// `self ≤ other`; ties count as not worse.
    pub fn not_worse_than(&self, other: &CostEstimate) -> bool {
        self.compare(other) != Ordering::Greater
    }
}

/// PAR-p over complete records: mean of runtimes, unsuccessful runs counted
/// as `penalty · cutoff`.
pub fn par(records: &[RunRecord], penalty: f64, cutoff: f64) -> f64 {
    assert!(!records.is_empty(), "PAR needs at least one run");
    penalized_sum(records, penalty, cutoff) / records.len() as f64
}

fn penalized_sum(records: &[RunRecord], penalty: f64, cutoff: f64) -> f64 {
    records.iter().map(|r| r.outcome.penalized(penalty, cutoff)).sum()
}

/// Limits on the configurator's own effort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// target-algorithm seconds
    pub target_s: f64,
    pub wall_s: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { target_s: f64::INFINITY, wall_s: f64::INFINITY }
    }
}

/// Wall-clock source. Without one, wall time is taken to equal the consumed
/// target time, which is what a simulated target would report.
pub trait Clock {
    fn elapsed_s(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEntry {
    pub wall_s: f64,
    pub target_s: f64,
    pub iteration: u64,
    pub incumbent: Configuration,
    pub n_runs: usize,
    pub train_estimate: f64,
}

impl TrajectoryEntry {
    pub fn incumbent_id(&self) -> String {
        self.incumbent.id()
    }
}

/// Owns everything one configurator run mutates: run cache, incumbent,
/// blocked list, target backend and logs.
pub struct Evaluator<'a, R> {
    space: &'a ConfigurationSpace,
    instances: &'a [Instance],
    runner: R,
    list: InstanceSeedList,
    cache: RunCache,
    incumbent: Configuration,
    settings: ObjectiveSettings,
    budget: Budget,
    clock: Option<Box<dyn Clock + 'a>>,
    iteration: u64,
    objective_calls: u64,
    trajectory: Vec<TrajectoryEntry>,
    visited: Vec<(Configuration, usize)>,
    record_visits: bool,
    check_invariant: bool,
    invariant_violations: u64,
}

impl<'a, R: TargetRunner> Evaluator<'a, R> {
    pub fn new(
        space: &'a ConfigurationSpace,
        instances: &'a [Instance],
        runner: R,
        list: InstanceSeedList,
        settings: ObjectiveSettings,
        start: Configuration,
    ) -> Self {
        assert_eq!(list.training_size(), instances.len(), "list built for another training set");
        Evaluator {
            space,
            instances,
            runner,
            list,
            cache: RunCache::new(),
            incumbent: start,
            settings,
            budget: Budget::default(),
            clock: None,
            iteration: 0,
            objective_calls: 0,
            trajectory: Vec::new(),
            visited: Vec::new(),
            record_visits: false,
            check_invariant: false,
            invariant_violations: 0,
        }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_clock(mut self, clock: Box<dyn Clock + 'a>) -> Self {
        self.clock = Some(clock);
        self
    }

    /// Log every `(θ, N)` passed to [`Evaluator::objective`].
    pub fn record_visits(mut self, on: bool) -> Self {
        self.record_visits = on;
        self
    }

    /// Check `N(θ_inc) ≥ N(θ)` over the whole cache after every objective call.
    pub fn check_invariant(mut self, on: bool) -> Self {
        self.check_invariant = on;
        self
    }

    pub fn space(&self) -> &'a ConfigurationSpace {
        self.space
    }

    pub fn instances(&self) -> &'a [Instance] {
        self.instances
    }

    pub fn settings(&self) -> &ObjectiveSettings {
        &self.settings
    }

    pub fn cache(&self) -> &RunCache {
        &self.cache
    }

    /// Direct cache access, for seeding test states.
    pub fn cache_mut(&mut self) -> &mut RunCache {
        &mut self.cache
    }

    pub fn list(&self) -> &InstanceSeedList {
        &self.list
    }

    pub fn list_mut(&mut self) -> &mut InstanceSeedList {
        &mut self.list
    }

    pub fn runner(&self) -> &R {
        &self.runner
    }

    pub fn runner_mut(&mut self) -> &mut R {
        &mut self.runner
    }

    pub fn into_runner(self) -> R {
        self.runner
    }

    pub fn incumbent(&self) -> &Configuration {
        &self.incumbent
    }

    /// Replaces the incumbent outright (used when a search starts).
    pub fn set_incumbent(&mut self, config: Configuration) {
        self.incumbent = config;
    }

    pub fn n_runs(&self, config: &Configuration) -> usize {
        self.cache.n_runs(config)
    }

    pub fn consumed(&self) -> f64 {
        self.cache.consumed()
    }

    pub fn wall_s(&self) -> f64 {
        match &self.clock {
            Some(c) => c.elapsed_s(),
            None => self.cache.consumed(),
        }
    }

    pub fn budget_exhausted(&self) -> bool {
        self.consumed() >= self.budget.target_s || self.wall_s() >= self.budget.wall_s
    }

    pub fn objective_calls(&self) -> u64 {
        self.objective_calls
    }

    pub fn invariant_violations(&self) -> u64 {
        self.invariant_violations
    }

    pub fn visited(&self) -> &[(Configuration, usize)] {
        &self.visited
    }

    pub fn trajectory(&self) -> &[TrajectoryEntry] {
        &self.trajectory
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn set_iteration(&mut self, iteration: u64) {
        self.iteration = iteration;
    }

    /// PAR over the first `n` cached runs of `config`, if it has that many.
    pub fn estimate(&self, config: &Configuration, n: usize) -> Option<f64> {
        let recs = self.cache.records(config);
        if n == 0 || recs.len() < n {
            return None;
        }
        Some(par(&recs[..n], self.settings.penalty, self.settings.cutoff))
    }

    /// `ĉ_{N(θ_inc)}(θ_inc)`.
    pub fn incumbent_estimate(&self) -> Option<f64> {
        self.estimate(&self.incumbent, self.n_runs(&self.incumbent))
    }

    /// Appends a trajectory row describing the current incumbent.
    pub fn log_iteration(&mut self) {
        let n = self.n_runs(&self.incumbent);
        let entry = TrajectoryEntry {
            wall_s: self.wall_s(),
            target_s: self.consumed(),
            iteration: self.iteration,
            incumbent: self.incumbent.clone(),
            n_runs: n,
            train_estimate: self.estimate(&self.incumbent, n).unwrap_or(f64::NAN),
        };
        self.trajectory.push(entry);
    }

    /// `ĉ_N(θ)` with an optional bound (use `f64::INFINITY` for none).
    ///
    /// Keeps `N(θ_inc) ≥ N(θ)` by first extending the incumbent, tightens the
    /// bound in aggressive mode, reuses or performs runs slot by slot and
    /// stops once the lower bound exceeds `bound`. A configuration that
    /// completes `N = N(θ_inc)` runs with a lower total cost than the
    /// incumbent becomes the new incumbent.
    pub fn objective(
        &mut self,
        config: &Configuration,
        n: usize,
        bound: f64,
    ) -> Result<CostEstimate, EngineError> {
        if n == 0 {
            return Err(EngineError::InvalidRunCount);
        }
        if bound.is_nan() || bound <= 0.0 {
            return Err(EngineError::InvalidBound(bound));
        }
        self.objective_calls += 1;
        if self.record_visits {
            self.visited.push((config.clone(), n));
        }
        let result = self.bounded_evaluation(config, n, bound);
        if self.check_invariant && result.is_ok() {
            let n_inc = self.n_runs(&self.incumbent);
            if self.cache.configurations().any(|c| self.cache.n_runs(c) > n_inc) {
                self.invariant_violations += 1;
            }
        }
        result
    }

    fn bounded_evaluation(
        &mut self,
        config: &Configuration,
        n: usize,
        bound: f64,
    ) -> Result<CostEstimate, EngineError> {
        if *config != self.incumbent && self.n_runs(&self.incumbent) < n {
            let inc = self.incumbent.clone();
            self.objective(&inc, n, f64::INFINITY)?;
        }

        let mut bound = match self.settings.capping {
            Capping::None => f64::INFINITY,
            _ => bound,
        };
        if let Capping::Aggressive { bound_multiplier } = self.settings.capping {
            if *config != self.incumbent {
                if let Some(c_inc) = self.estimate(&self.incumbent, n) {
                    bound = bound.min(bound_multiplier * c_inc);
                }
            }
        }

        let ObjectiveSettings { cutoff, penalty, .. } = self.settings;
        let max_possible = self.settings.max_possible_objective();
        let nf = n as f64;
        let mut sum = 0.0;
        let mut i = 1;
        while i <= n {
            // replay reusable cached slots with a single map lookup
            let (replayed, stop) = replay(self.cache.records(config), i, n, nf, bound, cutoff, penalty, &mut sum);
            self.cache.note_reused(replayed);
            i += replayed;
            match stop {
                Replay::Capped(at, partial) => return Ok(self.capped(n, at, partial, max_possible)),
                Replay::Done => break,
                Replay::NeedsRun => {}
            }
            let remaining = nf * bound - sum;
            let captime = cutoff.min(remaining * (1.0 + CAPTIME_SLACK));
            if self.budget_exhausted() {
                return Err(EngineError::BudgetExhausted);
            }
            let (rec, _) = self.cache.get_or_run(
                self.space,
                &mut self.runner,
                config,
                i,
                captime,
                &mut self.list,
                self.instances,
            )?;
            let cost = rec.outcome.penalized(penalty, cutoff);
            if (sum + cost) / nf > bound {
                return Ok(self.capped(n, i, sum + cost, max_possible));
            }
            sum += cost;
            i += 1;
        }

        if *config != self.incumbent && n == self.n_runs(&self.incumbent) {
            let inc_sum = penalized_sum(&self.cache.records(&self.incumbent)[..n], penalty, cutoff);
            if sum < inc_sum {
                self.incumbent = config.clone();
                self.log_iteration();
            }
        }
        Ok(CostEstimate { value: sum / nf, n_runs: n, capped: None })
    }

    fn capped(&self, n: usize, i: usize, partial_sum: f64, max_possible: f64) -> CostEstimate {
        let unsolved = n + 1 - i;
        CostEstimate {
            value: max_possible + unsolved as f64,
            n_runs: n,
            capped: Some(CapInfo { unsolved, partial_sum }),
        }
    }
}

enum Replay {
    Done,
    /// slot `i` has no reusable record at the current captime
    NeedsRun,
    /// stopped by the bound at slot `i` with this partial sum
    Capped(usize, f64),
}

/// Walks slots `from..=n` while cached records can be reused, adding their
/// costs to `sum`. Returns how many slots were consumed and why it stopped.
#[allow(clippy::too_many_arguments)]
fn replay(
    records: &[RunRecord],
    from: usize,
    n: usize,
    nf: f64,
    bound: f64,
    cutoff: f64,
    penalty: f64,
    sum: &mut f64,
) -> (usize, Replay) {
    let mut i = from;
    while i <= n {
        let remaining = nf * bound - *sum;
        if remaining <= 0.0 {
            return (i - from, Replay::Capped(i, *sum));
        }
        let captime = cutoff.min(remaining * (1.0 + CAPTIME_SLACK));
        let Some(rec) = records.get(i - 1).filter(|r| r.reusable_at(captime)) else {
            return (i - from, Replay::NeedsRun);
        };
        let cost = rec.outcome.penalized(penalty, cutoff);
        if (*sum + cost) / nf > bound {
            // the slot was reused, so it counts as consumed
            return (i + 1 - from, Replay::Capped(i, *sum + cost));
        }
        *sum += cost;
        i += 1;
    }
    (i - from, Replay::Done)
}
