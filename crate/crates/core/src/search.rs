//! Search drivers: iterated local search over the one-exchange
//! neighbourhood and the two baselines built from its parts.

use alloc::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::compare::{Better, FixedN, Focused};
use crate::error::{EngineError, SpaceError};
use crate::objective::Evaluator;
use crate::run::TargetRunner;
use crate::space::{Configuration, DEFAULT_MAX_REJECTIONS};

/// Meta-parameters of the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    /// random configurations tried before the first descent
    pub r: usize,
    /// random one-exchange steps per perturbation
    pub s: usize,
    pub p_restart: f64,
    /// ILS iterations (or random-search samples); `None` for unlimited
    pub max_iterations: Option<u64>,
    /// Stop after this many consecutive iterations that executed no new
    /// target run. Every estimate is then already cached, so further
    /// iterations cannot consume budget and would never terminate.
    pub max_idle_iterations: u64,
    pub max_rejections: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            r: 10,
            s: 3,
            p_restart: 0.01,
            max_iterations: None,
            max_idle_iterations: 10_000,
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    BasicIls { n: usize },
    FocusedIls,
    RandomSearch { n: usize },
    SimpleLs { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// the driver finished on its own (local optimum for SimpleLS)
    Completed,
    MaxIterations,
    Budget,
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub incumbent: Configuration,
    pub iterations: u64,
    pub stop: StopReason,
}

/// Errors that end a search without an anytime answer.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    Engine(EngineError),
    Space(SpaceError),
}

impl From<EngineError> for SearchError {
    fn from(e: EngineError) -> Self {
        SearchError::Engine(e)
    }
}

impl From<SpaceError> for SearchError {
    fn from(e: SpaceError) -> Self {
        SearchError::Space(e)
    }
}

impl core::fmt::Display for SearchError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SearchError::Engine(e) => e.fmt(f),
            SearchError::Space(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for SearchError {}

/// First-improvement descent: scans neighbours in random order and moves
/// to the first one `better` accepts, until a full scan accepts nothing.
///
/// A descent never moves back to a configuration it already visited, which
/// only matters for ties and keeps flat landscapes from cycling forever.
pub fn iterative_first_improvement<R, B, G>(
    ev: &mut Evaluator<'_, R>,
    better: &mut B,
    start: Configuration,
    rng: &mut G,
) -> Result<Configuration, EngineError>
where
    R: TargetRunner,
    B: Better<R> + ?Sized,
    G: Rng + ?Sized,
{
    let space = ev.space();
    let mut visited = BTreeSet::new();
    visited.insert(start.clone());
    let mut current = start;
    'descent: loop {
        for candidate in space.neighbors(&current, rng) {
            if visited.contains(&candidate) {
                continue;
            }
            if better.better(ev, &candidate, &current)? {
                visited.insert(candidate.clone());
                current = candidate;
                continue 'descent;
            }
        }
        return Ok(current);
    }
}

struct Termination {
    max_iterations: Option<u64>,
    max_idle: u64,
    idle: u64,
    last_executed: u64,
}

impl Termination {
    fn new(params: &SearchParams) -> Self {
        Termination {
            max_iterations: params.max_iterations,
            max_idle: params.max_idle_iterations,
            idle: 0,
            last_executed: 0,
        }
    }

    fn check<R: TargetRunner>(&mut self, ev: &Evaluator<'_, R>, iterations: u64) -> Option<StopReason> {
        let executed = ev.cache().executed_runs();
        if executed == self.last_executed && iterations > 0 {
            self.idle += 1;
        } else {
            self.idle = 0;
        }
        self.last_executed = executed;
        if self.max_iterations.is_some_and(|m| iterations >= m) {
            Some(StopReason::MaxIterations)
        } else if ev.budget_exhausted() {
            Some(StopReason::Budget)
        } else if self.idle >= self.max_idle {
            Some(StopReason::Idle)
        } else {
            None
        }
    }
}

/// Maps an interrupted evaluation to an anytime result and logs the final
/// state unless the last trajectory row already shows it.
fn finish<R: TargetRunner>(
    ev: &mut Evaluator<'_, R>,
    result: Result<StopReason, SearchError>,
    iterations: u64,
) -> Result<SearchOutcome, SearchError> {
    let stop = match result {
        Ok(stop) => stop,
        Err(SearchError::Engine(EngineError::BudgetExhausted)) => StopReason::Budget,
        Err(e) => return Err(e),
    };
    let stale = ev.trajectory().last().is_none_or(|e| {
        e.iteration != ev.iteration() || e.target_s != ev.consumed() || e.incumbent != *ev.incumbent()
    });
    if stale {
        ev.log_iteration();
    }
    Ok(SearchOutcome { incumbent: ev.incumbent().clone(), iterations, stop })
}

/// Lines 1–3 of the ILS framework: `r` random configurations each compared
/// against the current start, which they replace when accepted.
fn initialize<R, B, G>(
    ev: &mut Evaluator<'_, R>,
    better: &mut B,
    start: Configuration,
    params: &SearchParams,
    rng: &mut G,
) -> Result<Configuration, SearchError>
where
    R: TargetRunner,
    B: Better<R> + ?Sized,
    G: Rng + ?Sized,
{
    let space = ev.space();
    let mut theta0 = start;
    for _ in 0..params.r {
        let theta = space.sample_random(rng, params.max_rejections)?;
        if better.better(ev, &theta, &theta0)? {
            theta0 = theta;
        }
    }
    Ok(theta0)
}

/// Iterated local search from `start`; returns the overall incumbent.
///
/// `ev` must have been created with `start` as its incumbent.
pub fn paramils<R, B, G>(
    ev: &mut Evaluator<'_, R>,
    better: &mut B,
    start: Configuration,
    params: &SearchParams,
    rng: &mut G,
) -> Result<SearchOutcome, SearchError>
where
    R: TargetRunner,
    B: Better<R> + ?Sized,
    G: Rng + ?Sized,
{
    let space = ev.space();
    let mut iterations = 0u64;
    let mut stop = Termination::new(params);
    let result = (|| -> Result<StopReason, SearchError> {
        if let Some(reason) = stop.check(ev, 0) {
            return Ok(reason);
        }
        let theta0 = initialize(ev, better, start, params, rng)?;
        let mut ils = iterative_first_improvement(ev, better, theta0, rng)?;
        ev.log_iteration();
        loop {
            if let Some(reason) = stop.check(ev, iterations) {
                return Ok(reason);
            }
            iterations += 1;
            ev.set_iteration(iterations);
            let mut theta = ils.clone();
            for _ in 0..params.s {
                if let Some(next) = space.neighbors_ordered(&theta).choose(rng) {
                    theta = next.clone();
                }
            }
            theta = iterative_first_improvement(ev, better, theta, rng)?;
            if better.better(ev, &theta, &ils)? {
                ils = theta;
            }
            if rng.gen::<f64>() < params.p_restart {
                ils = space.sample_random(rng, params.max_rejections)?;
            }
            ev.log_iteration();
        }
    })();
    finish(ev, result, iterations)
}

/// Initialization plus a single descent; stops at the first local optimum.
pub fn simple_ls<R, B, G>(
    ev: &mut Evaluator<'_, R>,
    better: &mut B,
    start: Configuration,
    params: &SearchParams,
    rng: &mut G,
) -> Result<SearchOutcome, SearchError>
where
    R: TargetRunner,
    B: Better<R> + ?Sized,
    G: Rng + ?Sized,
{
    let mut stop = Termination::new(params);
    let result = (|| -> Result<StopReason, SearchError> {
        if let Some(reason) = stop.check(ev, 0) {
            return Ok(reason);
        }
        let theta0 = initialize(ev, better, start, params, rng)?;
        iterative_first_improvement(ev, better, theta0, rng)?;
        Ok(StopReason::Completed)
    })();
    finish(ev, result, 0)
}

/// Samples configurations uniformly and keeps one while it is not beaten
/// on the first `n` runs.
pub fn random_search<R, G>(
    ev: &mut Evaluator<'_, R>,
    n: usize,
    start: Configuration,
    params: &SearchParams,
    rng: &mut G,
) -> Result<SearchOutcome, SearchError>
where
    R: TargetRunner,
    G: Rng + ?Sized,
{
    let space = ev.space();
    let mut better = FixedN { n };
    let mut iterations = 0u64;
    let mut stop = Termination::new(params);
    let mut incumbent = start;
    let result = (|| -> Result<StopReason, SearchError> {
        loop {
            if let Some(reason) = stop.check(ev, iterations) {
                return Ok(reason);
            }
            iterations += 1;
            ev.set_iteration(iterations);
            let theta = space.sample_random(rng, params.max_rejections)?;
            if better.better(ev, &theta, &incumbent)? {
                incumbent = theta;
            }
            ev.log_iteration();
        }
    })();
    finish(ev, result, iterations)
}

/// Runs one of the four configurators from the evaluator's incumbent.
pub fn run_strategy<R, G>(
    ev: &mut Evaluator<'_, R>,
    strategy: Strategy,
    params: &SearchParams,
    rng: &mut G,
) -> Result<SearchOutcome, SearchError>
where
    R: TargetRunner,
    G: Rng + ?Sized,
{
    let start = ev.incumbent().clone();
    match strategy {
        Strategy::BasicIls { n } => paramils(ev, &mut FixedN { n }, start, params, rng),
        Strategy::FocusedIls => paramils(ev, &mut Focused::new(), start, params, rng),
        Strategy::RandomSearch { n } => random_search(ev, n, start, params, rng),
        Strategy::SimpleLs { n } => simple_ls(ev, &mut FixedN { n }, start, params, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocking::InstanceSeedList;
    use crate::objective::{Budget, Capping, ObjectiveSettings};
    use crate::run::Instance;
    use crate::space::ConfigurationSpace;
    use crate::surrogate::{SurrogateModel, SurrogateTarget};
    use alloc::format;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Never;

    impl<R> Better<R> for Never {
        fn better(&mut self, _: &mut Evaluator<'_, R>, _: &Configuration, _: &Configuration) -> Result<bool, EngineError> {
            Ok(false)
        }
    }

    fn one_param(effects: Vec<f64>) -> (ConfigurationSpace, SurrogateTarget) {
        let dom: Vec<String> = (0..effects.len()).map(|v| format!("v{v}")).collect();
        let space = ConfigurationSpace::parse(&format!("x {{{}}}[v0]\n", dom.join(","))).unwrap();
        let model = SurrogateModel::from_effects(1.0, vec![effects], vec![], 0.0, 0.0, 0);
        (space, SurrogateTarget::new(model))
    }

    use alloc::string::String;

    #[test]
    fn never_better_keeps_start() {
        let (space, target) = one_param(vec![3.0, 2.0, 1.0]);
        let inst = vec![Instance::new("a")];
        let start = space.default_configuration();
        let list = InstanceSeedList::build(1, 1, 0).unwrap();
        let mut ev = Evaluator::new(&space, &inst, target, list, ObjectiveSettings::new(5.0, 10.0, Capping::None), start.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = iterative_first_improvement(&mut ev, &mut Never, start.clone(), &mut rng).unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn descent_reaches_best_value() {
        let (space, target) = one_param(vec![3.0, 2.0, 1.0]);
        let inst = vec![Instance::new("a")];
        let start = space.default_configuration();
        let list = InstanceSeedList::build(1, 1, 0).unwrap();
        let mut ev = Evaluator::new(&space, &inst, target, list, ObjectiveSettings::new(5.0, 10.0, Capping::None), start.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = iterative_first_improvement(&mut ev, &mut FixedN { n: 1 }, start, &mut rng).unwrap();
        assert_eq!(out, space.configuration([("x", "v2")]).unwrap());
    }

    #[test]
    fn flat_landscape_terminates() {
        let (space, target) = one_param(vec![1.0; 4]);
        let inst = vec![Instance::new("a")];
        let start = space.default_configuration();
        let list = InstanceSeedList::build(1, 1, 0).unwrap();
        let mut ev = Evaluator::new(&space, &inst, target, list, ObjectiveSettings::new(5.0, 10.0, Capping::None), start.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = SearchParams { max_idle_iterations: 50, ..Default::default() };
        let out = paramils(&mut ev, &mut FixedN { n: 1 }, start, &params, &mut rng).unwrap();
        assert_eq!(out.stop, StopReason::Idle);
    }

    #[test]
    fn zero_budget_returns_start() {
        let (space, target) = one_param(vec![3.0, 2.0, 1.0]);
        let inst = vec![Instance::new("a")];
        let start = space.default_configuration();
        let list = InstanceSeedList::build(1, 1, 0).unwrap();
        let mut ev = Evaluator::new(&space, &inst, target, list, ObjectiveSettings::new(5.0, 10.0, Capping::None), start.clone())
            .with_budget(Budget { target_s: 0.0, wall_s: f64::INFINITY });
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = paramils(&mut ev, &mut Focused::new(), start.clone(), &SearchParams::default(), &mut rng).unwrap();
        assert_eq!(out.incumbent, start);
        assert_eq!(out.stop, StopReason::Budget);
        assert_eq!(ev.cache().executed_runs(), 0);
    }

    #[test]
    fn single_configuration_random_search() {
        let (space, target) = one_param(vec![1.0]);
        let inst = vec![Instance::new("a")];
        let start = space.default_configuration();
        let list = InstanceSeedList::build(1, 1, 0).unwrap();
        let mut ev = Evaluator::new(&space, &inst, target, list, ObjectiveSettings::new(5.0, 10.0, Capping::None), start.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = SearchParams { max_iterations: Some(20), ..Default::default() };
        let out = random_search(&mut ev, 1, start.clone(), &params, &mut rng).unwrap();
        assert_eq!(out.incumbent, start);
    }

    #[test]
    fn simple_ls_interrupted_returns_best_so_far() {
        let (space, target) = one_param(vec![3.0, 2.0, 1.5, 1.0]);
        let inst: Vec<Instance> = (0..4).map(|i| Instance::new(format!("i{i}"))).collect();
        let start = space.default_configuration();
        let list = InstanceSeedList::build(4, 4, 0).unwrap();
        let mut ev = Evaluator::new(&space, &inst, target, list, ObjectiveSettings::new(5.0, 10.0, Capping::None), start.clone())
            .with_budget(Budget { target_s: 25.0, wall_s: f64::INFINITY });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = SearchParams { r: 0, ..Default::default() };
        let out = simple_ls(&mut ev, &mut FixedN { n: 4 }, start.clone(), &params, &mut rng).unwrap();
        assert_eq!(out.stop, StopReason::Budget);
        assert_eq!(&out.incumbent, ev.incumbent());
        // the start alone costs 12 s, so whatever was returned has a full estimate
        assert!(ev.estimate(&out.incumbent, 4).unwrap() <= 3.0);
    }
}
