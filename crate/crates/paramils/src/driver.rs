//! Glue between a loaded scenario and the search engine.

use std::collections::HashMap;
use std::time::Instant;

use paramils_core::error::BackendError;
use paramils_core::evaluation::{test_list, test_performance, EvaluationError, EvaluationReport};
use paramils_core::objective::{Clock, Evaluator, TrajectoryEntry};
use paramils_core::rng::derive_rngs;
use paramils_core::run::RunOutcome;
use paramils_core::search::{run_strategy, SearchOutcome};
use paramils_core::surrogate::{SurrogateModel, SurrogateTarget};
use paramils_core::{Configuration, ConfigurationSpace, Instance, InstanceSeedList, TargetRunner};

use crate::error::{Error, Result};
use crate::instances::InstanceSet;
use crate::scenario::{BackendSpec, Scenario};
use crate::wrapper::WrapperRunner;

pub enum Backend {
    Surrogate(SurrogateTarget),
    Wrapper(WrapperRunner),
}

impl TargetRunner for Backend {
    fn run(
        &mut self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
        captime: f64,
    ) -> std::result::Result<RunOutcome, BackendError> {
        match self {
            Backend::Surrogate(t) => t.run(space, config, instance, seed, captime),
            Backend::Wrapper(w) => w.run(space, config, instance, seed, captime),
        }
    }
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn elapsed_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// A validated scenario with its space and instance lists loaded.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub scenario: Scenario,
    pub space: ConfigurationSpace,
    pub train: InstanceSet,
    pub test: Option<InstanceSet>,
    /// the scenario seed, or one drawn from the system clock
    pub master_seed: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub index: usize,
    pub seed: u64,
    pub outcome: SearchOutcome,
    pub train_par: f64,
    pub train_runs: usize,
    pub trajectory: Vec<TrajectoryEntry>,
    pub target_s: f64,
    pub executed_runs: u64,
    pub test: Option<EvaluationReport>,
}

impl Inputs {
    pub fn load(scenario: Scenario) -> Result<Self> {
        let space = scenario.load_space()?;
        let train = scenario.load_train()?;
        let test = scenario.load_test()?;
        if let Some(test) = &test {
            if let Some(inst) = test.overlap_with(&train) {
                return Err(EvaluationError::Overlap { instance: inst.name.clone() }.into());
            }
        }
        let master_seed = scenario.seed.unwrap_or_else(|| {
            let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap_or_default();
            now.as_nanos() as u64
        });
        Ok(Inputs { scenario, space, train, test, master_seed })
    }

    /// Seed of run `index`: the master seed plus the index.
    pub fn run_seed(&self, index: usize) -> u64 {
        self.master_seed.wrapping_add(index as u64)
    }

    /// A fresh backend. The surrogate landscape depends on the scenario's
    /// seed only, never on the run index, so all runs face the same target.
    pub fn backend(&self) -> Backend {
        match &self.scenario.backend {
            BackendSpec::Surrogate(settings) => {
                let mut spec = settings.spec.clone();
                spec.seed = settings.seed.unwrap_or_else(|| derive_rngs(self.master_seed).surrogate_seed);
                Backend::Surrogate(SurrogateTarget::new(SurrogateModel::generate(&self.space, &spec)))
            }
            BackendSpec::Wrapper(words) => {
                let mut command = words.clone();
                if command[0].contains('/') {
                    command[0] = self.scenario.resolve(&command[0]).display().to_string();
                }
                let mut paths = HashMap::new();
                for set in std::iter::once(&self.train).chain(self.test.as_ref()) {
                    for (inst, path) in set.instances.iter().zip(&set.paths) {
                        paths.insert(inst.name.clone(), path.clone());
                    }
                }
                Backend::Wrapper(WrapperRunner::new(command, paths))
            }
        }
    }

    /// Test pairs shared by every run of this scenario.
    pub fn test_pairs(&self) -> Option<Vec<(Instance, u32)>> {
        let test = self.test.as_ref()?;
        Some(test_list(&test.instances, &test.seeds, &mut derive_rngs(self.master_seed).evaluation))
    }

    /// One configurator run with seed `run_seed(index)`, followed by a test
    /// evaluation of its incumbent when a test set is given.
    pub fn configure_run(&self, index: usize) -> Result<RunResult> {
        let seed = self.run_seed(index);
        let mut streams = derive_rngs(seed);
        let list = InstanceSeedList::with_fixed_seeds(self.train.seeds.clone(), streams.blocking, streams.target_seeds)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let backend = self.backend();
        let wrapper = matches!(backend, Backend::Wrapper(_));
        let start = self.space.default_configuration();
        let mut ev = Evaluator::new(
            &self.space,
            &self.train.instances,
            backend,
            list,
            self.scenario.objective_settings(),
            start,
        )
        .with_budget(self.scenario.budget());
        if wrapper {
            ev = ev.with_clock(Box::new(WallClock(Instant::now())));
        }
        let outcome = run_strategy(&mut ev, self.scenario.strategy(), &self.scenario.search_params(), &mut streams.search)?;
        let train_par = ev.incumbent_estimate().unwrap_or(f64::NAN);
        let train_runs = ev.n_runs(&outcome.incumbent);
        let trajectory = ev.trajectory().to_vec();
        let target_s = ev.consumed();
        let executed_runs = ev.cache().executed_runs();
        let test = match self.test_pairs() {
            Some(pairs) => {
                let mut runner = ev.into_runner();
                Some(self.test_with(&outcome.incumbent, &pairs, &mut runner)?.with_train_par(train_par))
            }
            None => None,
        };
        Ok(RunResult { index, seed, outcome, train_par, train_runs, trajectory, target_s, executed_runs, test })
    }

    /// `k` independent runs, one thread each.
    pub fn configure(&self, k: usize) -> Result<Vec<RunResult>> {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..k).map(|i| scope.spawn(move || self.configure_run(i))).collect();
            handles.into_iter().map(|h| h.join().expect("configurator run panicked")).collect()
        })
    }

    fn test_with(&self, config: &Configuration, pairs: &[(Instance, u32)], runner: &mut Backend) -> Result<EvaluationReport> {
        Ok(test_performance(
            &self.space,
            config,
            &self.train.instances,
            pairs,
            self.scenario.cutoff_time,
            self.scenario.penalty,
            runner,
        )?)
    }

    /// Test performance of `config` with a fresh backend.
    pub fn evaluate(&self, config: &Configuration) -> Result<EvaluationReport> {
        let pairs = self
            .test_pairs()
            .ok_or_else(|| Error::Invalid("scenario has no `test_instances`".into()))?;
        self.test_with(config, &pairs, &mut self.backend())
    }
}
