//! Offline assessment of configurations on held-out instances.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::BackendError;
use crate::run::{Instance, RunOutcome, TargetRunner};
use crate::space::{Configuration, ConfigurationSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct TestRun {
    pub instance: String,
    pub seed: u32,
    pub outcome: RunOutcome,
    /// penalized cost that enters the PAR
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub configuration: Configuration,
    pub train_par: Option<f64>,
    pub test_par: f64,
    pub runs: Vec<TestRun>,
    pub timeouts: usize,
    pub cutoff: f64,
    pub penalty: f64,
}

impl EvaluationReport {
    pub fn with_train_par(mut self, train_par: f64) -> Self {
        self.train_par = Some(train_par);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvaluationError {
    /// an instance appears in both the training and the test set
    Overlap { instance: String },
    EmptyTestSet,
    Backend(BackendError),
}

impl fmt::Display for EvaluationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvaluationError::Overlap { instance } => {
                write!(f, "instance `{instance}` is in both the training and the test set")
            }
            EvaluationError::EmptyTestSet => f.write_str("test set is empty"),
            EvaluationError::Backend(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for EvaluationError {}

impl From<BackendError> for EvaluationError {
    fn from(e: BackendError) -> Self {
        EvaluationError::Backend(e)
    }
}

/// One (instance, seed) pair per test instance. Pinned seeds are kept,
/// the rest are drawn from `rng`.
pub fn test_list<G: Rng + ?Sized>(
    instances: &[Instance],
    pinned: &[Option<u32>],
    rng: &mut G,
) -> Vec<(Instance, u32)> {
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let drawn = rng.gen::<u32>();
            (inst.clone(), pinned.get(i).copied().flatten().unwrap_or(drawn))
        })
        .collect()
}

/// Runs `config` once per test pair at the full cutoff and aggregates PAR-p.
pub fn test_performance<R: TargetRunner + ?Sized>(
    space: &ConfigurationSpace,
    config: &Configuration,
    train: &[Instance],
    test: &[(Instance, u32)],
    cutoff: f64,
    penalty: f64,
    runner: &mut R,
) -> Result<EvaluationReport, EvaluationError> {
    if test.is_empty() {
        return Err(EvaluationError::EmptyTestSet);
    }
    if let Some((inst, _)) = test.iter().find(|(t, _)| train.iter().any(|x| x.name == t.name)) {
        return Err(EvaluationError::Overlap { instance: inst.name.clone() });
    }
    let mut runs = Vec::with_capacity(test.len());
    for (inst, seed) in test {
        let mut outcome = runner.run(space, config, inst, *seed, cutoff)?;
        if outcome.is_success() && outcome.cost > cutoff {
            outcome = RunOutcome::timeout(cutoff);
        } else if !outcome.is_success() {
            outcome.cost = cutoff;
        }
        runs.push(TestRun {
            instance: inst.name.clone(),
            seed: *seed,
            outcome,
            cost: outcome.penalized(penalty, cutoff),
        });
    }
    let timeouts = runs.iter().filter(|r| !r.outcome.is_success()).count();
    let test_par = runs.iter().map(|r| r.cost).sum::<f64>() / runs.len() as f64;
    Ok(EvaluationReport {
        configuration: config.clone(),
        train_par: None,
        test_par,
        runs,
        timeouts,
        cutoff,
        penalty,
    })
}

/// Index of the run with the lowest training estimate; ties go to the
/// lower index and NaN never wins. `None` only for an empty slice.
pub fn select_best_of_k(train_estimates: &[f64]) -> Option<usize> {
    let key = |x: f64| if x.is_nan() { f64::INFINITY } else { x };
    let mut best: Option<usize> = None;
    for (i, &e) in train_estimates.iter().enumerate() {
        if best.is_none_or(|b| key(e) < key(train_estimates[b])) {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::RunStatus;
    use alloc::format;
    use alloc::vec;

    struct Fixed(Vec<RunOutcome>, usize);

    impl TargetRunner for Fixed {
        fn run(&mut self, _: &ConfigurationSpace, _: &Configuration, _: &Instance, _: u32, _: f64) -> Result<RunOutcome, BackendError> {
            self.1 += 1;
            Ok(self.0[self.1 - 1])
        }
    }

    fn setup(n: usize) -> (ConfigurationSpace, Vec<(Instance, u32)>) {
        let space = ConfigurationSpace::parse("a {0,1}[0]\n").unwrap();
        let test = (0..n).map(|i| (Instance::new(format!("t{i}")), i as u32)).collect();
        (space, test)
    }

    #[test]
    fn all_success() {
        let (space, test) = setup(4);
        let mut r = Fixed(vec![RunOutcome::success(1.0); 4], 0);
        let rep = test_performance(&space, &space.default_configuration(), &[], &test, 5.0, 10.0, &mut r).unwrap();
        assert_eq!(rep.test_par, 1.0);
        assert_eq!(rep.timeouts, 0);
    }

    #[test]
    fn half_timeouts() {
        let (space, test) = setup(4);
        let mut r = Fixed(
            vec![RunOutcome::timeout(5.0), RunOutcome::success(1.0), RunOutcome::timeout(5.0), RunOutcome::success(1.0)],
            0,
        );
        let rep = test_performance(&space, &space.default_configuration(), &[], &test, 5.0, 10.0, &mut r).unwrap();
        assert_eq!(rep.test_par, 25.5);
        assert_eq!(rep.timeouts, 2);
        assert_eq!(rep.runs[0].outcome.status, RunStatus::Timeout);
    }

    #[test]
    fn overlap_refused() {
        let (space, test) = setup(3);
        let mut r = Fixed(vec![], 0);
        let err = test_performance(&space, &space.default_configuration(), &[Instance::new("t1")], &test, 5.0, 10.0, &mut r)
            .unwrap_err();
        assert_eq!(err, EvaluationError::Overlap { instance: "t1".into() });
        assert_eq!(r.1, 0);
    }

    #[test]
    fn best_of_k() {
        assert_eq!(select_best_of_k(&[7.0]), Some(0));
        assert_eq!(select_best_of_k(&[3.0, 2.5, 4.1]), Some(1));
        assert_eq!(select_best_of_k(&[2.0, 2.0]), Some(0));
        assert_eq!(select_best_of_k(&[f64::NAN, 9.0]), Some(1));
        assert_eq!(select_best_of_k(&[]), None);
    }

    #[test]
    fn pinned_seeds_kept() {
        let inst = vec![Instance::new("a"), Instance::new("b")];
        let mut rng = rand_chacha::ChaCha8Rng::from_seed_u64(1);
        let list = test_list(&inst, &[None, Some(42)], &mut rng);
        assert_eq!(list[1].1, 42);
    }

    trait FromSeedU64 {
        fn from_seed_u64(s: u64) -> Self;
    }

    impl FromSeedU64 for rand_chacha::ChaCha8Rng {
        fn from_seed_u64(s: u64) -> Self {
            <Self as rand::SeedableRng>::seed_from_u64(s)
        }
    }
}
