//! Pairwise comparison predicates.
//!
//! [`FixedN`] compares two configurations on the same first `N` blocked
//! runs. [`Focused`] grows the number of runs adaptively until one
//! configuration dominates the other and rewards winners with bonus runs.

use crate::error::EngineError;
use crate::objective::Evaluator;
use crate::run::TargetRunner;
use crate::space::Configuration;

/// Decides whether `candidate` should replace `reference`.
pub trait Better<R> {
    fn better(
        &mut self,
        ev: &mut Evaluator<'_, R>,
        candidate: &Configuration,
        reference: &Configuration,
    ) -> Result<bool, EngineError>;
}

/// `ĉ_N(θ1) ≤ ĉ_N(θ2)`, with `θ2` evaluated first and its estimate used as
/// the capping bound for `θ1`. Ties favour `θ1`.
pub fn better_n<R: TargetRunner>(
    ev: &mut Evaluator<'_, R>,
    first: &Configuration,
    second: &Configuration,
    n: usize,
) -> Result<bool, EngineError> {
    let c2 = ev.objective(second, n, f64::INFINITY)?;
    let c1 = ev.objective(first, n, c2.value)?;
    Ok(c1.not_worse_than(&c2))
}

/// `θ1` dominates `θ2` iff `N(θ1) ≥ N(θ2)` and `ĉ_{N(θ2)}(θ1) ≤ ĉ_{N(θ2)}(θ2)`.
pub fn dominates<R: TargetRunner>(
    ev: &mut Evaluator<'_, R>,
    first: &Configuration,
    second: &Configuration,
    bound: f64,
) -> Result<bool, EngineError> {
    let n1 = ev.n_runs(first);
    let n2 = ev.n_runs(second);
    if n1 < n2 {
        return Ok(false);
    }
    if n2 == 0 {
        return Ok(true);
    }
    let a = ev.objective(first, n2, bound)?;
    let b = ev.objective(second, n2, bound)?;
    Ok(a.not_worse_than(&b))
}

/// Which side dominates, from a single pair of evaluations at the smaller
/// run count. `Some(true)`: the first, `Some(false)`: the second.
fn domination<R: TargetRunner>(
    ev: &mut Evaluator<'_, R>,
    first: &Configuration,
    second: &Configuration,
    bound: f64,
) -> Result<Option<bool>, EngineError> {
    let n1 = ev.n_runs(first);
    let n2 = ev.n_runs(second);
    let (more, fewer, more_is_first) = if n1 >= n2 { (first, second, true) } else { (second, first, false) };
    let n = n1.min(n2);
    if n == 0 {
        return Ok(Some(more_is_first));
    }
    let a = ev.objective(more, n, bound)?;
    let b = ev.objective(fewer, n, bound)?;
    if a.not_worse_than(&b) {
        Ok(Some(more_is_first))
    } else if n1 == n2 {
        Ok(Some(!more_is_first))
    } else {
        Ok(None)
    }
}

/// BasicILS / RandomSearch comparison on a fixed number of runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedN {
    pub n: usize,
}

impl<R: TargetRunner> Better<R> for FixedN {
    fn better(
        &mut self,
        ev: &mut Evaluator<'_, R>,
        candidate: &Configuration,
        reference: &Configuration,
    ) -> Result<bool, EngineError> {
        better_n(ev, candidate, reference, self.n)
    }
}

/// FocusedILS comparison state: the bonus counter `B`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Focused {
    bonus: u64,
    last_iterations: usize,
}

impl Focused {
    pub fn new() -> Self {
        Self::default()
    }

    /// Configurations compared since the last improvement.
    pub fn bonus(&self) -> u64 {
        self.bonus
    }

    /// Loop iterations of the most recent comparison.
    pub fn last_iterations(&self) -> usize {
        self.last_iterations
    }

    /// Adds runs to whichever configuration has fewer, one at a time, until
    /// one dominates the other. Returns whether `first` dominates; a winning
    /// `first` then receives `B` bonus runs and `B` resets.
    ///
    /// The configuration with more runs is evaluated without a bound and its
    /// estimate bounds the other one and the domination checks. If the
    /// smaller side is stopped by its bound before reaching the new run
    /// count, the larger side wins outright; if the larger side is stopped
    /// (aggressive capping) while the smaller one completes, the smaller one
    /// wins. Either way every loop iteration that does not decide the
    /// comparison adds exactly one run to the smaller side.
    pub fn better_foc<R: TargetRunner>(
        &mut self,
        ev: &mut Evaluator<'_, R>,
        first: &Configuration,
        second: &Configuration,
    ) -> Result<bool, EngineError> {
        self.bonus += 1;
        let n1 = ev.n_runs(first);
        let n2 = ev.n_runs(second);
        let (min, max) = if n1 <= n2 {
            if n1 == n2 {
                self.bonus += 1;
            }
            (first, second)
        } else {
            (second, first)
        };
        let first_is_min = n1 <= n2;

        self.last_iterations = 0;
        let first_wins = loop {
            self.last_iterations += 1;
            let i = ev.n_runs(min) + 1;
            let c_max = ev.objective(max, i, f64::INFINITY)?;
            ev.objective(min, i, c_max.value)?;
            if ev.n_runs(min) < i {
                break !first_is_min;
            }
            if ev.n_runs(max) < i {
                break first_is_min;
            }
            if let Some(first_dominates) = domination(ev, first, second, c_max.value)? {
                break first_dominates;
            }
        };

        if first_wins {
            let target = ev.n_runs(first) + self.bonus as usize;
            ev.objective(first, target, f64::INFINITY)?;
            self.bonus = 0;
        }
        Ok(first_wins)
    }
}

impl<R: TargetRunner> Better<R> for Focused {
    fn better(
        &mut self,
        ev: &mut Evaluator<'_, R>,
        candidate: &Configuration,
        reference: &Configuration,
    ) -> Result<bool, EngineError> {
        self.better_foc(ev, candidate, reference)
    }
}
