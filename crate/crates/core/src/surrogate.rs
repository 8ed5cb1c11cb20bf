//! Deterministic synthetic target algorithm.
//!
//! The runtime of configuration `θ` on instance `π` with seed `s` is
//!
//! ```text
//! base · Π effect(p, θ_p) · Π interaction · hardness(π) · noise(θ, π, s)
//! ```
//!
//! over the active parameters, where hardness and noise are lognormal and
//! every factor is a pure function of its inputs and the model seed. The
//! configuration-dependent part ([`SurrogateModel::config_factor`]) orders
//! configurations by their expected cost, which gives tests an exact
//! optimum to compare against.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::BackendError;
use crate::hash::{normal_from_key, Fnv1a};
use crate::run::{Instance, RunOutcome, TargetRunner};
use crate::space::{Configuration, ConfigurationSpace};

/// Knobs for randomly generated surrogate landscapes.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSpec {
    pub base: f64,
    /// log-scale spread of the per-value effects
    pub effect_sigma: f64,
    pub hardness_sigma: f64,
    pub noise_sigma: f64,
    /// number of pairwise value interactions
    pub interactions: usize,
    /// log-scale strength of the interactions; they always speed runs up,
    /// which creates local optima under one-exchange moves
    pub interaction_strength: f64,
    pub seed: u64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec {
            base: 1.0,
            effect_sigma: 0.5,
            hardness_sigma: 0.5,
            noise_sigma: 0.3,
            interactions: 0,
            interaction_strength: 1.0,
            seed: 0,
        }
    }
}

/// Multiplies the runtime by `factor` when both `(parameter, value)` pairs
/// are active and set.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    base: f64,
    effects: Vec<Vec<f64>>,
    interactions: Vec<Interaction>,
    hardness_sigma: f64,
    noise_sigma: f64,
    seed: u64,
}

impl SurrogateModel {
    /// Draws a landscape for `space` from `spec`.
    pub fn generate(space: &ConfigurationSpace, spec: &SurrogateSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let effects = space
            .parameters()
            .iter()
            .map(|p| {
                (0..p.domain().len())
                    .map(|_| libm::exp(spec.effect_sigma * standard_normal(&mut rng)))
                    .collect()
            })
            .collect();
        let mut interactions = Vec::new();
        let n = space.len();
        if n >= 2 {
            for _ in 0..spec.interactions {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let va = rng.gen_range(0..space.parameters()[a].domain().len());
                let vb = rng.gen_range(0..space.parameters()[b].domain().len());
                let strength = libm::fabs(standard_normal(&mut rng)) + 0.5;
                interactions.push(Interaction {
                    first: (a, va),
                    second: (b, vb),
                    factor: libm::exp(-spec.interaction_strength * strength),
                });
            }
        }
        SurrogateModel {
            base: spec.base,
            effects,
            interactions,
            hardness_sigma: spec.hardness_sigma,
            noise_sigma: spec.noise_sigma,
            seed: spec.seed,
        }
    }

    /// Explicit landscape: `effects[p][v]` multiplies the runtime when
    /// parameter `p` is active with value `v`.
    pub fn from_effects(
        base: f64,
        effects: Vec<Vec<f64>>,
        interactions: Vec<Interaction>,
        hardness_sigma: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Self {
        SurrogateModel { base, effects, interactions, hardness_sigma, noise_sigma, seed }
    }

    pub fn effects(&self) -> &[Vec<f64>] {
        &self.effects
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// Deterministic, instance-independent part of the runtime.
    pub fn config_factor(&self, space: &ConfigurationSpace, config: &Configuration) -> f64 {
        let active = space.active_mask(config.values());
        let mut f = self.base;
        for (p, effects) in self.effects.iter().enumerate() {
            if active[p] {
                f *= effects[config.value(p)];
            }
        }
        for it in &self.interactions {
            let hit = |(p, v): (usize, usize)| active[p] && config.value(p) == v;
            if hit(it.first) && hit(it.second) {
                f *= it.factor;
            }
        }
        f
    }

    pub fn hardness(&self, instance: &Instance) -> f64 {
        if self.hardness_sigma == 0.0 {
            return 1.0;
        }
        let mut h = Fnv1a::new();
        h.write_u64(self.seed);
        h.write(b"hardness");
        h.write(instance.name.as_bytes());
        libm::exp(self.hardness_sigma * normal_from_key(h.finish()))
    }

    pub fn noise(&self, config: &Configuration, instance: &Instance, seed: u32) -> f64 {
        if self.noise_sigma == 0.0 {
            return 1.0;
        }
        let mut h = Fnv1a::new();
        h.write_u64(self.seed);
        h.write(b"noise");
        h.write_u64(config.digest());
        h.write(instance.name.as_bytes());
        h.write_u32(seed);
        libm::exp(self.noise_sigma * normal_from_key(h.finish()))
    }

    /// Uncapped runtime of one run.
    pub fn true_runtime(
        &self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
    ) -> f64 {
        self.config_factor(space, config) * self.hardness(instance) * self.noise(config, instance, seed)
    }

    /// Outcome of a run under `captime`.
    pub fn outcome(
        &self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
        captime: f64,
    ) -> RunOutcome {
        let t = self.true_runtime(space, config, instance, seed);
        if t <= captime {
            RunOutcome::success(t)
        } else {
            RunOutcome::timeout(captime)
        }
    }
}

/// Runs the surrogate and charges `min(runtime, captime)` to a simulated clock.
#[derive(Debug, Clone)]
pub struct SurrogateTarget {
    model: SurrogateModel,
    clock: f64,
    runs: u64,
}

impl SurrogateTarget {
    pub fn new(model: SurrogateModel) -> Self {
        SurrogateTarget { model, clock: 0.0, runs: 0 }
    }

    pub fn model(&self) -> &SurrogateModel {
        &self.model
    }

    /// Simulated target seconds spent so far.
    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }
}

impl TargetRunner for SurrogateTarget {
    fn run(
        &mut self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
        captime: f64,
    ) -> Result<RunOutcome, BackendError> {
        if self.model.effects.len() != space.len()
            || self.model.effects.iter().zip(space.parameters()).any(|(e, p)| e.len() != p.domain().len())
        {
            return Err(BackendError::new("surrogate model does not match the configuration space"));
        }
        let out = self.model.outcome(space, config, instance, seed, captime);
        self.clock += out.cost;
        self.runs += 1;
        Ok(out)
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    normal_from_key(rng.next_u64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> ConfigurationSpace {
        ConfigurationSpace::parse("a {0,1,2}[0]\nb {0,1,2}[0]\n").unwrap()
    }

    #[test]
    fn flat_model_is_exactly_base() {
        let s = space();
        let m = SurrogateModel::from_effects(1.0, alloc::vec![alloc::vec![1.0; 3]; 2], Vec::new(), 0.0, 0.0, 3);
        for c in s.enumerate() {
            for i in 0..5 {
                let inst = Instance::new(alloc::format!("i{i}"));
                assert_eq!(m.true_runtime(&s, &c, &inst, 99), 1.0);
            }
        }
    }

    #[test]
    fn pure_function() {
        let s = space();
        let m = SurrogateModel::generate(&s, &SurrogateSpec { seed: 5, ..Default::default() });
        let c = s.configuration([("a", "2")]).unwrap();
        let inst = Instance::new("x");
        let a = m.outcome(&s, &c, &inst, 17, 3.0);
        let b = m.outcome(&s, &c, &inst, 17, 3.0);
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        assert_eq!(a.status, b.status);
    }

    #[test]
    fn clock_charges_capped_time() {
        let s = space();
        let m = SurrogateModel::from_effects(4.0, alloc::vec![alloc::vec![1.0; 3]; 2], Vec::new(), 0.0, 0.0, 0);
        let mut t = SurrogateTarget::new(m);
        let c = s.default_configuration();
        let inst = Instance::new("x");
        assert!(t.run(&s, &c, &inst, 0, 2.0).unwrap().status == crate::run::RunStatus::Timeout);
        assert!(t.run(&s, &c, &inst, 0, 5.0).unwrap().is_success());
        assert_eq!(t.clock(), 6.0);
    }

    #[test]
    fn interactions_apply_only_when_both_set() {
        let s = space();
        let it = Interaction { first: (0, 1), second: (1, 2), factor: 0.5 };
        let m = SurrogateModel::from_effects(1.0, alloc::vec![alloc::vec![1.0; 3]; 2], alloc::vec![it], 0.0, 0.0, 0);
        let both = s.configuration([("a", "1"), ("b", "2")]).unwrap();
        let one = s.configuration([("a", "1")]).unwrap();
        assert_eq!(m.config_factor(&s, &both), 0.5);
        assert_eq!(m.config_factor(&s, &one), 1.0);
    }
}
