//! Finite categorical configuration spaces.
//!
//! A space is a list of parameters with ordered value domains, optional
//! activation conditions (one per child parameter) and forbidden value
//! combinations. Configurations are stored in canonical form: every
//! parameter that is inactive under the current assignment holds its default
//! value, so two assignments that only differ in inactive parameters compare
//! equal and hash identically.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::SpaceError;

/// Default number of draws [`ConfigurationSpace::sample_random`] attempts
/// before declaring the space over-constrained.
pub const DEFAULT_MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    name: String,
    domain: Vec<String>,
    default: usize,
}

impl Parameter {
    pub fn new(name: impl Into<String>, domain: Vec<String>, default: &str) -> Result<Self, SpaceError> {
        let name = name.into();
        if domain.is_empty() {
            return Err(SpaceError::EmptyDomain { parameter: name, line: None });
        }
        for (i, v) in domain.iter().enumerate() {
            if domain[..i].contains(v) {
                return Err(SpaceError::DuplicateValue { parameter: name, value: v.clone(), line: None });
            }
        }
        let default = domain
            .iter()
            .position(|v| v == default)
            .ok_or_else(|| SpaceError::DefaultNotInDomain {
                parameter: name.clone(),
                value: default.to_string(),
                line: None,
            })?;
        Ok(Parameter { name, domain, default })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn default_index(&self) -> usize {
        self.default
    }

    pub fn default_value(&self) -> &str {
        &self.domain[self.default]
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

/// `child` is active iff `parent` is active and takes one of `activating` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub child: usize,
    pub parent: usize,
    pub activating: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenCombination {
    /// `(parameter index, value index)` pairs, at least two.
    pub assignments: Vec<(usize, usize)>,
}

/// A point of the space in canonical form.
///
/// Holds one value index per parameter, in parameter declaration order.
/// Equality, ordering and hashing all go through the canonical values, which
/// makes the configuration its own identity key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    values: Vec<u32>,
}

impl Configuration {
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn value(&self, param: usize) -> usize {
        self.values[param] as usize
    }

    /// Stable 64-bit digest of the canonical assignment (FNV-1a).
    pub fn digest(&self) -> u64 {
        let mut h = crate::hash::Fnv1a::new();
        for v in &self.values {
            h.write_u32(*v);
        }
        h.finish()
    }

    /// Short hexadecimal identifier used in logs and reports.
    pub fn id(&self) -> String {
        format!("{:016x}", self.digest())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationSpace {
    params: Vec<Parameter>,
    conditions: Vec<Condition>,
    forbidden: Vec<ForbiddenCombination>,
    /// index into `conditions` for each parameter that has one
    condition_of: Vec<Option<usize>>,
    /// parameters ordered so that parents precede children
    topo: Vec<usize>,
}

impl ConfigurationSpace {
    /// Builds and validates a space.
    pub fn new(
        params: Vec<Parameter>,
        conditions: Vec<Condition>,
        forbidden: Vec<ForbiddenCombination>,
    ) -> Result<Self, SpaceError> {
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(SpaceError::DuplicateParameter { name: p.name.clone(), line: None });
            }
        }
        let mut condition_of = vec![None; params.len()];
        for (ci, c) in conditions.iter().enumerate() {
            let (Some(child), Some(parent)) = (params.get(c.child), params.get(c.parent)) else {
                return Err(SpaceError::InvalidCondition {
                    message: "condition references a parameter index out of range".into(),
                });
            };
            if c.child == c.parent {
                return Err(SpaceError::CyclicConditions { parameter: child.name.clone() });
            }
            if c.activating.is_empty() || c.activating.iter().any(|&v| v >= parent.domain.len()) {
                return Err(SpaceError::InvalidCondition {
                    message: format!("activating values of `{}` are empty or out of range", child.name),
                });
            }
            if condition_of[c.child].replace(ci).is_some() {
                return Err(SpaceError::InvalidCondition {
                    message: format!("parameter `{}` has more than one condition", child.name),
                });
            }
        }
        for f in &forbidden {
            if f.assignments.len() < 2 {
                return Err(SpaceError::InvalidForbidden {
                    message: "a forbidden combination needs at least two assignments".into(),
                });
            }
            for &(p, v) in &f.assignments {
                if params.get(p).is_none_or(|q| v >= q.domain.len()) {
                    return Err(SpaceError::InvalidForbidden {
                        message: "forbidden combination references an unknown value".into(),
                    });
                }
            }
        }
        let topo = topological_order(&params, &conditions, &condition_of)?;
        let space = ConfigurationSpace { params, conditions, forbidden, condition_of, topo };
        let default: Vec<u32> = space.params.iter().map(|p| p.default as u32).collect();
        space.canonicalize(&default).map_err(|_| SpaceError::InfeasibleDefault)?;
        Ok(space)
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.params
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn forbidden(&self) -> &[ForbiddenCombination] {
        &self.forbidden
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Number of full assignments (product of domain sizes), saturating.
    pub fn assignment_count(&self) -> u128 {
        self.params
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.domain.len() as u128))
    }

    /// Activity flag per parameter for a full assignment.
    pub fn active_mask(&self, values: &[u32]) -> Vec<bool> {
        let mut active = vec![false; self.params.len()];
        for &p in &self.topo {
            active[p] = match self.condition_of[p] {
                None => true,
                Some(ci) => {
                    let c = &self.conditions[ci];
                    active[c.parent] && c.activating.contains(&(values[c.parent] as usize))
                }
            };
        }
        active
    }

    /// Names of the parameters active in `config`, in declaration order.
    pub fn active_params(&self, config: &Configuration) -> Vec<&str> {
        self.active_mask(&config.values)
            .iter()
            .zip(&self.params)
            .filter(|(a, _)| **a)
            .map(|(_, p)| p.name.as_str())
            .collect()
    }

    /// Resets inactive parameters to their defaults and checks the forbidden
    /// combinations over the active ones.
    pub fn canonicalize(&self, values: &[u32]) -> Result<Configuration, SpaceError> {
        if values.len() != self.params.len() {
            return Err(SpaceError::InvalidAssignment {
                message: format!("expected {} values, got {}", self.params.len(), values.len()),
            });
        }
        for (p, &v) in self.params.iter().zip(values) {
            if v as usize >= p.domain.len() {
                return Err(SpaceError::InvalidAssignment {
                    message: format!("value index {v} out of range for `{}`", p.name),
                });
            }
        }
        let active = self.active_mask(values);
        let canonical: Vec<u32> = values
            .iter()
            .zip(&self.params)
            .zip(&active)
            .map(|((&v, p), &a)| if a { v } else { p.default as u32 })
            .collect();
        if let Some(i) = self.violated(&canonical, &active) {
            return Err(SpaceError::Forbidden { combination: self.describe_forbidden(i) });
        }
        Ok(Configuration { values: canonical })
    }

    fn violated(&self, values: &[u32], active: &[bool]) -> Option<usize> {
        self.forbidden.iter().position(|f| {
            f.assignments
                .iter()
                .all(|&(p, v)| active[p] && values[p] as usize == v)
        })
    }

    fn describe_forbidden(&self, i: usize) -> String {
        let parts: Vec<String> = self.forbidden[i]
            .assignments
            .iter()
            .map(|&(p, v)| format!("{}={}", self.params[p].name, self.params[p].domain[v]))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn default_configuration(&self) -> Configuration {
        let values: Vec<u32> = self.params.iter().map(|p| p.default as u32).collect();
        self.canonicalize(&values).expect("default validated at construction")
    }

    /// Starts from the defaults and applies `(name, value)` overrides.
    pub fn configuration<'a, I>(&self, assignment: I) -> Result<Configuration, SpaceError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut values: Vec<u32> = self.params.iter().map(|p| p.default as u32).collect();
        for (name, value) in assignment {
            let p = self.param_index(name).ok_or_else(|| SpaceError::UnknownParameter {
                name: name.to_string(),
                line: None,
            })?;
            let v = self.params[p].value_index(value).ok_or_else(|| SpaceError::UnknownValue {
                parameter: name.to_string(),
                value: value.to_string(),
                line: None,
            })?;
            values[p] = v as u32;
        }
        self.canonicalize(&values)
    }

    /// `(name, value)` pairs of the active parameters, sorted by name.
    pub fn active_assignment<'s>(&'s self, config: &Configuration) -> Vec<(&'s str, &'s str)> {
        let active = self.active_mask(&config.values);
        let mut out: Vec<(&str, &str)> = self
            .params
            .iter()
            .enumerate()
            .filter(|(i, _)| active[*i])
            .map(|(i, p)| (p.name.as_str(), p.domain[config.value(i)].as_str()))
            .collect();
        out.sort_unstable();
        out
    }

    /// All parameters with their values, declaration order.
    pub fn full_assignment<'s>(&'s self, config: &Configuration) -> Vec<(&'s str, &'s str)> {
        self.params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), p.domain[config.value(i)].as_str()))
            .collect()
    }

    /// Human-readable `name=value` listing of the active parameters.
    pub fn describe(&self, config: &Configuration) -> String {
        let parts: Vec<String> = self
            .active_assignment(config)
            .into_iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        parts.join(" ")
    }

    /// One-exchange neighbourhood in a random order.
    ///
    /// Only active parameters are changed, every neighbour is canonicalized,
    /// infeasible ones are dropped and duplicates removed.
    pub fn neighbors<R: Rng + ?Sized>(&self, config: &Configuration, rng: &mut R) -> Vec<Configuration> {
        let mut out = self.neighbors_ordered(config);
        out.shuffle(rng);
        out
    }

    /// Neighbourhood in deterministic (parameter, value) order.
    pub fn neighbors_ordered(&self, config: &Configuration) -> Vec<Configuration> {
        let active = self.active_mask(&config.values);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut values = config.values.clone();
        for (p, param) in self.params.iter().enumerate() {
            if !active[p] {
                continue;
            }
            let current = values[p];
            for v in 0..param.domain.len() as u32 {
                if v == current {
                    continue;
                }
                values[p] = v;
                if let Ok(n) = self.canonicalize(&values) {
                    if n != *config && seen.insert(n.clone()) {
                        out.push(n);
                    }
                }
            }
            values[p] = current;
        }
        out
    }

    /// Draws every parameter uniformly and independently, canonicalizes and
    /// rejects infeasible draws.
    ///
    /// The draw is uniform over full assignments, so equivalence classes
    /// that absorb many inactive assignments are sampled proportionally more
    /// often.
    pub fn sample_random<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        max_rejections: usize,
    ) -> Result<Configuration, SpaceError> {
        let mut values = vec![0u32; self.params.len()];
        for _ in 0..max_rejections.max(1) {
            for (slot, p) in values.iter_mut().zip(&self.params) {
                *slot = rng.gen_range(0..p.domain.len() as u32);
            }
            if let Ok(c) = self.canonicalize(&values) {
                return Ok(c);
            }
        }
        Err(SpaceError::RejectionLimit { attempts: max_rejections.max(1) })
    }

    /// Enumerates every distinct feasible canonical configuration.
    ///
    /// Intended for small spaces; cost is the product of domain sizes.
    pub fn enumerate(&self) -> Vec<Configuration> {
        let mut out = BTreeSet::new();
        let mut values = vec![0u32; self.params.len()];
        loop {
            if let Ok(c) = self.canonicalize(&values) {
                out.insert(c);
            }
            let mut p = 0;
            loop {
                if p == values.len() {
                    return out.into_iter().collect();
                }
                values[p] += 1;
                if (values[p] as usize) < self.params[p].domain.len() {
                    break;
                }
                values[p] = 0;
                p += 1;
            }
        }
    }

    /// Parses the line-oriented space format.
    pub fn parse(text: &str) -> Result<Self, SpaceError> {
        crate::space_format::parse(text)
    }
}

/// Serializes to the line-oriented space format accepted by [`ConfigurationSpace::parse`].
impl fmt::Display for ConfigurationSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.params {
            writeln!(f, "{} {{{}}}[{}]", p.name, p.domain.join(","), p.default_value())?;
        }
        for c in &self.conditions {
            let parent = &self.params[c.parent];
            let vals: Vec<&str> = c.activating.iter().map(|&v| parent.domain[v].as_str()).collect();
            writeln!(f, "{} | {} in {{{}}}", self.params[c.child].name, parent.name, vals.join(","))?;
        }
        for fc in &self.forbidden {
            let parts: Vec<String> = fc
                .assignments
                .iter()
                .map(|&(p, v)| format!("{}={}", self.params[p].name, self.params[p].domain[v]))
                .collect();
            writeln!(f, "{{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}

fn topological_order(
    params: &[Parameter],
    conditions: &[Condition],
    condition_of: &[Option<usize>],
) -> Result<Vec<usize>, SpaceError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; params.len()];
    let mut order = Vec::with_capacity(params.len());
    for start in 0..params.len() {
        let mut chain = Vec::new();
        let mut p = start;
        // follow the parent chain (each parameter has at most one parent)
        loop {
            match state[p] {
                2 => break,
                1 => return Err(SpaceError::CyclicConditions { parameter: params[p].name.clone() }),
                _ => {}
            }
            state[p] = 1;
            chain.push(p);
            match condition_of[p] {
                Some(ci) => p = conditions[ci].parent,
                None => break,
            }
        }
        for &q in chain.iter().rev() {
            state[q] = 2;
            order.push(q);
        }
    }
    Ok(order)
}
