//! Iterated local search over categorical, conditional parameter spaces,
//! with adaptive capping of target-algorithm runs.
//!
//! The crate is `no_std` (it needs `alloc`). Target algorithms are reached
//! through [`TargetRunner`]; a deterministic synthetic target lives in
//! [`surrogate`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod blocking;
pub mod compare;
pub mod error;
pub mod evaluation;
mod hash;
pub mod objective;
pub mod rng;
pub mod run;
pub mod search;
pub mod space;
mod space_format;
pub mod stats;
pub mod surrogate;

pub use blocking::InstanceSeedList;
pub use compare::{Better, FixedN, Focused};
pub use error::{BackendError, EngineError, SpaceError};
pub use objective::{Budget, Capping, CostEstimate, Evaluator, ObjectiveSettings};
pub use run::{Instance, RunOutcome, RunRecord, RunStatus, TargetRunner};
pub use search::{SearchOutcome, SearchParams, Strategy};
pub use space::{Configuration, ConfigurationSpace, Parameter};
