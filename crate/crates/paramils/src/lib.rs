//! File formats, the subprocess backend and the command line for the
//! `paramils-core` search engine.

pub mod cli;
pub mod driver;
pub mod error;
pub mod instances;
pub mod report;
pub mod scenario;
pub mod wrapper;

pub use error::{Error, Result};
