//! File formats, pipeline stages and command-line front end for the
//! `stakeflow-core` stakeholder clustering engine.

pub mod cli;
pub mod config;
pub mod coverage_io;
pub mod error;
pub mod ontology_file;
pub mod pipeline;
pub mod records;
pub mod synthetic;

pub use config::{PartialConfig, ProviderKind, RunConfig};
pub use error::{Error, Result};
pub use stakeflow_core as core;
