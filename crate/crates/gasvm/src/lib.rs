//! File formats, configuration, sweep execution and CSV reports around
//! [`gasvm_core`].

pub mod cli;
pub mod config;
mod error;
pub mod parse;
pub mod reports;
pub mod runner;
pub mod store;
pub mod table1;

pub use error::{Error, Result};
pub use gasvm_core as core;
