//! Wrapper feature selection and hyperparameter search for RBF support vector
//! machines, driven by a real-coded genetic algorithm.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! documents, worker pools and the command-line front end live in the `gasvm`
//! companion crate.
//!
//! Module map:
//!
//! - [`data`]: drug-consumption records, decade-based binarization, predictor matrices
//! - [`folds`]: seeded stratified k-fold assignment
//! - [`svm`]: RBF kernel, SMO dual solver, confusion metrics
//! - [`ga`]: real-coded GA engine (rank selection, arithmetic crossover, uniform mutation, elitism)
//! - [`fitness`]: chromosome decoding and the weighted accuracy/feature-count score
//! - [`experiment`]: per-run execution, seed derivation and run records
//! - [`report`]: aggregations over run records (averages, frequencies, best models, curves, baseline)
//! - [`stats`]: Welch's t-test and the pairwise sensitivity matrix

#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;

pub mod data;
pub mod experiment;
pub mod fitness;
pub mod folds;
pub mod ga;
pub mod matrix;
pub mod report;
pub mod rng;
pub mod stats;
pub mod svm;

mod error;

pub use error::{Error, Result};
pub use matrix::Matrix;
