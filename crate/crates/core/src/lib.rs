//! Climate index construction, crop-yield prediction and index-linked
//! weather-derivative pricing.
//!
//! The crate is organised as a pipeline:
//!
//! - [`ingest`]: load station, monthly, seasonal and yield files; aggregate
//!   months into meteorological seasons and states into regions.
//! - [`indices`]: degree days, rainfall totals and standardized anomalies.
//! - [`stats`]: rank correlation, Anderson–Darling, ADF, distribution fitting.
//! - [`preprocess`]: yield detrending, design matrices, PCA and FPCA.
//! - [`models`]: log-link GLM/GAM and boosted regression trees.
//! - [`evaluation`]: time-ordered cross-validation and the model matrix.
//! - [`pricing`]: burn analysis and index-modeling prices for call options.
//!
//! Batch work (model matrix cells, Monte Carlo calibration runs) fans out
//! through [`par`], which uses rayon when the `parallel` feature is on.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod indices;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod par;
pub mod preprocess;
pub mod pricing;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use par::Execution;
