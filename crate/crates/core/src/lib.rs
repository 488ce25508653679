//! Relative-belief Bayesian ROC analysis.

pub mod binormal;
pub mod config;
pub mod criterion;
pub mod discrete;
pub mod dp;
pub mod elicitation;
pub mod ingest;
pub mod engine;
pub mod error;
pub mod mc;
pub mod metrics;
pub mod prevalence;
pub mod rb;
pub mod registry;
pub mod report;
pub mod special;

pub use error::{Result, RocError};
