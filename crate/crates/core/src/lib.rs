//! Tests whether text-generation evaluation metrics are robust to, and aware
//! of, dialect variation.
//!
//! The crate covers the whole loop: dataset ingestion ([`dataset`]), native
//! lexical metrics and external-metric adapters ([`metrics`]), construction of
//! the dialect / perturb / MT conditions ([`conditions`]), the statistics
//! battery ([`stats`]), dialect-tagged acceptability data construction
//! ([`nano`]), and report generation ([`report`], [`app`]).

pub mod app;
pub mod conditions;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod model;
pub mod nano;
pub mod report;
pub mod stats;
pub mod text;

pub use error::{Error, Result};
pub use model::{Condition, ConditionKind, DialectTag, MicroExample, PerturbationKind, Region, ScoreRecord, SentenceExample};
