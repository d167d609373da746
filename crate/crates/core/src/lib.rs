//! Semantic sketches: role-grouped, frequency-ranked profiles of predicate
//! senses built from role-labeled corpora, together with tooling for the
//! sketch-to-context matching task.
//!
//! The pipeline runs ingest → build → anonymize → dataset → match → score:
//!
//! * [`corpus`] reads dependency records and contexts;
//! * [`sketch`] turns records into sketches and hides their senses;
//! * [`dataset`] samples trial/dev/manual-dev splits with gold mappings;
//! * [`fill`] provides cloze and embedding models, built in or external;
//! * [`matchers`] implements the matching strategies;
//! * [`eval`] computes accuracy;
//! * [`render`] writes sketches as HTML tables.

pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fill;
pub mod matchers;
pub mod render;
pub mod sampling;
pub mod sketch;

pub use corpus::{Context, DependencyRecord, Dependent, Flag, Mapping, RoleLabel, SenseKey};
pub use error::{Error, Result};
pub use sketch::{Anonymized, BuildConfig, Filler, RoleSection, Sketch};
