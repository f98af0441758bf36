//! Top-k keyword benchmark toolkit.
//!
//! - [`corpus`]: tweet model, JSON-Lines storage, seeded generator
//! - [`preprocess`]: raw text to lemma statistics
//! - [`scoring`]: TF-IDF and Okapi BM25
//! - [`engine`]: relational and document layouts executing Q1–Q4
//! - [`qcompile`]: SQL and map-reduce plan emitters plus a reference adapter
//! - [`bench`]: the warm-run timing protocol and reports

pub mod bench;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod preprocess;
pub mod qcompile;
pub mod rng;
pub mod scoring;

pub use error::{Error, Result};
