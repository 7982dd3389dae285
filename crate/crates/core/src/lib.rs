//! Curation and evaluation primitives for ambiguous visual questions.
//!
//! The crate covers the offline half of the workbench: loading VQA data,
//! prioritizing likely-ambiguous examples, agreement metrics, the
//! clustering harness and text/statistics metrics, and lexically
//! constrained decoding.

pub mod agreement;
pub mod clustering;
pub mod corpus;
pub mod decode;
pub mod embeddings;
pub mod eval;
