//! Non-neural machinery for HPC code language models.
//!
//! * [`parse`]: tree-sitter backed C/C++ parsing and the OpenMP pragma grammar.
//! * [`tokompiler`]: semantics-free anonymization of functions and lexicalized token streams.
//! * [`corpus`]: ingestion, deduplication, size filtering and JSONL emission of function corpora.
//! * [`ompdata`]: loop/pragma dataset extraction, pragma normalization and clause statistics.
//! * [`metrics`]: perplexity, CodeBLEU, pragma evaluation tasks, confusion rates, speedup buckets.
//! * [`harness`]: model clients, accuracy test, pragma injection, compile/run checks and scale tests.
//! * [`report`]: JSON report schemas and their table/CSV rendering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod ompdata;
pub mod parse;
pub mod report;
pub mod tokompiler;

pub use parse::{FileId, FunctionUnit, Language, Span};

/// Schema version written into every JSON and JSONL record.
pub const SCHEMA_VERSION: u32 = 1;
