//! Auto-parallelization evaluation: model queries, the accuracy test, pragma
//! injection, compile-and-run verification and the thread-scaling sweep.

mod accuracy;
mod bench;
mod heuristic;
mod inject;
mod model;
mod scale;

pub use accuracy::{accuracy_test, reclassify_fp, AccuracyReport, SampleRecord};
pub use bench::{
    compile_and_run, outputs_match, BenchmarkSpec, BenchmarkSuite, Compare, ExpectedOutput, RunOutcome, Verdict,
};
pub use heuristic::{analyze_loop, HeuristicModel};
pub use inject::{inject_many, inject_pragma};
pub use model::{
    model_from_spec, predict, Classification, HttpModel, ModelEndpoint, ModelPrediction, OfflineModel,
    OfflinePrediction, ReplayModel, GENERATION_PROMPT,
};
pub use scale::{
    patch_sources, patch_suite, run_suite, scale_test, spearman, verify_edits, BenchmarkRuns, PragmaEdit, ScaleReport,
    Sources, ThreadRun, ThreadSummary, DEFAULT_THREADS,
};

use crate::parse::Span;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("model endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("invalid generated pragma `{pragma}`: {reason}")]
    InvalidGeneration { pragma: String, reason: String },
    #[error("no prediction for sample `{0}`")]
    MissingPrediction(String),
    #[error("span {0:?} no longer points at a for loop")]
    SpanDrift(Span),
    #[error("false positive `{0}` has no compile-and-run verdict")]
    MissingVerdict(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("toolchain unavailable: {0}")]
    Toolchain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
