//! Evaluation mathematics: perplexity, CodeBLEU, the pragma evaluation tasks,
//! confusion rates and speedup buckets.

mod codebleu;
mod confusion;
mod dataflow;
mod pragma_eval;
mod speedup;

pub use codebleu::{codebleu, completion_table, cut_table, CodeBleuConfig, CodeBleuScore, CutScore};
pub use confusion::{aggregate_confusion, ConfusionCounts, ConfusionReport, Outcome, Rate};
pub use dataflow::{dataflow_edges, DataflowEdge, Relation};
pub use pragma_eval::{
    clause_presence_eval, evaluate_pragmas, reduction_operator_eval, variable_curve,
    variable_set_eval, ClauseKind, CurvePoint, OperatorTally, PragmaEvalReport, VariableMatchResult,
};
pub use speedup::{bucket_histogram, bucket_speedup, SpeedupBucket};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("empty log-probability sequence")]
    EmptySequence,
    #[error("log-probability {0} is positive")]
    PositiveLogProb(f64),
    #[error("speedup {0} is not positive")]
    NonPositive(f64),
    #[error("reduction operator missing on the {0} side")]
    MissingOperand(&'static str),
    #[error("nothing to score: {0}")]
    TokenizeFailure(String),
}

/// `exp(-mean(logprobs))` for natural-log token probabilities.
pub fn perplexity(logprobs: &[f64]) -> Result<f64, MetricsError> {
    if logprobs.is_empty() {
        return Err(MetricsError::EmptySequence);
    }
    // running mean stays exact for constant sequences
    let mut mean = 0.0;
    for (k, &lp) in logprobs.iter().enumerate() {
        if lp > 0.0 || lp.is_nan() {
            return Err(MetricsError::PositiveLogProb(lp));
        }
        mean += (lp - mean) / (k + 1) as f64;
    }
    Ok((-mean).exp())
}
