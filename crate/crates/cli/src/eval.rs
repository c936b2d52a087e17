use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Subcommand};
use hpcoder::corpus::CompletionPair;
use hpcoder::metrics::{cut_table, evaluate_pragmas, perplexity, CutScore};
use hpcoder::ompdata::{normalize_pragma, read_loops, NormalizedPragma};
use hpcoder::parse::{parse_omp_pragma, FileId};
use hpcoder::report::{CompletionReport, EvalReport};
use hpcoder::tokompiler::TokenStream;
use serde::{Deserialize, Serialize};

use crate::{io, Ctx};

#[derive(Subcommand)]
pub enum EvalCommand {
    /// Clause presence, variable and operator tasks for generated pragmas
    Pragma(PragmaArgs),
    /// CodeBLEU of code completions per prefix length
    Codebleu(CompletionArgs),
    /// Perplexity of per-token log-probabilities
    Perplexity {
        /// JSONL: one array of natural-log probabilities per line, or `{"id":..,"logprobs":[..]}`
        logprobs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct PragmaArgs {
    /// JSONL predictions `{"id":..,"pragma":str|null}`
    #[arg(long)]
    pred: PathBuf,
    /// Labeled loop dataset
    #[arg(long)]
    label: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    completions: OptionalCompletions,
}

#[derive(Args)]
pub struct OptionalCompletions {
    /// Completion pairs, to add CodeBLEU per prefix cut to the report
    #[arg(long, requires = "completions")]
    pairs: Option<PathBuf>,
    /// JSONL completions `{"file_id":..,"name":..,"cut":..,"completion":str}`
    #[arg(long, requires = "pairs")]
    completions: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompletionArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    completions: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Deserialize)]
struct PredRecord {
    id: String,
    #[serde(default)]
    pragma: Option<String>,
}

#[derive(Deserialize)]
struct Completion {
    file_id: FileId,
    name: String,
    cut: usize,
    completion: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LogProbLine {
    Bare(Vec<f64>),
    Named { id: String, logprobs: Vec<f64> },
}

#[derive(Serialize)]
struct PerplexityReport {
    v: u32,
    sequences: Vec<SequencePerplexity>,
    /// Over all tokens of all sequences.
    corpus: f64,
}

#[derive(Serialize)]
struct SequencePerplexity {
    id: String,
    tokens: usize,
    perplexity: f64,
}

fn to_normalized(text: &str, id: &str) -> Option<NormalizedPragma> {
    let parsed = parse_omp_pragma(text).map_err(|e| e.to_string());
    match parsed.and_then(|p| normalize_pragma(&p).map_err(|e| e.to_string())) {
        Ok(n) => Some(n),
        Err(e) => {
            tracing::warn!("prediction for `{id}` counts as no pragma: {e}");
            None
        }
    }
}

fn score_completions(ctx: &Ctx, pairs: &Path, completions: &Path) -> anyhow::Result<Vec<CutScore>> {
    let pairs: Vec<CompletionPair> = io::read_jsonl(pairs)?;
    let completions: Vec<Completion> = io::read_jsonl(completions)?;
    let by_key: HashMap<(&str, &str, usize), &str> = completions
        .iter()
        .map(|c| ((c.file_id.as_str(), c.name.as_str(), c.cut), c.completion.as_str()))
        .collect();
    let mut cuts: Vec<usize> = pairs.iter().map(|p| p.cut).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut items = Vec::new();
    for p in &pairs {
        match by_key.get(&(p.file_id.as_str(), p.name.as_str(), p.cut)) {
            Some(c) => {
                let reference = TokenStream {
                    tokens: p.suffix_tokens.clone(),
                }
                .to_source();
                items.push((p.cut, c.to_string(), reference, p.lang));
            }
            None => tracing::warn!("no completion for {} `{}` at cut {}", p.file_id.as_str(), p.name, p.cut),
        }
    }
    Ok(cut_table(&items, &cuts, &ctx.config.eval.codebleu, ctx.jobs))
}

pub fn run(ctx: &Ctx, cmd: EvalCommand) -> anyhow::Result<()> {
    match cmd {
        EvalCommand::Pragma(a) => {
            let labels = read_loops(io::open(&a.label)?).with_context(|| a.label.display().to_string())?;
            let preds: Vec<PredRecord> = io::read_jsonl(&a.pred)?;
            let mut by_id: HashMap<&str, Option<&str>> = HashMap::new();
            for p in &preds {
                if by_id.insert(&p.id, p.pragma.as_deref()).is_some() {
                    bail!("duplicate prediction for `{}`", p.id);
                }
            }
            let items: Vec<_> = labels
                .iter()
                .map(|s| {
                    let pred = match by_id.get(s.id.as_str()) {
                        Some(Some(text)) => to_normalized(text, &s.id),
                        Some(None) => None,
                        None => {
                            tracing::warn!("no prediction for `{}`", s.id);
                            None
                        }
                    };
                    (s.id.clone(), pred, s.label.clone())
                })
                .collect();
            let codebleu = match (&a.completions.pairs, &a.completions.completions) {
                (Some(p), Some(c)) => score_completions(ctx, p, c)?,
                _ => Vec::new(),
            };
            let report = EvalReport {
                pragma: evaluate_pragmas(&items, ctx.config.eval.curve_max_lt),
                codebleu,
            };
            io::write_json(a.report.as_deref(), &report)
        }
        EvalCommand::Codebleu(a) => {
            let report = CompletionReport {
                v: hpcoder::SCHEMA_VERSION,
                cuts: score_completions(ctx, &a.pairs, &a.completions)?,
            };
            io::write_json(a.report.as_deref(), &report)
        }
        EvalCommand::Perplexity { logprobs, out } => {
            let lines: Vec<LogProbLine> = io::read_jsonl(&logprobs)?;
            let mut sequences = Vec::new();
            let mut all = Vec::new();
            for (i, l) in lines.into_iter().enumerate() {
                let (id, lp) = match l {
                    LogProbLine::Bare(v) => ((i + 1).to_string(), v),
                    LogProbLine::Named { id, logprobs } => (id, logprobs),
                };
                let ppl = perplexity(&lp).with_context(|| format!("sequence `{id}`"))?;
                sequences.push(SequencePerplexity {
                    id,
                    tokens: lp.len(),
                    perplexity: ppl,
                });
                all.extend(lp);
            }
            let corpus = perplexity(&all).context("no tokens")?;
            io::write_json(
                out.as_deref(),
                &PerplexityReport {
                    v: hpcoder::SCHEMA_VERSION,
                    sequences,
                    corpus,
                },
            )
        }
    }
}
