use std::io::Write as _;
use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, Subcommand, ValueEnum};
use hpcoder::corpus::{
    build_corpus, completion_pairs, dedup, ingest, read_records, record_stats, SizeFilterLevel, COMPLETION_CUTS,
};
use hpcoder::ompdata::{clause_histogram, extract_dataset, ExtractOptions, LoopRecord};
use hpcoder::report::DatasetReport;

use crate::{io, Ctx};

#[derive(Subcommand)]
pub enum CorpusCommand {
    /// Ingest, deduplicate, filter and emit functions as JSONL
    Build(BuildArgs),
    /// Summarize a corpus JSONL file
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prefix/suffix completion pairs from a corpus JSONL file
    Pairs {
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = COMPLETION_CUTS)]
        cuts: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    File,
    Function,
}

#[derive(Args)]
pub struct BuildArgs {
    /// Source roots (default: paths.corpus_roots of the config)
    #[arg(long = "root")]
    roots: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the build statistics (default: stderr)
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Emit Tokompiler-anonymized functions
    #[arg(long)]
    anonymize: bool,
    /// Include the lexicalized token stream of each function
    #[arg(long)]
    emit_tokens: bool,
    #[arg(long)]
    min_tokens: Option<usize>,
    #[arg(long)]
    max_bytes: Option<usize>,
    #[arg(long, value_enum)]
    size_filter: Option<Level>,
}

#[derive(Subcommand)]
pub enum OmpdataCommand {
    /// Collect annotated (positive) and plain (negative) for loops
    Extract(ExtractArgs),
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Source roots
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// Sample negatives down to `neg_ratio` times the positives
    #[arg(long)]
    balance: bool,
    #[arg(long, default_value_t = 1.0)]
    neg_ratio: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the extraction report (default: stderr)
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn corpus(ctx: &Ctx, cmd: CorpusCommand) -> anyhow::Result<()> {
    match cmd {
        CorpusCommand::Build(a) => {
            let mut cfg = ctx.config.corpus_config();
            if !a.roots.is_empty() {
                cfg.roots = a.roots;
            }
            if cfg.roots.is_empty() {
                bail!("no corpus roots; pass --root or set paths.corpus_roots");
            }
            cfg.anonymize |= a.anonymize;
            cfg.emit_tokens |= a.emit_tokens;
            if let Some(m) = a.min_tokens {
                cfg.min_tokens = m;
            }
            if let Some(m) = a.max_bytes {
                cfg.max_bytes = m;
            }
            if let Some(l) = a.size_filter {
                cfg.size_filter = match l {
                    Level::File => SizeFilterLevel::File,
                    Level::Function => SizeFilterLevel::Function,
                };
            }
            let mut w = io::sink(a.out.as_deref())?;
            let stats = build_corpus(&cfg, ctx.jobs, &mut w)?;
            w.flush()?;
            drop(w);
            match a.stats {
                Some(p) => io::write_json(Some(&p), &stats),
                None => {
                    eprintln!("{}", serde_json::to_string_pretty(&stats)?);
                    Ok(())
                }
            }
        }
        CorpusCommand::Stats { corpus, out } => {
            let records = read_records(io::open(&corpus)?)?;
            io::write_json(out.as_deref(), &record_stats(&records))
        }
        CorpusCommand::Pairs { corpus, cuts, out } => {
            let records = read_records(io::open(&corpus)?)?;
            let pairs = completion_pairs(&records, &cuts);
            tracing::info!(records = records.len(), pairs = pairs.len(), "completion pairs");
            io::write_jsonl(out.as_deref(), &pairs)
        }
    }
}

pub fn ompdata(ctx: &Ctx, cmd: OmpdataCommand) -> anyhow::Result<()> {
    let OmpdataCommand::Extract(a) = cmd;
    if !(a.neg_ratio >= 0.0) {
        bail!("--neg-ratio must be non-negative");
    }
    let (files, dropped) = dedup(ingest(&a.inputs, &ctx.config.corpus.extensions));
    if dropped > 0 {
        tracing::info!(dropped, "duplicate files skipped");
    }
    let opts = ExtractOptions {
        balance: a.balance,
        neg_ratio: a.neg_ratio,
        seed: ctx.config.seed,
    };
    let ds = extract_dataset(&files, &opts, ctx.jobs);
    let records: Vec<LoopRecord> = ds.samples.iter().map(LoopRecord::from).collect();
    io::write_jsonl(a.out.as_deref(), &records)?;
    let report = DatasetReport {
        v: hpcoder::SCHEMA_VERSION,
        clauses: clause_histogram(&ds.samples),
        extract: ds.report,
    };
    match a.report {
        Some(p) => io::write_json(Some(&p), &report),
        None => {
            eprintln!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}
