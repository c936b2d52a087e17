use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Subcommand};
use hpcoder::exec::map_ordered;
use hpcoder::harness::{
    accuracy_test, model_from_spec, patch_suite, predict, reclassify_fp, run_suite, scale_test, verify_edits,
    BenchmarkSuite, HttpModel, ModelEndpoint, PragmaEdit, Sources,
};
use hpcoder::metrics::Outcome;
use hpcoder::ompdata::{read_loops, LoopSample};

use crate::{io, Ctx};

#[derive(Subcommand)]
pub enum HarnessCommand {
    /// Compare model decisions with the dataset labels
    Accuracy(AccuracyArgs),
    /// Compile and run benchmarks (optionally with predicted pragmas) per thread count
    Run(RunArgs),
    /// Like `run`, plus a default-environment baseline and speedup buckets
    Scale(RunArgs),
}

#[derive(Args)]
pub struct AccuracyArgs {
    /// Labeled loop dataset
    #[arg(long)]
    loops: PathBuf,
    /// `http(s)://…`, `offline:<preds.jsonl>`, `builtin:replay` or `builtin:heuristic`
    #[arg(long)]
    model: String,
    /// Benchmark suite used to re-check false positives by compile-and-run
    #[arg(long)]
    bench: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunArgs {
    /// Benchmark suite (default: paths.benchmarks of the config)
    #[arg(long)]
    bench: Option<PathBuf>,
    /// OMP_NUM_THREADS values
    #[arg(long, value_delimiter = ',')]
    threads: Vec<usize>,
    /// Loop dataset whose benchmark loops get predicted pragmas
    #[arg(long, requires = "model")]
    loops: Option<PathBuf>,
    #[arg(long, requires = "loops")]
    model: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn model(ctx: &Ctx, spec: &str) -> anyhow::Result<Box<dyn ModelEndpoint>> {
    let h = &ctx.config.harness;
    let timeout = Duration::from_secs_f64(h.model_timeout_s);
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Box::new(
            HttpModel::new(spec, timeout).with_retries(h.model_retries, Duration::from_millis(200)),
        ));
    }
    Ok(model_from_spec(spec, timeout)?)
}

fn suite(ctx: &Ctx, path: Option<&Path>) -> anyhow::Result<BenchmarkSuite> {
    let Some(path) = path.or(ctx.config.paths.benchmarks.as_deref()) else {
        bail!("no benchmark suite; pass --bench or set paths.benchmarks");
    };
    let mut s = BenchmarkSuite::load(path)?;
    ctx.config.toolchain.apply(&mut s);
    Ok(s)
}

fn loops(path: &Path) -> anyhow::Result<Vec<LoopSample>> {
    let samples = read_loops(io::open(path)?).with_context(|| path.display().to_string())?;
    if samples.is_empty() {
        bail!("{} has no loops", path.display());
    }
    Ok(samples)
}

/// Predicted pragma for every dataset loop that points into a benchmark.
fn predicted_edits(ctx: &Ctx, samples: &[LoopSample], model: &dyn ModelEndpoint) -> Vec<PragmaEdit> {
    let sited: Vec<&LoopSample> = samples.iter().filter(|s| s.benchmark_ref.is_some()).collect();
    let preds = map_ordered(&sited, ctx.jobs, |s| predict(model, s));
    sited
        .iter()
        .zip(preds)
        .map(|(s, p)| PragmaEdit {
            site: s.benchmark_ref.clone().expect("filtered"),
            pragma: match p {
                Ok(p) => p.pragma,
                Err(e) => {
                    tracing::warn!("`{}` left without pragma: {e}", s.id);
                    None
                }
            },
        })
        .collect()
}

fn sources(ctx: &Ctx, suite: &BenchmarkSuite, a: &RunArgs) -> anyhow::Result<Vec<Sources>> {
    let edits = match (&a.loops, &a.model) {
        (Some(l), Some(m)) => {
            let m = model(ctx, m)?;
            predicted_edits(ctx, &loops(l)?, m.as_ref())
        }
        _ => Vec::new(),
    };
    let (patched, applied) = patch_suite(suite, &edits)?;
    if applied < edits.len() {
        tracing::warn!("{} of {} predicted loops are not in the suite", edits.len() - applied, edits.len());
    }
    Ok(patched)
}

pub fn run(ctx: &Ctx, cmd: HarnessCommand) -> anyhow::Result<()> {
    match cmd {
        HarnessCommand::Accuracy(a) => {
            let samples = loops(&a.loops)?;
            let m = model(ctx, &a.model)?;
            let mut report = accuracy_test(&samples, m.as_ref(), ctx.jobs);
            if let Some(bench) = &a.bench {
                let suite = suite(ctx, Some(bench))?;
                let by_id: HashMap<&str, &LoopSample> = samples.iter().map(|s| (s.id.as_str(), s)).collect();
                let edits: Vec<(String, PragmaEdit)> = report
                    .samples
                    .iter()
                    .filter(|r| r.outcome == Outcome::FP)
                    .filter_map(|r| {
                        let site = by_id.get(r.id.as_str())?.benchmark_ref.clone()?;
                        Some((r.id.clone(), PragmaEdit { site, pragma: r.pragma.clone() }))
                    })
                    .collect();
                let verdicts = verify_edits(&suite, &edits, ctx.config.harness.verify_threads)?;
                report = reclassify_fp(&report, &verdicts)?;
            }
            io::write_json(a.out.as_deref(), &report)
        }
        HarnessCommand::Run(a) | HarnessCommand::Scale(a) if a.threads.contains(&0) => {
            bail!("thread counts must be positive")
        }
        HarnessCommand::Run(a) => {
            let suite = suite(ctx, a.bench.as_deref())?;
            let threads = if a.threads.is_empty() { ctx.config.harness.threads.clone() } else { a.threads.clone() };
            let report = run_suite(&suite, &sources(ctx, &suite, &a)?, &threads)?;
            io::write_json(a.out.as_deref(), &report)
        }
        HarnessCommand::Scale(a) => {
            let suite = suite(ctx, a.bench.as_deref())?;
            let threads = if a.threads.is_empty() { ctx.config.harness.threads.clone() } else { a.threads.clone() };
            let report = scale_test(&suite, &sources(ctx, &suite, &a)?, &threads)?;
            io::write_json(a.out.as_deref(), &report)
        }
    }
}
