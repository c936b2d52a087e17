use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::bench::{compile_and_run, BenchmarkSuite, RunOutcome, Verdict};
use super::inject::inject_many;
use super::HarnessError;
use crate::metrics::{bucket_speedup, SpeedupBucket};
use crate::ompdata::BenchRef;
use crate::parse::{FileId, Language};

pub const DEFAULT_THREADS: [usize; 4] = [1, 4, 8, 16];

/// Sources of one benchmark as `(relative path, text)`.
pub type Sources = Vec<(PathBuf, String)>;

/// A pragma decision for one loop of a benchmark source. `None` leaves the
/// loop without a pragma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PragmaEdit {
    pub site: BenchRef,
    pub pragma: Option<String>,
}

fn language_of(path: &std::path::Path) -> Language {
    match path.extension().and_then(|e| e.to_str()) {
        Some("c" | "h") => Language::C,
        _ => Language::Cpp,
    }
}

/// Apply edits to whichever sources they address (matched by content hash).
/// Returns the patched sources and the number of edits applied.
pub fn patch_sources(sources: &[(PathBuf, String)], edits: &[PragmaEdit]) -> Result<(Sources, usize), HarnessError> {
    let mut applied = 0;
    let patched = sources
        .iter()
        .map(|(path, text)| {
            let id = FileId::of_bytes(text.as_bytes());
            let mine: Vec<_> = edits
                .iter()
                .filter(|e| e.site.file == id)
                .map(|e| (e.site.span, e.pragma.clone()))
                .collect();
            if mine.is_empty() {
                return Ok((path.clone(), text.clone()));
            }
            applied += mine.len();
            Ok((path.clone(), inject_many(text, language_of(path), &mine)?))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok((patched, applied))
}

/// Read every benchmark and apply the edits that address it.
pub fn patch_suite(suite: &BenchmarkSuite, edits: &[PragmaEdit]) -> Result<(Vec<Sources>, usize), HarnessError> {
    let mut total = 0;
    let mut out = Vec::with_capacity(suite.benchmarks.len());
    for b in &suite.benchmarks {
        let (patched, n) = patch_sources(&suite.read_sources(b)?, edits)?;
        total += n;
        out.push(patched);
    }
    Ok((out, total))
}

/// Compile and run every loop's edit in isolation on the benchmark that
/// contains it. Samples whose file is not part of the suite get no verdict.
pub fn verify_edits(
    suite: &BenchmarkSuite,
    edits: &[(String, PragmaEdit)],
    threads: usize,
) -> Result<HashMap<String, Verdict>, HarnessError> {
    let mut verdicts = HashMap::new();
    for b in &suite.benchmarks {
        let sources = suite.read_sources(b)?;
        let ids: Vec<FileId> = sources.iter().map(|(_, t)| FileId::of_bytes(t.as_bytes())).collect();
        let expected = suite.expected(b)?;
        for (id, edit) in edits.iter().filter(|(_, e)| ids.contains(&e.site.file)) {
            let verdict = match patch_sources(&sources, std::slice::from_ref(edit)) {
                Ok((patched, _)) => compile_and_run(b, &patched, &expected, Some(threads))?.verdict,
                Err(HarnessError::SpanDrift(_) | HarnessError::InvalidGeneration { .. }) => Verdict::CompileFail,
                Err(e) => return Err(e),
            };
            verdicts.insert(id.clone(), verdict);
        }
    }
    Ok(verdicts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadRun {
    pub threads: usize,
    pub outcome: RunOutcome,
    /// Baseline time over this run's time; only when both passed.
    pub speedup: Option<f64>,
    pub bucket: Option<SpeedupBucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRuns {
    pub name: String,
    pub baseline: Option<RunOutcome>,
    pub runs: Vec<ThreadRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadSummary {
    pub threads: usize,
    pub verdicts: BTreeMap<Verdict, usize>,
    /// Bucket counts over runs with a speedup; every bucket is listed.
    pub buckets: BTreeMap<SpeedupBucket, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub v: u32,
    pub logical_cores: usize,
    pub thread_list: Vec<usize>,
    pub benchmarks: Vec<BenchmarkRuns>,
    pub summary: Vec<ThreadSummary>,
}

impl ScaleReport {
    fn summarize(thread_list: &[usize], benchmarks: &[BenchmarkRuns]) -> Vec<ThreadSummary> {
        thread_list
            .iter()
            .enumerate()
            .map(|(i, &threads)| {
                let mut verdicts: BTreeMap<Verdict, usize> = Verdict::ALL.iter().map(|v| (*v, 0)).collect();
                let mut buckets: BTreeMap<SpeedupBucket, usize> = SpeedupBucket::ALL.iter().map(|b| (*b, 0)).collect();
                for run in benchmarks.iter().filter_map(|b| b.runs.get(i)) {
                    *verdicts.entry(run.outcome.verdict).or_default() += 1;
                    if let Some(b) = run.bucket {
                        *buckets.entry(b).or_default() += 1;
                    }
                }
                ThreadSummary { threads, verdicts, buckets }
            })
            .collect()
    }
}

fn sweep(
    suite: &BenchmarkSuite,
    sources: &[Sources],
    thread_list: &[usize],
    with_baseline: bool,
) -> Result<ScaleReport, HarnessError> {
    if sources.len() != suite.benchmarks.len() {
        return Err(HarnessError::Config(format!(
            "{} source sets for {} benchmarks",
            sources.len(),
            suite.benchmarks.len()
        )));
    }
    let mut benchmarks = Vec::new();
    for (b, patched) in suite.benchmarks.iter().zip(sources) {
        let expected = suite.expected(b)?;
        let baseline = if with_baseline {
            let original = suite.read_sources(b)?;
            let o = compile_and_run(b, &original, &expected, None)?;
            tracing::info!(bench = %b.name, verdict = ?o.verdict, time = ?o.wall_time_s, "baseline");
            Some(o)
        } else {
            None
        };
        let base_time = baseline
            .as_ref()
            .filter(|o| o.verdict == Verdict::Pass)
            .and_then(|o| o.wall_time_s);
        let mut runs = Vec::new();
        for &threads in thread_list {
            let outcome = compile_and_run(b, patched, &expected, Some(threads))?;
            tracing::info!(bench = %b.name, threads, verdict = ?outcome.verdict, time = ?outcome.wall_time_s, "run");
            let speedup = match (base_time, outcome.verdict, outcome.wall_time_s) {
                (Some(base), Verdict::Pass, Some(t)) => Some(base.max(1e-9) / t.max(1e-9)),
                _ => None,
            };
            let bucket = speedup.map(bucket_speedup).transpose().map_err(|e| HarnessError::Config(e.to_string()))?;
            runs.push(ThreadRun {
                threads,
                outcome,
                speedup,
                bucket,
            });
        }
        benchmarks.push(BenchmarkRuns {
            name: b.name.clone(),
            baseline,
            runs,
        });
    }
    Ok(ScaleReport {
        v: crate::SCHEMA_VERSION,
        logical_cores: crate::exec::logical_cores(),
        thread_list: thread_list.to_vec(),
        summary: ScaleReport::summarize(thread_list, &benchmarks),
        benchmarks,
    })
}

/// Compile and run every benchmark at each thread count. Timed runs are
/// sequential.
pub fn run_suite(suite: &BenchmarkSuite, sources: &[Sources], thread_list: &[usize]) -> Result<ScaleReport, HarnessError> {
    sweep(suite, sources, thread_list, false)
}

/// Like [`run_suite`], plus a baseline run of the unmodified sources with
/// `OMP_NUM_THREADS` unset; speedups are bucketed per thread count.
pub fn scale_test(suite: &BenchmarkSuite, sources: &[Sources], thread_list: &[usize]) -> Result<ScaleReport, HarnessError> {
    sweep(suite, sources, thread_list, true)
}

/// Spearman rank correlation of two equal-length samples (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in &idx[i..=j] {
                r[*k] = avg;
            }
            i = j + 1;
        }
        r
    }
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        vx += (a - mean).powi(2);
        vy += (b - mean).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::super::bench::{BenchmarkSpec, Compare, ExpectedOutput};
    use super::*;
    use crate::parse::Span;

    fn suite(dir: &std::path::Path, script: &str) -> BenchmarkSuite {
        std::fs::write(dir.join("main.sh"), script).unwrap();
        BenchmarkSuite {
            v: Some(1),
            benchmarks: vec![BenchmarkSpec {
                name: "echo".into(),
                sources: vec!["main.sh".into()],
                build: "cp {src} {bin}".into(),
                run: "sh {bin}".into(),
                expected_output: ExpectedOutput::Text("ok\n".into()),
                timeout_s: 5.0,
                env: BTreeMap::new(),
                compare: Compare::Exact,
                repeats: 1,
            }],
            base_dir: dir.to_owned(),
        }
    }

    #[test]
    fn histogram_rows_partition_passes() {
        let dir = tempfile::tempdir().unwrap();
        let s = suite(dir.path(), "echo ok\n");
        let sources = vec![s.read_sources(&s.benchmarks[0]).unwrap()];
        let r = scale_test(&s, &sources, &[1, 2]).unwrap();
        assert_eq!(r.summary.len(), 2);
        for row in &r.summary {
            assert_eq!(row.buckets.values().sum::<usize>(), 1);
            assert_eq!(row.verdicts[&Verdict::Pass], 1);
            assert_eq!(row.buckets.len(), 8);
        }
        assert!(r.benchmarks[0].runs.iter().all(|t| t.speedup.is_some()));
    }

    #[test]
    fn failing_runs_get_no_speedup() {
        let dir = tempfile::tempdir().unwrap();
        let s = suite(dir.path(), "echo bad\n");
        let sources = vec![s.read_sources(&s.benchmarks[0]).unwrap()];
        let r = scale_test(&s, &sources, &[1]).unwrap();
        assert_eq!(r.summary[0].verdicts[&Verdict::OutputMismatch], 1);
        assert_eq!(r.summary[0].buckets.values().sum::<usize>(), 0);
        assert_eq!(r.benchmarks[0].runs[0].speedup, None);
    }

    #[test]
    fn patch_matches_by_content_hash() {
        let src = "void f(int *a, int n) {\n    for (int i = 0; i < n; i++) a[i] = 0;\n}\n";
        let start = src.find("for").unwrap();
        let end = src.find("}\n").unwrap() - 1;
        let edit = PragmaEdit {
            site: BenchRef {
                file: FileId::of_bytes(src.as_bytes()),
                span: Span::new(start, end),
            },
            pragma: Some("#pragma omp parallel for".into()),
        };
        let sources = vec![("a.c".into(), src.to_owned()), ("b.c".into(), "int x;\n".to_owned())];
        let (patched, n) = patch_sources(&sources, &[edit]).unwrap();
        assert_eq!(n, 1);
        assert!(patched[0].1.contains("    #pragma omp parallel for\n    for"));
        assert_eq!(patched[1].1, "int x;\n");
    }

    #[test]
    fn spearman_oracle() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        // textbook example: d² = [0,1,1,0] over n=4 gives 1 - 6*2/(4*15) = 0.8
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }
}
