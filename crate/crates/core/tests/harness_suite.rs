#![cfg(feature = "toolchain-tests")]

mod common;

use common::{bench_suite, model_edits, strip_edits, suite_samples};
use hpcoder::harness::{patch_suite, run_suite, scale_test, verify_edits, PragmaEdit, ReplayModel, Verdict};
use hpcoder::parse::strip_pragmas;
use hpcoder::Language;

#[test]
fn mini_suite_passes_as_shipped() {
    let suite = bench_suite("bench/suite.json");
    assert_eq!(suite.benchmarks.len(), 6);
    let (sources, applied) = patch_suite(&suite, &[]).unwrap();
    assert_eq!(applied, 0);
    let report = run_suite(&suite, &sources, &[1, 4]).unwrap();
    for b in &report.benchmarks {
        for r in &b.runs {
            assert_eq!(r.outcome.verdict, Verdict::Pass, "{} at {} threads: {}", b.name, r.threads, r.outcome.diagnostics);
            assert!(r.speedup.is_none());
        }
    }
    for s in &report.summary {
        assert_eq!(s.verdicts[&Verdict::Pass], 6);
        assert_eq!(s.buckets.values().sum::<usize>(), 0);
    }
}

#[test]
fn strip_and_replay_round_trip() {
    let suite = bench_suite("bench/suite.json");
    let samples = suite_samples(&suite);
    let positives = samples.iter().filter(|s| s.is_positive()).count();
    assert_eq!(positives, 7);

    let (stripped, applied) = patch_suite(&suite, &strip_edits(&samples)).unwrap();
    assert_eq!(applied, samples.len());
    for (b, set) in suite.benchmarks.iter().zip(&stripped) {
        for ((path, original), (_, text)) in suite.read_sources(b).unwrap().iter().zip(set) {
            let lang = if path.extension().is_some_and(|e| e == "c") { Language::C } else { Language::Cpp };
            assert_eq!(text, &strip_pragmas(original, lang, 0).unwrap().serial_text);
        }
    }
    let serial = run_suite(&suite, &stripped, &[1]).unwrap();
    assert!(serial.benchmarks.iter().all(|b| b.runs[0].outcome.verdict == Verdict::Pass));

    let (replayed, _) = patch_suite(&suite, &model_edits(&samples, &ReplayModel)).unwrap();
    let report = scale_test(&suite, &replayed, &[1, 4]).unwrap();
    for b in &report.benchmarks {
        assert_eq!(b.baseline.as_ref().unwrap().verdict, Verdict::Pass);
        assert!(b.runs.iter().all(|r| r.outcome.verdict == Verdict::Pass && r.speedup.is_some()));
    }
    for s in &report.summary {
        assert_eq!(s.buckets.values().sum::<usize>(), 6);
    }
}

#[test]
fn faulty_fixtures_get_failure_verdicts() {
    let suite = bench_suite("bench/faulty/suite.json");
    let (sources, _) = patch_suite(&suite, &[]).unwrap();
    let report = run_suite(&suite, &sources, &[1, 2, 4]).unwrap();
    let by_name = |n: &str| report.benchmarks.iter().find(|b| b.name == n).unwrap();
    let partial: Vec<Verdict> = by_name("partial_sum").runs.iter().map(|r| r.outcome.verdict).collect();
    assert_eq!(partial, [Verdict::Pass, Verdict::OutputMismatch, Verdict::OutputMismatch]);
    assert!(by_name("undeclared").runs.iter().all(|r| r.outcome.verdict == Verdict::CompileFail));
}

#[test]
fn verify_single_edit() {
    let suite = bench_suite("bench/suite.json");
    let samples = suite_samples(&suite);
    let dot = samples
        .iter()
        .find(|s| s.label.as_ref().is_some_and(|l| l.has_reduction()) && s.loop_code.contains("x[i] * y[i]"))
        .unwrap();
    let site = dot.benchmark_ref.clone().unwrap();
    let edits = vec![
        ("good".to_owned(), PragmaEdit { site: site.clone(), pragma: Some("#pragma omp parallel for reduction(+:s)".into()) }),
        ("racy".to_owned(), PragmaEdit { site: site.clone(), pragma: Some("#pragma omp parallel for firstprivate(s) lastprivate(s)".into()) }),
        ("bogus".to_owned(), PragmaEdit { site, pragma: Some("#pragma omp parallel for private(nope)".into()) }),
    ];
    let v = verify_edits(&suite, &edits, 4).unwrap();
    assert_eq!(v["good"], Verdict::Pass);
    assert_eq!(v["racy"], Verdict::OutputMismatch);
    assert_eq!(v["bogus"], Verdict::CompileFail);
}
