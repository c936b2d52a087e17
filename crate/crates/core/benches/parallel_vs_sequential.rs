use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hpcoder::corpus::{build_corpus, CorpusConfig};
use hpcoder::exec::{map_ordered, Jobs};
use hpcoder::metrics::{cut_table, CodeBleuConfig};
use hpcoder::parse::{extract_functions, parse_str, FileId};
use hpcoder::tokompiler::{anonymize, unit_seed, TokompilerConfig};
use hpcoder::{FunctionUnit, Language};

const MODES: [(&str, Jobs); 2] = [("sequential", Jobs::SEQUENTIAL), ("parallel", Jobs::ALL)];

fn kernel(k: usize) -> String {
    let mut s = format!("void kernel_{k}(double *x, double *y, int n)\n{{\n    double acc = {k}.5;\n");
    for j in 0..40 {
        s.push_str(&match (j + k) % 4 {
            0 => format!("    for (int i = 1; i < n; i++)\n        y[i] = x[i] * {j} + y[i - 1];\n"),
            1 => format!("    acc += x[{j} % n] / {}.0;\n", j + 1),
            2 => format!("    if (acc > {j})\n        acc = acc * 0.5;\n"),
            _ => format!("    y[{j} % n] = acc - x[({j} + 1) % n];\n"),
        });
    }
    s.push_str("    y[0] = acc;\n}\n");
    s
}

fn units(n: usize) -> Vec<FunctionUnit> {
    let text: String = (0..n).map(kernel).collect();
    let id = FileId::of_bytes(text.as_bytes());
    extract_functions(&parse_str(&text, Language::C), &id)
}

fn anonymize_units(c: &mut Criterion) {
    let units = units(64);
    let cfg = TokompilerConfig::default();
    let mut g = c.benchmark_group("anonymize");
    g.sample_size(10);
    for (name, jobs) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                map_ordered(&units, jobs, |u| anonymize(u, unit_seed(0, &u.file_id, u.byte_span), &cfg).map(|a| a.code.len()))
            })
        });
    }
    g.finish();
}

fn codebleu_cuts(c: &mut Criterion) {
    let units = units(32);
    let items: Vec<(usize, String, String, Language)> = units
        .iter()
        .zip(units.iter().cycle().skip(1))
        .enumerate()
        .map(|(i, (a, b))| ([100, 300, 600][i % 3], a.source_text.clone(), b.source_text.clone(), Language::C))
        .collect();
    let cfg = CodeBleuConfig::default();
    let mut g = c.benchmark_group("codebleu");
    g.sample_size(10);
    for (name, jobs) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| cut_table(&items, &[100, 300, 600], &cfg, jobs)));
    }
    g.finish();
}

fn corpus_build(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    for f in 0..24 {
        let text: String = (f * 4..f * 4 + 4).map(kernel).collect();
        std::fs::write(dir.path().join(format!("f{f:02}.c")), text).unwrap();
    }
    let config = CorpusConfig {
        roots: vec![PathBuf::from(dir.path())],
        anonymize: true,
        ..CorpusConfig::default()
    };
    let mut g = c.benchmark_group("corpus_build");
    g.sample_size(10);
    for (name, jobs) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_corpus(&config, jobs, &mut std::io::sink()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, anonymize_units, codebleu_cuts, corpus_build);
criterion_main!(benches);
