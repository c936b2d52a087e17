//! Shared fixtures and oracles for the integration and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;

use hpcoder::parse::{extract_functions, parse_str, FileId, FunctionUnit, Language};
use hpcoder::tokompiler::{
    anonymize, deanonymize, declared_identifiers, isomorphic, lexicalize, lexicalize_source, normalize,
    TokompilerConfig,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn units_of(text: &str, lang: Language) -> Vec<FunctionUnit> {
    let id = FileId::of_bytes(text.as_bytes());
    extract_functions(&parse_str(text, lang), &id)
}

/// Hand-written fixture files plus seeded generated ones, as `(text, language)`.
pub fn fixture_sources() -> Vec<(String, Language)> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture("functions"))
        .expect("fixture dir")
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    for p in paths {
        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or_default();
        let lang = Language::from_extension(ext).expect("fixture extension");
        out.push((std::fs::read_to_string(&p).unwrap(), lang));
    }
    out.extend(generated_sources(20240601, 16));
    out
}

pub fn fixture_units() -> Vec<FunctionUnit> {
    fixture_sources()
        .iter()
        .flat_map(|(text, lang)| units_of(text, *lang))
        .collect()
}

const VERBS: &[&str] = &[
    "compute", "update", "accumulate", "scan", "relax", "blend", "project", "normalize", "advance", "filter",
    "smooth", "pack", "gather", "scatter",
];
const LOCALS: &[&str] = &["tmp", "acc", "idx", "count", "total", "scale", "offset", "t0", "mask", "lo", "hi", "best"];

struct Ctx<'a> {
    rng: &'a mut ChaCha8Rng,
    cpp: bool,
    helpers: Vec<String>,
}

impl Ctx<'_> {
    fn local(&mut self, used: &mut Vec<String>) -> String {
        loop {
            let base = *LOCALS.choose(self.rng).unwrap();
            let name = if used.iter().any(|u| u == base) {
                format!("{base}{}", used.len())
            } else {
                base.to_string()
            };
            if !used.contains(&name) {
                used.push(name.clone());
                return name;
            }
        }
    }

    fn num(&mut self) -> String {
        match self.rng.random_range(0..5) {
            0 => self.rng.random_range(0..100).to_string(),
            1 => format!("{}.{}", self.rng.random_range(0..10), self.rng.random_range(0..100)),
            2 => format!("0x{:X}", self.rng.random_range(1..4096)),
            3 => format!("{}.0f", self.rng.random_range(1..9)),
            _ => format!("{}e-{}", self.rng.random_range(1..9), self.rng.random_range(1..6)),
        }
    }

    fn statement(&mut self, used: &mut Vec<String>, depth: usize) -> String {
        let choices = if depth > 1 { 6 } else { 13 };
        match self.rng.random_range(0..choices) {
            0 => {
                let v = self.local(used);
                let c = self.num();
                format!("double {v} = x[n / 2] * {c};\n    y[0] += {v};")
            }
            1 => {
                let c = self.num();
                format!("for (int i = 0; i < n; i++)\n        y[i] = x[i] * {c} + y[i];")
            }
            2 => {
                let v = self.local(used);
                format!("int {v} = 0;\n    while ({v} < n && x[{v}] > 0)\n        {v}++;\n    y[0] = {v};")
            }
            3 => format!("printf(\"{} %d\\n\", n); /* trace */", VERBS.choose(self.rng).unwrap()),
            4 => {
                let v = self.local(used);
                format!("char {v} = '{}';\n    if ({v} == 'q')\n        return;", (b'a' + self.rng.random_range(0..26)) as char)
            }
            5 => {
                let v = self.local(used);
                let m = self.num().replace(".0f", "").replace('.', "");
                format!("unsigned {v} = (unsigned)n & {m}u;\n    y[{v} % n] = 1;")
            }
            6 => {
                let s = self.num();
                format!(
                    "double sum = 0.0;\n    #pragma omp parallel for reduction(+:sum)\n    for (int i = 0; i < n; i++)\n        sum += x[i] * {s};\n    y[0] = sum;"
                )
            }
            7 => {
                let inner = self.statement(used, depth + 1);
                let c = self.num();
                format!("if (x[0] > {c}) {{\n    {inner}\n    }} else {{\n        y[1] = -y[1];\n    }}")
            }
            8 => format!(
                "switch (n % 3) {{\n    case 0:\n        y[0] = 1;\n        break;\n    case 1:\n        y[0] = {};\n        break;\n    default:\n        break;\n    }}",
                self.num()
            ),
            9 if !self.helpers.is_empty() => {
                let h = self.helpers.choose(self.rng).unwrap().clone();
                format!("{h}(x, y, n); // reuse")
            }
            10 => {
                let v = self.local(used);
                format!("double {v}[4] = {{ {}, {}, {}, {} }};\n    for (int k = 0; k < 4; k++)\n        y[k % n] += {v}[k];", self.num(), self.num(), self.num(), self.num())
            }
            11 => "for (int i = 1; i < n - 1; i++)\n        for (int j = 0; j < 2; j++)\n            y[i] += 0.5 * (x[i - 1] + x[i + 1]) * j;"
                .to_owned(),
            12 if self.cpp => {
                let v = self.local(used);
                format!("auto {v} = [&](double q) {{ return q * {}; }};\n    y[0] = {v}(x[0]) + std::max(x[0], y[0]);", self.num())
            }
            _ => "y[0] = x[0];".to_string(),
        }
    }

    fn function(&mut self, name: &str) -> String {
        let mut used = Vec::new();
        let n_stmts = self.rng.random_range(2..6);
        let mut body = Vec::new();
        for _ in 0..n_stmts {
            body.push(format!("    {}", self.statement(&mut used, 0)));
        }
        let (head, x_ty) = if self.cpp && self.rng.random_bool(0.3) {
            ("template <typename T>\n".to_string(), "const T *")
        } else if self.cpp && self.rng.random_bool(0.3) {
            (String::new(), "const std::vector<double> &")
        } else {
            (String::new(), "const double *")
        };
        let doc = if self.rng.random_bool(0.5) { "// generated kernel\n" } else { "" };
        format!("{doc}{head}void {name}({x_ty}x, double *y, int n)\n{{\n{}\n}}\n", body.join("\n"))
    }
}

/// `files` seeded source files with 8 to 14 generated functions each.
pub fn generated_sources(seed: u64, files: usize) -> Vec<(String, Language)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for f in 0..files {
        let cpp = f % 2 == 1;
        let mut ctx = Ctx {
            rng: &mut rng,
            cpp,
            helpers: Vec::new(),
        };
        let mut text = if cpp {
            "#include <vector>\n#include <algorithm>\n#include <cstdio>\n\n".to_string()
        } else {
            "#include <stdio.h>\n\n".to_string()
        };
        let count = ctx.rng.random_range(8..15);
        for k in 0..count {
            let verb = *VERBS.choose(ctx.rng).unwrap();
            let name = format!("{verb}_{f}_{k}");
            text.push_str(&ctx.function(&name));
            text.push('\n');
            ctx.helpers.push(name);
        }
        out.push((text, if cpp { Language::Cpp } else { Language::C }));
    }
    out
}

/// Structural checks on one anonymized unit: clean re-parse, isomorphism,
/// no leaked declared identifiers, determinism and exact inversion.
pub fn check_unit(u: &FunctionUnit, seed: u64) -> Result<(), String> {
    let cfg = TokompilerConfig::default();
    let a = anonymize(u, seed, &cfg).map_err(|e| format!("{}: {e}", u.name))?;
    let again = anonymize(u, seed, &cfg).map_err(|e| e.to_string())?;
    if a.code != again.code || a.map != again.map {
        return Err(format!("{}: not deterministic", u.name));
    }
    let anon_tree = parse_str(&a.code, u.language);
    if anon_tree.error_count() != 0 {
        return Err(format!("{}: output has syntax errors\n{}", u.name, a.code));
    }
    isomorphic(&parse_str(&u.source_text, u.language), &anon_tree).map_err(|e| format!("{}: {e}\n{}", u.name, a.code))?;
    let declared = declared_identifiers(u);
    // field names belong to types declared elsewhere and are kept
    let leaked = anon_tree
        .leaves()
        .into_iter()
        .filter(|&l| matches!(anon_tree.kind(l), "identifier" | "type_identifier" | "statement_identifier"))
        .map(|l| anon_tree.text(l))
        .find(|t| declared.contains(*t));
    if let Some(t) = leaked {
        return Err(format!("{}: `{t}` leaked\n{}", u.name, a.code));
    }
    if lexicalize(&a).tokens.iter().any(|t| t.contains("//") || t.contains("/*")) {
        return Err(format!("{}: comment survived\n{}", u.name, a.code));
    }
    let back = deanonymize(&a).map_err(|e| e.to_string())?;
    if lexicalize_source(&back, u.language) != lexicalize_source(&normalize(u), u.language) {
        return Err(format!("{}: deanonymize mismatch\n{back}", u.name));
    }
    Ok(())
}

/// A benchmark suite from the fixtures with the default toolchain applied.
pub fn bench_suite(rel: &str) -> hpcoder::harness::BenchmarkSuite {
    let mut suite = hpcoder::harness::BenchmarkSuite::load(&fixture(rel)).expect("suite");
    hpcoder::config::ToolchainConfig::default().apply(&mut suite);
    suite
}

/// All `for` loops of a suite's sources, positives and negatives, with
/// references into the original files.
pub fn suite_samples(suite: &hpcoder::harness::BenchmarkSuite) -> Vec<hpcoder::ompdata::LoopSample> {
    use hpcoder::corpus::RawFile;
    let mut files = Vec::new();
    for b in &suite.benchmarks {
        for (path, text) in suite.read_sources(b).expect("sources") {
            let lang = if path.extension().is_some_and(|e| e == "c") { Language::C } else { Language::Cpp };
            files.push(RawFile::new(path, b.name.clone(), text.into_bytes(), lang));
        }
    }
    let options = hpcoder::ompdata::ExtractOptions {
        balance: false,
        ..Default::default()
    };
    hpcoder::ompdata::extract_dataset(&files, &options, hpcoder::exec::Jobs::ALL).samples
}

/// Edits that put each loop's predicted pragma back, or strip it.
pub fn model_edits(
    samples: &[hpcoder::ompdata::LoopSample],
    model: &dyn hpcoder::harness::ModelEndpoint,
) -> Vec<hpcoder::harness::PragmaEdit> {
    samples
        .iter()
        .map(|s| hpcoder::harness::PragmaEdit {
            site: s.benchmark_ref.clone().expect("benchmark ref"),
            pragma: hpcoder::harness::predict(model, s).expect("prediction").pragma,
        })
        .collect()
}

pub fn strip_edits(samples: &[hpcoder::ompdata::LoopSample]) -> Vec<hpcoder::harness::PragmaEdit> {
    samples
        .iter()
        .map(|s| hpcoder::harness::PragmaEdit {
            site: s.benchmark_ref.clone().expect("benchmark ref"),
            pragma: None,
        })
        .collect()
}
