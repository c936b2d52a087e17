mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;

use common::{check_unit, generated_sources, units_of};
use hpcoder::corpus::{dedup, truncate_prefix, RawFile};
use hpcoder::metrics::{bucket_speedup, variable_set_eval, SpeedupBucket};
use hpcoder::parse::{parse_omp_pragma, strip_pragmas, Clause, Directive, OmpPragma, ReductionOp};
use hpcoder::tokompiler::{anonymize, lexicalize_source, TokenStream, TokompilerConfig};
use hpcoder::Language;
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}".prop_filter("not a keyword", |s| !matches!(s.as_str(), "for" | "if" | "do" | "int"))
}

fn vars() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(ident(), 1..4)
}

fn op() -> impl Strategy<Value = ReductionOp> {
    prop::sample::select(vec![
        ReductionOp::Add,
        ReductionOp::Sub,
        ReductionOp::Mul,
        ReductionOp::BitAnd,
        ReductionOp::BitOr,
        ReductionOp::BitXor,
        ReductionOp::LogAnd,
        ReductionOp::LogOr,
        ReductionOp::Max,
        ReductionOp::Min,
    ])
}

fn clause() -> impl Strategy<Value = Clause> {
    prop_oneof![
        vars().prop_map(Clause::Private),
        vars().prop_map(Clause::FirstPrivate),
        vars().prop_map(Clause::LastPrivate),
        (op(), vars()).prop_map(|(op, vars)| Clause::Reduction { op, vars }),
        (prop::sample::select(vec!["static", "dynamic", "guided"]), prop::option::of(1u32..64)).prop_map(
            |(k, c)| Clause::Schedule {
                kind: k.to_owned(),
                chunk: c.map(|c| c.to_string()),
            }
        ),
        (1u32..32).prop_map(|n| Clause::NumThreads(n.to_string())),
    ]
}

fn loop_pragma() -> impl Strategy<Value = OmpPragma> {
    (
        prop::sample::select(vec![
            Directive::ParallelFor,
            Directive::For,
            Directive::TargetTeamsDistribute,
            Directive::TargetTeamsDistributeParallelFor,
        ]),
        any::<bool>(),
        prop::collection::vec(clause(), 0..4),
    )
        .prop_map(|(d, simd, mut clauses)| {
            if simd {
                clauses.insert(0, Clause::Simd);
            }
            OmpPragma::new(d, clauses)
        })
}

fn unit_from(seed: u64) -> Vec<hpcoder::FunctionUnit> {
    let (text, lang) = generated_sources(seed, 1).pop().unwrap();
    units_of(&text, lang)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pragma_render_parse_round_trip(p in loop_pragma()) {
        let text = p.render();
        let back = parse_omp_pragma(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.render(), text);
    }

    #[test]
    fn strip_removes_exactly_the_pragma_lines(
        loops in prop::collection::vec((prop::option::of(loop_pragma()), 1u32..50), 1..8),
        cpp in any::<bool>(),
    ) {
        let mut with = String::from("void f(int n, double *a)\n{\n");
        let mut without = with.clone();
        for (i, (p, c)) in loops.iter().enumerate() {
            let body = format!("    for (int i{i} = 0; i{i} < n; i{i}++)\n        a[i{i}] += {c};\n");
            if let Some(p) = p {
                with.push_str(&format!("    {}\n", p.render()));
            }
            with.push_str(&body);
            without.push_str(&body);
        }
        with.push_str("}\n");
        without.push_str("}\n");
        let lang = if cpp { Language::Cpp } else { Language::C };
        let r = strip_pragmas(&with, lang, 0).unwrap();
        prop_assert!(!r.serial_text.contains("#pragma omp"));
        prop_assert_eq!(&r.serial_text, &without);
        prop_assert_eq!(r.sites.len(), loops.iter().filter(|(p, _)| p.is_some()).count());
        prop_assert!(r.orphans.is_empty());
        for (site, p) in r.sites.iter().zip(loops.iter().filter_map(|(p, _)| p.as_ref())) {
            prop_assert_eq!(&site.pragma, p);
            prop_assert!(with[site.loop_span.start..site.loop_span.end].starts_with("for ("));
            prop_assert!(site.pragma_span.end <= site.loop_span.start);
        }
    }

    #[test]
    fn function_spans_reconstruct_their_text(seed in any::<u64>()) {
        let (text, lang) = generated_sources(seed, 1).pop().unwrap();
        let units = units_of(&text, lang);
        prop_assert!(!units.is_empty());
        let mut last_end = 0;
        for u in &units {
            prop_assert!(u.byte_span.start >= last_end && u.byte_span.end <= text.len());
            prop_assert_eq!(&text[u.byte_span.start..u.byte_span.end], u.source_text.as_str());
            prop_assert!(u.source_text.contains(&u.name));
            last_end = u.byte_span.end;
        }
    }

    #[test]
    fn anonymization_invariants(seed in any::<u64>(), anon_seed in any::<u64>()) {
        for u in unit_from(seed).iter().take(3) {
            check_unit(u, anon_seed).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn rename_map_is_a_deterministic_bijection(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let config = TokompilerConfig::default();
        for u in unit_from(seed).iter().take(3) {
            let x = anonymize(u, a, &config).unwrap();
            prop_assert_eq!(&x, &anonymize(u, a, &config).unwrap());
            let originals: BTreeSet<&str> = x.map.entries.iter().map(|e| e.original.as_str()).collect();
            let replacements: BTreeSet<&str> = x.map.entries.iter().map(|e| e.replacement.as_str()).collect();
            prop_assert_eq!(originals.len(), x.map.len());
            prop_assert_eq!(replacements.len(), x.map.len());
            for e in &x.map.entries {
                prop_assert!(e.replacement.starts_with(e.category.prefix()));
            }
            let y = anonymize(u, b, &config).unwrap();
            let other: BTreeSet<&str> = y.map.entries.iter().map(|e| e.original.as_str()).collect();
            prop_assert_eq!(originals, other);
        }
    }

    #[test]
    fn prefix_and_suffix_concatenate(seed in any::<u64>(), cut_frac in 0.0f64..1.0) {
        let (text, lang) = generated_sources(seed, 1).pop().unwrap();
        let tokens = lexicalize_source(&text, lang);
        let cut = (cut_frac * tokens.tokens.len() as f64) as usize;
        let stream = TokenStream { tokens: tokens.tokens.clone() };
        let (p, s) = truncate_prefix(&stream, cut).unwrap();
        prop_assert_eq!(p.len(), cut);
        prop_assert_eq!([p, s].concat(), tokens.tokens.clone());
        prop_assert!(truncate_prefix(&stream, tokens.tokens.len()).is_err());
    }

    #[test]
    fn dedup_is_idempotent(contents in prop::collection::vec(prop::collection::vec(0u8..3, 0..4), 0..30)) {
        let files: Vec<RawFile> = contents
            .iter()
            .enumerate()
            .map(|(i, c)| RawFile::new(PathBuf::from(format!("f{i}.c")), "r".into(), c.clone(), Language::C))
            .collect();
        let distinct: BTreeSet<&Vec<u8>> = contents.iter().collect();
        let (once, dropped) = dedup(files);
        prop_assert_eq!(once.len(), distinct.len());
        prop_assert_eq!(dropped, contents.len() - distinct.len());
        let first: Vec<PathBuf> = once.iter().map(|f| f.path.clone()).collect();
        let (twice, again) = dedup(once);
        prop_assert_eq!(again, 0);
        prop_assert_eq!(twice.iter().map(|f| f.path.clone()).collect::<Vec<_>>(), first);
    }

    #[test]
    fn variable_set_counts(
        pred in prop::collection::vec("[a-d]", 0..6),
        label in prop::collection::vec("[a-d]", 0..6),
    ) {
        let r = variable_set_eval(&pred, &label);
        let p: BTreeSet<&String> = pred.iter().collect();
        let l: BTreeSet<&String> = label.iter().collect();
        prop_assert_eq!(r.tp + r.fp, p.len());
        prop_assert_eq!(r.tp + r.fn_, l.len());
        prop_assert_eq!(r.label_size(), l.len());
        let swapped = variable_set_eval(&label, &pred);
        prop_assert_eq!((swapped.tp, swapped.fp, swapped.fn_), (r.tp, r.fn_, r.fp));
        let mut rev = pred.clone();
        rev.reverse();
        prop_assert_eq!(variable_set_eval(&rev, &label), r);
    }

    #[test]
    fn speedup_buckets_partition(s in 1e-4f64..1e4) {
        let b = bucket_speedup(s).unwrap();
        let hits = SpeedupBucket::ALL.iter().filter(|&&x| x == b).count();
        prop_assert_eq!(hits, 1);
        let band = |m: f64| [2.0, 5.0, 10.0, f64::INFINITY].iter().position(|&hi| m < hi).unwrap();
        let expect = if s >= 1.0 { 4 + band(s) } else { 3 - band(1.0 / s) };
        prop_assert_eq!(b.index(), expect);
    }
}
