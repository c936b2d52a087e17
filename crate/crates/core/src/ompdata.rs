//! Loop/pragma datasets: pragma normalization, positive/negative loop
//! extraction with seeded balancing, and clause histograms.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::RawFile;
use crate::exec::{map_ordered, Jobs};
use crate::parse::{
    decode_source, is_omp_pragma, parse_omp_pragma, parse_str, pragma_text, pragmas_above, Clause,
    Directive, FileId, Language, OmpPragma, ReductionOp, Span, SyntaxTree, LOOP_KINDS,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OmpDataError {
    #[error("unsupported pragma `{pragma}`: {reason}")]
    Unnormalizable { pragma: String, reason: String },
    #[error("bad loop record on line {line}: {reason}")]
    BadRecord { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PragmaBase {
    ParallelFor,
    TargetTeamsDistributeParallelFor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub op: ReductionOp,
    pub vars: BTreeSet<String>,
}

/// Canonical form of a loop pragma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedPragma {
    pub base: PragmaBase,
    pub simd: bool,
    pub private_vars: BTreeSet<String>,
    pub reduction: Option<Reduction>,
}

impl NormalizedPragma {
    pub fn plain(base: PragmaBase) -> Self {
        NormalizedPragma {
            base,
            simd: false,
            private_vars: BTreeSet::new(),
            reduction: None,
        }
    }

    pub fn has_private(&self) -> bool {
        !self.private_vars.is_empty()
    }

    pub fn has_reduction(&self) -> bool {
        self.reduction.is_some()
    }

    pub fn is_target(&self) -> bool {
        self.base == PragmaBase::TargetTeamsDistributeParallelFor
    }

    pub fn to_omp(&self) -> OmpPragma {
        let directive = match self.base {
            PragmaBase::ParallelFor => Directive::ParallelFor,
            PragmaBase::TargetTeamsDistributeParallelFor => Directive::TargetTeamsDistributeParallelFor,
        };
        let mut clauses = Vec::new();
        if self.simd {
            clauses.push(Clause::Simd);
        }
        if self.has_private() {
            clauses.push(Clause::Private(self.private_vars.iter().cloned().collect()));
        }
        if let Some(r) = &self.reduction {
            clauses.push(Clause::Reduction {
                op: r.op,
                vars: r.vars.iter().cloned().collect(),
            });
        }
        OmpPragma::new(directive, clauses)
    }

    pub fn render(&self) -> String {
        self.to_omp().render()
    }
}

/// Normalize a pragma, logging dropped clauses.
pub fn normalize_pragma(p: &OmpPragma) -> Result<NormalizedPragma, OmpDataError> {
    let (n, dropped) = normalize_pragma_lossy(p)?;
    for c in dropped {
        tracing::warn!("dropping clause `{c}` from `{}`", p.render());
    }
    Ok(n)
}

/// Normalize a pragma, returning the clauses that have no place in the
/// canonical form.
pub fn normalize_pragma_lossy(p: &OmpPragma) -> Result<(NormalizedPragma, Vec<Clause>), OmpDataError> {
    let unsupported = |reason: &str| OmpDataError::Unnormalizable {
        pragma: p.render(),
        reason: reason.to_owned(),
    };
    let base = match &p.directive {
        Directive::ParallelFor => PragmaBase::ParallelFor,
        Directive::TargetTeamsDistribute | Directive::TargetTeamsDistributeParallelFor => {
            PragmaBase::TargetTeamsDistributeParallelFor
        }
        other => return Err(unsupported(&format!("directive `{}` is not a loop-parallel form", other.words()))),
    };
    let mut out = NormalizedPragma::plain(base);
    let mut dropped = Vec::new();
    for clause in &p.clauses {
        match clause {
            Clause::Private(v) | Clause::FirstPrivate(v) | Clause::LastPrivate(v) => {
                out.private_vars.extend(v.iter().map(|s| s.trim().to_owned()));
            }
            Clause::Reduction { op, vars } => {
                let vars = vars.iter().map(|s| s.trim().to_owned());
                match &mut out.reduction {
                    None => {
                        out.reduction = Some(Reduction {
                            op: *op,
                            vars: vars.collect(),
                        })
                    }
                    Some(r) if r.op == *op => r.vars.extend(vars),
                    Some(_) => return Err(unsupported("reductions with different operators")),
                }
            }
            Clause::Simd => out.simd = true,
            other => dropped.push(other.clone()),
        }
    }
    if let Some(r) = &out.reduction {
        if r.vars.iter().any(|v| out.private_vars.contains(v)) {
            return Err(unsupported("variable is both private and a reduction target"));
        }
    }
    Ok((out, dropped))
}

/// Combine the pragmas stacked above one loop. A `parallel` directly above a
/// `for` acts as `parallel for`.
fn combine_stack(stack: &[OmpPragma]) -> Result<OmpPragma, OmpDataError> {
    match stack {
        [one] => Ok(one.clone()),
        [outer, inner] if outer.directive == Directive::Parallel && inner.directive == Directive::For => {
            let mut clauses = outer.clauses.clone();
            clauses.extend(inner.clauses.iter().cloned());
            Ok(OmpPragma::new(Directive::ParallelFor, clauses))
        }
        _ => Err(OmpDataError::Unnormalizable {
            pragma: stack.iter().map(OmpPragma::render).collect::<Vec<_>>().join(" / "),
            reason: "unsupported pragma stack".into(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BenchRef {
    pub file: FileId,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSample {
    pub id: String,
    pub loop_code: String,
    pub label: Option<NormalizedPragma>,
    pub benchmark_ref: Option<BenchRef>,
    pub language: Language,
}

impl LoopSample {
    pub fn is_positive(&self) -> bool {
        self.label.is_some()
    }
}

pub fn sample_id(file: &FileId, span: Span) -> String {
    let mut h = Sha256::new();
    h.update(file.as_str().as_bytes());
    h.update((span.start as u64).to_le_bytes());
    h.update((span.end as u64).to_le_bytes());
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractOptions {
    pub balance: bool,
    pub neg_ratio: f64,
    pub seed: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            balance: true,
            neg_ratio: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub files: usize,
    pub positives: usize,
    pub negatives: usize,
    pub negative_candidates: usize,
    /// Annotated loops whose pragmas have no canonical form.
    pub unsupported: usize,
    /// Loops whose text does not parse on its own.
    pub unparseable: usize,
    pub dropped_clauses: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LoopSample>,
    pub report: ExtractReport,
}

struct FileLoops {
    positives: Vec<LoopSample>,
    candidates: Vec<LoopSample>,
    unsupported: usize,
    unparseable: usize,
    dropped: usize,
}

/// Extract positive (annotated) and negative (plain) `for` loops.
pub fn extract_dataset(files: &[RawFile], options: &ExtractOptions, jobs: Jobs) -> Dataset {
    let per_file = map_ordered(files, jobs, |f| match decode_source(&f.bytes) {
        Ok(text) => Some(file_loops(&text, f.language, &f.content_hash)),
        Err(e) => {
            tracing::warn!("skipping {}: {e}", f.path.display());
            None
        }
    });

    let mut report = ExtractReport {
        files: files.len(),
        ..ExtractReport::default()
    };
    // (file index, loop start) keeps document order when merging
    let mut positives = Vec::new();
    let mut candidates = Vec::new();
    for (fi, fl) in per_file.into_iter().enumerate() {
        let Some(fl) = fl else { continue };
        report.unsupported += fl.unsupported;
        report.unparseable += fl.unparseable;
        report.dropped_clauses += fl.dropped;
        positives.extend(fl.positives.into_iter().map(|s| (fi, s)));
        candidates.extend(fl.candidates.into_iter().map(|s| (fi, s)));
    }
    report.positives = positives.len();
    report.negative_candidates = candidates.len();

    let negatives: Vec<(usize, LoopSample)> = if options.balance {
        let wanted = (options.neg_ratio.max(0.0) * positives.len() as f64).ceil() as usize;
        if candidates.len() < wanted {
            let msg = format!(
                "InsufficientNegatives: wanted {wanted} plain loops, corpus has {}",
                candidates.len()
            );
            tracing::warn!("{msg}");
            report.warnings.push(msg);
            candidates
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, candidates.len(), wanted).into_vec();
            picked.sort_unstable();
            let mut slots: Vec<Option<(usize, LoopSample)>> = candidates.into_iter().map(Some).collect();
            picked.into_iter().filter_map(|i| slots[i].take()).collect()
        }
    } else {
        candidates
    };
    report.negatives = negatives.len();

    let mut all: Vec<(usize, LoopSample)> = positives.into_iter().chain(negatives).collect();
    all.sort_by_key(|(fi, s)| (*fi, s.benchmark_ref.as_ref().map(|b| b.span.start)));
    Dataset {
        samples: all.into_iter().map(|(_, s)| s).collect(),
        report,
    }
}

fn file_loops(text: &str, language: Language, file_id: &FileId) -> FileLoops {
    let tree = parse_str(text, language);
    let mut out = FileLoops {
        positives: Vec::new(),
        candidates: Vec::new(),
        unsupported: 0,
        unparseable: 0,
        dropped: 0,
    };
    let annotated = annotated_spans(&tree);
    for id in tree.preorder() {
        if !LOOP_KINDS.contains(&tree.kind(id)) || tree.subtree_has_error(id) {
            continue;
        }
        let span = tree.span(id);
        let stack = pragmas_above(&tree, id);
        let label = if stack.is_empty() {
            if annotated.iter().any(|a| a.contains(span)) {
                continue;
            }
            None
        } else {
            let parsed: Result<Vec<OmpPragma>, _> = stack
                .iter()
                .map(|&p| parse_omp_pragma(pragma_text(&tree, p)))
                .collect();
            let normalized = parsed
                .map_err(|e| OmpDataError::Unnormalizable {
                    pragma: String::new(),
                    reason: e.to_string(),
                })
                .and_then(|ps| combine_stack(&ps))
                .and_then(|p| normalize_pragma_lossy(&p));
            match normalized {
                Ok((n, dropped)) => {
                    out.dropped += dropped.len();
                    Some(n)
                }
                Err(e) => {
                    tracing::debug!("excluding loop at {}: {e}", span.start);
                    out.unsupported += 1;
                    continue;
                }
            }
        };
        let loop_code = tree.text(id).to_owned();
        if !parses_as_statement(&loop_code, language) {
            out.unparseable += 1;
            continue;
        }
        let sample = LoopSample {
            id: sample_id(file_id, span),
            loop_code,
            benchmark_ref: Some(BenchRef {
                file: file_id.clone(),
                span,
            }),
            language,
            label,
        };
        if sample.is_positive() {
            out.positives.push(sample);
        } else {
            out.candidates.push(sample);
        }
    }
    out
}

/// Spans of statements that follow any omp pragma; plain loops inside them
/// are not clean negatives.
fn annotated_spans(tree: &SyntaxTree) -> Vec<Span> {
    let mut spans = Vec::new();
    for id in tree.preorder() {
        if !is_omp_pragma(tree, id) {
            continue;
        }
        let Some(parent) = tree.parent(id) else { continue };
        let sibs = tree.children(parent);
        let Some(pos) = sibs.iter().position(|&s| s == id) else { continue };
        if let Some(&next) = sibs[pos + 1..]
            .iter()
            .find(|&&s| tree.kind(s) != "comment" && !is_omp_pragma(tree, s))
        {
            spans.push(tree.span(next));
        }
    }
    spans
}

pub fn parses_as_statement(code: &str, language: Language) -> bool {
    let wrapped = format!("void loop_wrapper__(void) {{\n{code}\n}}\n");
    parse_str(&wrapped, language).error_count() == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClauseCounts {
    pub private: usize,
    pub reduction: usize,
    pub target: usize,
    pub simd: usize,
    /// Positives with neither private nor reduction.
    pub plain: usize,
    pub total: usize,
}

impl ClauseCounts {
    fn add(&mut self, p: &NormalizedPragma) {
        self.private += usize::from(p.has_private());
        self.reduction += usize::from(p.has_reduction());
        self.target += usize::from(p.is_target());
        self.simd += usize::from(p.simd);
        self.plain += usize::from(!p.has_private() && !p.has_reduction());
        self.total += 1;
    }

    pub fn merged(rows: impl IntoIterator<Item = ClauseCounts>) -> ClauseCounts {
        rows.into_iter().fold(ClauseCounts::default(), |a, b| ClauseCounts {
            private: a.private + b.private,
            reduction: a.reduction + b.reduction,
            target: a.target + b.target,
            simd: a.simd + b.simd,
            plain: a.plain + b.plain,
            total: a.total + b.total,
        })
    }
}

/// Per-language clause counts over positive samples.
pub fn clause_histogram(samples: &[LoopSample]) -> BTreeMap<Language, ClauseCounts> {
    let mut out: BTreeMap<Language, ClauseCounts> = BTreeMap::new();
    for s in samples {
        if let Some(label) = &s.label {
            out.entry(s.language).or_default().add(label);
        }
    }
    out
}

/// One JSONL line of a loop dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub v: u32,
    pub id: String,
    #[serde(rename = "loop")]
    pub loop_code: String,
    pub pragma: Option<String>,
    pub bench: Option<BenchRef>,
    pub lang: Language,
}

impl From<&LoopSample> for LoopRecord {
    fn from(s: &LoopSample) -> Self {
        LoopRecord {
            v: crate::SCHEMA_VERSION,
            id: s.id.clone(),
            loop_code: s.loop_code.clone(),
            pragma: s.label.as_ref().map(NormalizedPragma::render),
            bench: s.benchmark_ref.clone(),
            lang: s.language,
        }
    }
}

impl LoopRecord {
    pub fn to_sample(&self) -> Result<LoopSample, OmpDataError> {
        let label = match &self.pragma {
            None => None,
            Some(text) => {
                let p = parse_omp_pragma(text).map_err(|e| OmpDataError::Unnormalizable {
                    pragma: text.clone(),
                    reason: e.to_string(),
                })?;
                Some(normalize_pragma(&p)?)
            }
        };
        Ok(LoopSample {
            id: self.id.clone(),
            loop_code: self.loop_code.clone(),
            label,
            benchmark_ref: self.bench.clone(),
            language: self.lang,
        })
    }
}

pub fn read_loops<R: BufRead>(reader: R) -> Result<Vec<LoopSample>, OmpDataError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let bad = |reason: String| OmpDataError::BadRecord { line: i + 1, reason };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LoopRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        out.push(rec.to_sample().map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}
