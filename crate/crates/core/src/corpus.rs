//! Corpus curation: ingestion, exact deduplication, size filtering, function
//! extraction and JSONL emission, plus prefix/suffix splits for completion
//! scoring.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::exec::{map_ordered, Jobs};
use crate::parse::{decode_source, extract_functions, parse_str, FileId, FunctionUnit, Language};
use crate::tokompiler::{
    anonymize, lexicalize, lexicalize_source, normalize, unit_seed, TokenStream, TokompilerConfig,
};

pub const DEFAULT_EXTENSIONS: &[&str] = &["c", "h", "cc", "cpp", "cxx", "hpp"];
pub const COMPLETION_CUTS: [usize; 3] = [100, 300, 600];

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{have} tokens, need more than {cut}")]
    TooShort { have: usize, cut: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad record on line {line}: {reason}")]
    BadRecord { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFile {
    pub path: PathBuf,
    /// First path component below the ingestion root (`.` for files directly in it).
    pub repo: String,
    pub bytes: Vec<u8>,
    pub language: Language,
    pub content_hash: FileId,
}

impl RawFile {
    pub fn new(path: PathBuf, repo: String, bytes: Vec<u8>, language: Language) -> RawFile {
        let content_hash = FileId::of_bytes(&bytes);
        RawFile {
            path,
            repo,
            bytes,
            language,
            content_hash,
        }
    }
}

/// Walk the roots in lexicographic order and read every file whose extension
/// is in `extensions` and maps to a language. Unreadable entries are logged
/// and skipped.
pub fn ingest(roots: &[PathBuf], extensions: &[String]) -> Vec<RawFile> {
    let mut out = Vec::new();
    for root in roots {
        for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
            let entry = match entry {
                Ok(e) => e,
                Err(e) => {
                    tracing::warn!("skipping unreadable entry: {e}");
                    continue;
                }
            };
            if !entry.file_type().is_file() {
                continue;
            }
            let path = entry.path();
            let Some(ext) = path.extension().and_then(|e| e.to_str()) else { continue };
            let ext = ext.to_ascii_lowercase();
            if !extensions.iter().any(|e| e.eq_ignore_ascii_case(&ext)) {
                continue;
            }
            let Some(language) = Language::from_extension(&ext) else { continue };
            match std::fs::read(path) {
                Ok(bytes) => out.push(RawFile::new(path.to_owned(), repo_of(root, path), bytes, language)),
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
    }
    out
}

fn repo_of(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let mut comps = rel.components();
    match (comps.next(), comps.next()) {
        (Some(first), Some(_)) => format!("{}/{}", root.display(), first.as_os_str().to_string_lossy()),
        _ => format!("{}/.", root.display()),
    }
}

/// Keep the first file per content hash. Returns the kept files and the
/// number dropped.
pub fn dedup(files: Vec<RawFile>) -> (Vec<RawFile>, usize) {
    let mut seen = HashSet::new();
    let before = files.len();
    let kept: Vec<RawFile> = files
        .into_iter()
        .filter(|f| seen.insert(f.content_hash.clone()))
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Lexical token count of raw text (directive line breaks not counted).
pub fn token_count(text: &str, language: Language) -> usize {
    lexicalize_source(text, language).token_count()
}

/// True iff the text has more than `min_tokens` tokens and fewer than
/// `max_bytes` bytes.
pub fn filter_size(text: &str, language: Language, min_tokens: usize, max_bytes: usize) -> bool {
    text.len() < max_bytes && token_count(text, language) > min_tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeFilterLevel {
    #[default]
    File,
    Function,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub roots: Vec<PathBuf>,
    pub extensions: Vec<String>,
    pub min_tokens: usize,
    pub max_bytes: usize,
    pub size_filter: SizeFilterLevel,
    pub anonymize: bool,
    pub emit_tokens: bool,
    pub seed: u64,
    pub tokompiler: TokompilerConfig,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            roots: Vec::new(),
            extensions: DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
            min_tokens: 100,
            max_bytes: 1_048_576,
            size_filter: SizeFilterLevel::File,
            anonymize: false,
            emit_tokens: false,
            seed: 0,
            tokompiler: TokompilerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub v: u32,
    pub file_id: FileId,
    pub lang: Language,
    pub name: String,
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LanguageStats {
    pub repos: usize,
    pub size_bytes: u64,
    pub file_count: usize,
    pub function_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub v: u32,
    pub files_ingested: usize,
    pub duplicates_dropped: usize,
    pub files_after_dedup: usize,
    pub files_kept: usize,
    pub undecodable: usize,
    pub functions: usize,
    pub anonymize_failures: usize,
    /// Counts over kept files and emitted functions.
    pub per_language: BTreeMap<Language, LanguageStats>,
}

struct FileOutcome {
    kept: bool,
    undecodable: bool,
    records: Vec<CorpusRecord>,
    failures: usize,
}

/// Ingest → dedup → filter → extract → (anonymize) → write JSONL.
pub fn build_corpus<W: Write>(config: &CorpusConfig, jobs: Jobs, out: &mut W) -> io::Result<CorpusStats> {
    let files = ingest(&config.roots, &config.extensions);
    let files_ingested = files.len();
    let (files, duplicates_dropped) = dedup(files);
    let outcomes = map_ordered(&files, jobs, |f| process_file(f, config));

    let mut stats = CorpusStats {
        v: crate::SCHEMA_VERSION,
        files_ingested,
        duplicates_dropped,
        files_after_dedup: files.len(),
        ..CorpusStats::default()
    };
    let mut repos: BTreeMap<Language, BTreeSet<&str>> = BTreeMap::new();
    for (file, outcome) in files.iter().zip(&outcomes) {
        stats.undecodable += usize::from(outcome.undecodable);
        stats.anonymize_failures += outcome.failures;
        if !outcome.kept {
            continue;
        }
        stats.files_kept += 1;
        let lang = stats.per_language.entry(file.language).or_default();
        lang.file_count += 1;
        lang.size_bytes += file.bytes.len() as u64;
        lang.function_count += outcome.records.len();
        repos.entry(file.language).or_default().insert(&file.repo);
        for rec in &outcome.records {
            serde_json::to_writer(&mut *out, rec)?;
            out.write_all(b"\n")?;
            stats.functions += 1;
        }
    }
    for (lang, set) in repos {
        stats.per_language.entry(lang).or_default().repos = set.len();
    }
    out.flush()?;
    Ok(stats)
}

fn process_file(file: &RawFile, config: &CorpusConfig) -> FileOutcome {
    let mut outcome = FileOutcome {
        kept: false,
        undecodable: false,
        records: Vec::new(),
        failures: 0,
    };
    let text = match decode_source(&file.bytes) {
        Ok(t) => t,
        Err(e) => {
            tracing::warn!("skipping {}: {e}", file.path.display());
            outcome.undecodable = true;
            return outcome;
        }
    };
    if config.size_filter == SizeFilterLevel::File
        && !filter_size(&text, file.language, config.min_tokens, config.max_bytes)
    {
        return outcome;
    }
    outcome.kept = true;
    let tree = parse_str(&text, file.language);
    for unit in extract_functions(&tree, &file.content_hash) {
        if config.size_filter == SizeFilterLevel::Function
            && !filter_size(&unit.source_text, unit.language, config.min_tokens, config.max_bytes)
        {
            continue;
        }
        match make_record(&unit, config) {
            Some(r) => outcome.records.push(r),
            None => outcome.failures += 1,
        }
    }
    if config.size_filter == SizeFilterLevel::Function && outcome.records.is_empty() {
        outcome.kept = false;
    }
    outcome
}

fn make_record(unit: &FunctionUnit, config: &CorpusConfig) -> Option<CorpusRecord> {
    let (name, code, tokens) = if config.anonymize {
        let seed = unit_seed(config.seed, &unit.file_id, unit.byte_span);
        match anonymize(unit, seed, &config.tokompiler) {
            Ok(anon) => {
                let toks = config.emit_tokens.then(|| lexicalize(&anon).tokens);
                let name = anon.map.replacement_of(&unit.name).unwrap_or(&unit.name).to_owned();
                (name, anon.code, toks)
            }
            Err(e) => {
                tracing::warn!("cannot anonymize `{}` in {}: {e}", unit.name, unit.file_id.as_str());
                return None;
            }
        }
    } else {
        let code = normalize(unit);
        let toks = config
            .emit_tokens
            .then(|| lexicalize_source(&code, unit.language).tokens);
        (unit.name.clone(), code, toks)
    };
    Some(CorpusRecord {
        v: crate::SCHEMA_VERSION,
        file_id: unit.file_id.clone(),
        lang: unit.language,
        name,
        code,
        tokens,
    })
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusRecord = serde_json::from_str(&line).map_err(|e| CorpusError::BadRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RecordLanguageStats {
    pub files: usize,
    pub functions: usize,
    pub code_bytes: u64,
    pub tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RecordStats {
    pub v: u32,
    pub records: usize,
    pub per_language: BTreeMap<Language, RecordLanguageStats>,
}

/// Summary of an emitted corpus file.
pub fn record_stats(records: &[CorpusRecord]) -> RecordStats {
    let mut stats = RecordStats {
        v: crate::SCHEMA_VERSION,
        records: records.len(),
        ..RecordStats::default()
    };
    let mut files: BTreeMap<Language, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        let s = stats.per_language.entry(r.lang).or_default();
        s.functions += 1;
        s.code_bytes += r.code.len() as u64;
        s.tokens += match &r.tokens {
            Some(t) => t.iter().filter(|t| *t != crate::tokompiler::NEWLINE).count(),
            None => token_count(&r.code, r.lang),
        };
        files.entry(r.lang).or_default().insert(r.file_id.as_str());
    }
    for (lang, set) in files {
        stats.per_language.entry(lang).or_default().files = set.len();
    }
    stats
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionPair {
    pub v: u32,
    pub file_id: FileId,
    pub name: String,
    pub lang: Language,
    pub cut: usize,
    pub prefix_tokens: Vec<String>,
    pub suffix_tokens: Vec<String>,
}

/// Split a token stream after its first `cut` tokens. Line-break markers
/// count as tokens so the two halves concatenate back exactly.
pub fn truncate_prefix(tokens: &TokenStream, cut: usize) -> Result<(Vec<String>, Vec<String>), CorpusError> {
    let have = tokens.tokens.len();
    if have <= cut {
        return Err(CorpusError::TooShort { have, cut });
    }
    let (p, s) = tokens.tokens.split_at(cut);
    Ok((p.to_vec(), s.to_vec()))
}

/// Completion pairs for every record long enough for each cut.
pub fn completion_pairs(records: &[CorpusRecord], cuts: &[usize]) -> Vec<CompletionPair> {
    let mut out = Vec::new();
    for r in records {
        let stream = TokenStream {
            tokens: r
                .tokens
                .clone()
                .unwrap_or_else(|| lexicalize_source(&r.code, r.lang).tokens),
        };
        for &cut in cuts {
            if let Ok((prefix_tokens, suffix_tokens)) = truncate_prefix(&stream, cut) {
                out.push(CompletionPair {
                    v: crate::SCHEMA_VERSION,
                    file_id: r.file_id.clone(),
                    name: r.name.clone(),
                    lang: r.lang,
                    cut,
                    prefix_tokens,
                    suffix_tokens,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(name: &str, bytes: &[u8]) -> RawFile {
        RawFile::new(PathBuf::from(name), ".".into(), bytes.to_vec(), Language::C)
    }

    #[test]
    fn ingest_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.c"), "int a;").unwrap();
        std::fs::write(dir.path().join("b.cpp"), "int b;").unwrap();
        std::fs::write(dir.path().join("c.py"), "x = 1").unwrap();
        let exts: Vec<String> = DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect();
        let files = ingest(&[dir.path().to_owned()], &exts);
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].language, Language::C);
        assert_eq!(files[1].language, Language::Cpp);
        let empty = tempfile::tempdir().unwrap();
        assert!(ingest(&[empty.path().to_owned()], &exts).is_empty());
    }

    #[test]
    fn dedup_by_content() {
        let (kept, dropped) = dedup(vec![raw("a", b"x"), raw("b", b"x")]);
        assert_eq!((kept.len(), dropped), (1, 1));
        assert_eq!(kept[0].path, PathBuf::from("a"));
        let (kept, dropped) = dedup(vec![raw("a", b"x"), raw("b", b"y")]);
        assert_eq!((kept.len(), dropped), (2, 0));
    }

    #[test]
    fn size_filter_is_strict() {
        // `x ;` is two tokens
        let body = |n: usize| "x ; ".repeat(n / 2);
        assert!(!filter_size(&body(50), Language::C, 100, 1 << 20));
        assert_eq!(token_count(&body(100), Language::C), 100);
        assert!(!filter_size(&body(100), Language::C, 100, 1 << 20));
        let t101 = format!("{}y", body(100));
        assert_eq!(token_count(&t101, Language::C), 101);
        assert!(filter_size(&t101, Language::C, 100, 1 << 20));
        assert!(!filter_size(&t101, Language::C, 100, t101.len()));
    }

    #[test]
    fn truncation() {
        let ts = TokenStream {
            tokens: (0..1200).map(|i| i.to_string()).collect(),
        };
        let (p, s) = truncate_prefix(&ts, 100).unwrap();
        assert_eq!((p.len(), s.len()), (100, 1100));
        let short = TokenStream {
            tokens: vec!["x".into(); 99],
        };
        assert!(matches!(truncate_prefix(&short, 100), Err(CorpusError::TooShort { have: 99, cut: 100 })));
    }
}
