//! OpenMP pragma grammar: directive names and the clause forms the datasets
//! and metrics care about. Everything else is kept verbatim as `Other`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::tokens::join_continuations;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Directive {
    Parallel,
    ParallelFor,
    For,
    Simd,
    TargetTeamsDistribute,
    TargetTeamsDistributeParallelFor,
    /// Any other directive, as its space-joined words (`critical`, `target data`).
    Other(String),
}

impl Directive {
    pub fn words(&self) -> &str {
        match self {
            Directive::Parallel => "parallel",
            Directive::ParallelFor => "parallel for",
            Directive::For => "for",
            Directive::Simd => "simd",
            Directive::TargetTeamsDistribute => "target teams distribute",
            Directive::TargetTeamsDistributeParallelFor => "target teams distribute parallel for",
            Directive::Other(w) => w,
        }
    }

    /// Loop constructs that accept a trailing `simd`.
    fn takes_simd(&self) -> bool {
        matches!(
            self,
            Directive::ParallelFor
                | Directive::For
                | Directive::TargetTeamsDistribute
                | Directive::TargetTeamsDistributeParallelFor
        )
    }

    fn from_words(words: &[&str]) -> Directive {
        match words {
            ["parallel"] => Directive::Parallel,
            ["parallel", "for"] => Directive::ParallelFor,
            ["for"] => Directive::For,
            ["simd"] => Directive::Simd,
            ["target", "teams", "distribute"] => Directive::TargetTeamsDistribute,
            ["target", "teams", "distribute", "parallel", "for"] => {
                Directive::TargetTeamsDistributeParallelFor
            }
            _ => Directive::Other(words.join(" ")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReductionOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "&")]
    BitAnd,
    #[serde(rename = "|")]
    BitOr,
    #[serde(rename = "^")]
    BitXor,
    #[serde(rename = "&&")]
    LogAnd,
    #[serde(rename = "||")]
    LogOr,
    #[serde(rename = "min")]
    Min,
    #[serde(rename = "max")]
    Max,
}

impl ReductionOp {
    pub const ALL: [ReductionOp; 10] = [
        ReductionOp::Add,
        ReductionOp::Sub,
        ReductionOp::Mul,
        ReductionOp::BitAnd,
        ReductionOp::BitOr,
        ReductionOp::BitXor,
        ReductionOp::LogAnd,
        ReductionOp::LogOr,
        ReductionOp::Min,
        ReductionOp::Max,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ReductionOp::Add => "+",
            ReductionOp::Sub => "-",
            ReductionOp::Mul => "*",
            ReductionOp::BitAnd => "&",
            ReductionOp::BitOr => "|",
            ReductionOp::BitXor => "^",
            ReductionOp::LogAnd => "&&",
            ReductionOp::LogOr => "||",
            ReductionOp::Min => "min",
            ReductionOp::Max => "max",
        }
    }

    pub fn from_symbol(s: &str) -> Option<ReductionOp> {
        ReductionOp::ALL.into_iter().find(|op| op.symbol() == s.trim())
    }
}

impl fmt::Display for ReductionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clause {
    Private(Vec<String>),
    FirstPrivate(Vec<String>),
    LastPrivate(Vec<String>),
    Reduction { op: ReductionOp, vars: Vec<String> },
    Simd,
    Schedule { kind: String, chunk: Option<String> },
    NumThreads(String),
    /// Unrecognized clause text, verbatim (`collapse(2)`, `nowait`).
    Other(String),
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Private(v) => write!(f, "private({})", v.join(", ")),
            Clause::FirstPrivate(v) => write!(f, "firstprivate({})", v.join(", ")),
            Clause::LastPrivate(v) => write!(f, "lastprivate({})", v.join(", ")),
            Clause::Reduction { op, vars } => write!(f, "reduction({}:{})", op, vars.join(", ")),
            Clause::Simd => f.write_str("simd"),
            Clause::Schedule { kind, chunk: None } => write!(f, "schedule({kind})"),
            Clause::Schedule { kind, chunk: Some(c) } => write!(f, "schedule({kind}, {c})"),
            Clause::NumThreads(e) => write!(f, "num_threads({e})"),
            Clause::Other(raw) => f.write_str(raw),
        }
    }
}

/// A parsed `#pragma omp` line. Equality compares the structure only; the
/// verbatim `raw_text` is carried along for provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmpPragma {
    pub directive: Directive,
    pub clauses: Vec<Clause>,
    pub raw_text: String,
}

impl PartialEq for OmpPragma {
    fn eq(&self, other: &Self) -> bool {
        self.directive == other.directive && self.clauses == other.clauses
    }
}

impl Eq for OmpPragma {}

impl OmpPragma {
    pub fn new(directive: Directive, clauses: Vec<Clause>) -> Self {
        let mut p = OmpPragma {
            directive,
            clauses,
            raw_text: String::new(),
        };
        p.raw_text = p.render();
        p
    }

    /// Canonical single-line rendering.
    pub fn render(&self) -> String {
        let mut out = format!("#pragma omp {}", self.directive.words());
        for c in &self.clauses {
            out.push(' ');
            out.push_str(&c.to_string());
        }
        out
    }

    pub fn has_simd(&self) -> bool {
        self.clauses.iter().any(|c| matches!(c, Clause::Simd))
    }
}

impl fmt::Display for OmpPragma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

const DIRECTIVE_WORDS: &[&str] = &[
    "parallel", "for", "do", "simd", "target", "teams", "distribute", "loop", "taskloop",
    "sections", "section", "single", "master", "masked", "critical", "atomic", "barrier", "task",
    "taskwait", "taskgroup", "taskyield", "ordered", "flush", "declare", "data", "enter", "exit",
    "update", "threadprivate", "cancel", "cancellation", "point", "requires", "scan",
    "metadirective", "tile", "unroll", "depobj", "assume", "assumes", "begin", "end", "interop",
    "dispatch", "error", "nothing", "scope", "workshare", "read", "write", "capture", "compare",
];

/// Directive words that act as clauses when they follow another directive word.
const CLAUSE_WORDS: &[&str] = &["ordered"];

/// Words that may only open a directive (they are clause names elsewhere).
const LEADING_ONLY_WORDS: &[&str] = &["allocate"];

/// Parse one `#pragma omp ...` directive. Backslash continuations are joined
/// first; unknown clauses are preserved as [`Clause::Other`].
pub fn parse_omp_pragma(text: &str) -> Result<OmpPragma, ParseError> {
    let raw_text = text.to_owned();
    let joined = join_continuations(text);
    let body = strip_omp_prefix(&joined).ok_or_else(|| ParseError::NotAPragma(text.trim().to_owned()))?;

    let mut sc = Scanner::new(body);
    let mut words: Vec<&str> = Vec::new();
    loop {
        sc.skip_ws();
        let save = sc.pos;
        let Some(w) = sc.word() else { break };
        let accept = if words.is_empty() {
            DIRECTIVE_WORDS.contains(&w) || LEADING_ONLY_WORDS.contains(&w)
        } else if words.last() == Some(&"declare") {
            true
        } else {
            DIRECTIVE_WORDS.contains(&w) && !CLAUSE_WORDS.contains(&w)
        };
        if !accept {
            sc.pos = save;
            break;
        }
        words.push(w);
    }
    if words.is_empty() {
        let first = body.split_whitespace().next().unwrap_or("").to_owned();
        return Err(ParseError::UnknownDirective(first));
    }

    let mut clauses = Vec::new();
    let mut directive = Directive::from_words(&words);
    if let Directive::Other(_) = directive {
        if words.len() > 1 && words.last() == Some(&"simd") {
            let base = Directive::from_words(&words[..words.len() - 1]);
            if base.takes_simd() {
                directive = base;
                clauses.push(Clause::Simd);
            }
        }
    }

    loop {
        sc.skip_ws_and_commas();
        if sc.at_end() {
            break;
        }
        let start = sc.pos;
        if sc.peek() == Some('(') {
            sc.balanced_group(body)?;
            clauses.push(Clause::Other(body[start..sc.pos].to_owned()));
            continue;
        }
        let Some(word) = sc.word() else {
            return Err(ParseError::MalformedClause {
                text: body.trim().to_owned(),
                reason: format!("unexpected character {:?}", sc.peek().unwrap_or(' ')),
            });
        };
        let after_word = sc.pos;
        sc.skip_ws();
        let inner = if sc.peek() == Some('(') {
            Some(sc.balanced_group(body)?)
        } else {
            sc.pos = after_word;
            None
        };
        let raw = body[start..sc.pos].to_owned();
        clauses.push(build_clause(word, inner, raw, directive.takes_simd(), body)?);
    }

    Ok(OmpPragma {
        directive,
        clauses,
        raw_text,
    })
}

/// Body text after `#pragma omp`, or `None` when the prefix is missing.
fn strip_omp_prefix(text: &str) -> Option<&str> {
    let rest = text.trim_start().strip_prefix('#')?;
    let rest = rest.trim_start().strip_prefix("pragma")?;
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let rest = rest.trim_start().strip_prefix("omp")?;
    if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
        return None;
    }
    Some(rest.trim())
}

fn build_clause(
    word: &str,
    inner: Option<&str>,
    raw: String,
    loop_construct: bool,
    whole: &str,
) -> Result<Clause, ParseError> {
    let malformed = |reason: &str| ParseError::MalformedClause {
        text: whole.trim().to_owned(),
        reason: format!("{word}: {reason}"),
    };
    let clause = match (word, inner) {
        ("simd", None) if loop_construct => Clause::Simd,
        ("private" | "firstprivate", Some(inner)) => {
            let vars = var_list(inner).ok_or_else(|| malformed("empty variable list"))?;
            if word == "private" {
                Clause::Private(vars)
            } else {
                Clause::FirstPrivate(vars)
            }
        }
        ("lastprivate", Some(inner)) => {
            if top_level_colon(inner).is_some() {
                Clause::Other(raw)
            } else {
                Clause::LastPrivate(var_list(inner).ok_or_else(|| malformed("empty variable list"))?)
            }
        }
        ("reduction", Some(inner)) => {
            let colon = top_level_colon(inner).ok_or_else(|| malformed("missing `:`"))?;
            let op_text = inner[..colon].trim();
            let vars = var_list(&inner[colon + 1..]).ok_or_else(|| malformed("empty variable list"))?;
            match ReductionOp::from_symbol(op_text) {
                Some(op) if !op_text.contains(',') => Clause::Reduction { op, vars },
                // modifiers (inscan, task) or user-defined reductions
                _ => Clause::Other(raw),
            }
        }
        ("schedule", Some(inner)) => {
            let (kind, chunk) = match split_top_level(inner, ',').as_slice() {
                [kind] => (kind.trim().to_owned(), None),
                [kind, chunk] => (kind.trim().to_owned(), Some(chunk.trim().to_owned())),
                _ => return Err(malformed("expected kind[, chunk]")),
            };
            if kind.is_empty() || chunk.as_deref() == Some("") {
                return Err(malformed("empty schedule argument"));
            }
            Clause::Schedule { kind, chunk }
        }
        ("num_threads", Some(inner)) => {
            let e = inner.trim();
            if e.is_empty() {
                return Err(malformed("empty expression"));
            }
            Clause::NumThreads(e.to_owned())
        }
        _ => Clause::Other(raw),
    };
    Ok(clause)
}

fn var_list(inner: &str) -> Option<Vec<String>> {
    let vars: Vec<String> = split_top_level(inner, ',')
        .into_iter()
        .map(|v| v.trim().to_owned())
        .collect();
    if vars.iter().any(String::is_empty) {
        None
    } else {
        Some(vars)
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// First `:` at nesting depth zero that is not part of `::`.
fn top_level_colon(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut depth = 0i32;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth -= 1,
            b':' if depth == 0 => {
                if bytes.get(i + 1) == Some(&b':') {
                    i += 2;
                    continue;
                }
                return Some(i);
            }
            _ => {}
        }
        i += 1;
    }
    None
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner { src, pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn skip_ws_and_commas(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace() || c == ',') {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Option<&'a str> {
        let start = self.pos;
        let rest = &self.src[start..];
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        self.pos += len;
        Some(&self.src[start..start + len])
    }

    /// Consume `( ... )` and return the text between the parentheses.
    fn balanced_group(&mut self, whole: &str) -> Result<&'a str, ParseError> {
        debug_assert_eq!(self.peek(), Some('('));
        let open = self.pos;
        let mut depth = 0i32;
        for (off, c) in self.src[open..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos = open + off + 1;
                        return Ok(&self.src[open + 1..open + off]);
                    }
                }
                _ => {}
            }
        }
        Err(ParseError::MalformedClause {
            text: whole.trim().to_owned(),
            reason: "unbalanced parentheses".into(),
        })
    }
}
