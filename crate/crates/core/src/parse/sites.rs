//! Locating `#pragma omp` lines in a tree, pairing them with the `for`
//! statement they annotate, and removing them.

use serde::{Deserialize, Serialize};

use super::functions::FileId;
use super::pragma::{parse_omp_pragma, OmpPragma};
use super::tree::{Language, NodeId, Span, SyntaxTree};
use super::{parse_str, ParseError};

pub(crate) const LOOP_KINDS: &[&str] = &["for_statement", "for_range_loop"];

/// An OpenMP pragma attached to a `for` loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PragmaSite {
    pub file_id: FileId,
    pub pragma: OmpPragma,
    pub loop_span: Span,
    pub pragma_span: Span,
}

/// A `#pragma omp` line that does not precede a `for` loop, or that failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrphanPragma {
    pub pragma_span: Span,
    pub raw_text: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteScan {
    pub sites: Vec<PragmaSite>,
    pub orphans: Vec<OrphanPragma>,
}

/// Is this node a `#pragma omp ...` preprocessor line?
pub(crate) fn is_omp_pragma(tree: &SyntaxTree, id: NodeId) -> bool {
    if tree.kind(id) != "preproc_call" {
        return false;
    }
    let Some(directive) = tree.child_by_field(id, "directive") else {
        return false;
    };
    let d: String = tree.text(directive).split_whitespace().collect();
    if d != "#pragma" {
        return false;
    }
    tree.child_by_field(id, "argument")
        .map(|a| {
            let arg = tree.text(a).trim_start();
            arg == "omp" || arg.starts_with("omp ") || arg.starts_with("omp\t") || arg.starts_with("omp\\")
        })
        .unwrap_or(false)
}

/// Text of a pragma node without its trailing newline.
pub(crate) fn pragma_text(tree: &SyntaxTree, id: NodeId) -> &str {
    tree.text(id).trim_end_matches(['\n', '\r'])
}

/// Every `#pragma omp` that directly precedes a `for` statement (possibly
/// stacked with other omp pragmas and comments in between) is one site.
pub fn find_pragma_sites(tree: &SyntaxTree, file_id: &FileId) -> SiteScan {
    let mut scan = SiteScan::default();
    for id in tree.preorder() {
        if !is_omp_pragma(tree, id) {
            continue;
        }
        let span = tree.span(id);
        let raw = pragma_text(tree, id).to_owned();
        let pragma = match parse_omp_pragma(&raw) {
            Ok(p) => p,
            Err(e) => {
                scan.orphans.push(OrphanPragma {
                    pragma_span: span,
                    raw_text: raw,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match annotated_loop(tree, id) {
            Some(loop_id) => scan.sites.push(PragmaSite {
                file_id: file_id.clone(),
                pragma,
                loop_span: tree.span(loop_id),
                pragma_span: span,
            }),
            None => scan.orphans.push(OrphanPragma {
                pragma_span: span,
                raw_text: raw,
                reason: "not followed by a for loop".into(),
            }),
        }
    }
    scan
}

/// The loop a pragma node annotates, skipping comments and further omp pragmas.
pub(crate) fn annotated_loop(tree: &SyntaxTree, pragma: NodeId) -> Option<NodeId> {
    let parent = tree.parent(pragma)?;
    let siblings = tree.children(parent);
    let pos = siblings.iter().position(|&s| s == pragma)?;
    for &next in &siblings[pos + 1..] {
        if tree.kind(next) == "comment" || is_omp_pragma(tree, next) {
            continue;
        }
        return LOOP_KINDS.contains(&tree.kind(next)).then_some(next);
    }
    None
}

/// The omp pragma nodes stacked directly above a loop, in source order.
pub(crate) fn pragmas_above(tree: &SyntaxTree, loop_id: NodeId) -> Vec<NodeId> {
    let Some(parent) = tree.parent(loop_id) else {
        return Vec::new();
    };
    let siblings = tree.children(parent);
    let Some(pos) = siblings.iter().position(|&s| s == loop_id) else {
        return Vec::new();
    };
    let mut found = Vec::new();
    for &prev in siblings[..pos].iter().rev() {
        if tree.kind(prev) == "comment" {
            continue;
        }
        if is_omp_pragma(tree, prev) {
            found.push(prev);
            continue;
        }
        break;
    }
    found.reverse();
    found
}

/// Byte range covering whole source lines of a directive, including leading
/// indentation and the terminating newline.
pub(crate) fn line_extent(src: &str, span: Span) -> Span {
    let line_start = src[..span.start].rfind('\n').map_or(0, |i| i + 1);
    let start = if src[line_start..span.start].trim().is_empty() {
        line_start
    } else {
        span.start
    };
    let mut end = span.end;
    if !src[..end].ends_with('\n') {
        if src[end..].starts_with("\r\n") {
            end += 2;
        } else if src[end..].starts_with('\n') {
            end += 1;
        }
    }
    Span::new(start, end)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripResult {
    pub serial_text: String,
    /// Removed pragmas that annotated loops, with spans into the original text.
    pub sites: Vec<PragmaSite>,
    pub orphans: Vec<OrphanPragma>,
}

/// Remove every `#pragma omp` line. Fails when the input has more syntax
/// errors than `max_errors`.
pub fn strip_pragmas(
    text: &str,
    language: Language,
    max_errors: usize,
) -> Result<StripResult, ParseError> {
    let tree = parse_str(text, language);
    let errors = tree.error_count();
    if errors > max_errors {
        return Err(ParseError::ParseFailure {
            errors,
            limit: max_errors,
        });
    }
    let file_id = FileId::of_bytes(text.as_bytes());
    let scan = find_pragma_sites(&tree, &file_id);
    let mut cuts: Vec<Span> = tree
        .preorder()
        .into_iter()
        .filter(|&id| is_omp_pragma(&tree, id))
        .map(|id| line_extent(text, tree.span(id)))
        .collect();
    cuts.sort();
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for cut in cuts {
        if cut.start < pos {
            continue;
        }
        out.push_str(&text[pos..cut.start]);
        pos = cut.end;
    }
    out.push_str(&text[pos..]);
    Ok(StripResult {
        serial_text: out,
        sites: scan.sites,
        orphans: scan.orphans,
    })
}
