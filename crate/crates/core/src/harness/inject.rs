use super::HarnessError;
use crate::parse::{
    line_extent, parse_omp_pragma, parse_str, pragmas_above, Language, Span, SyntaxTree, LOOP_KINDS,
};

/// Replace the pragmas of the loop at `loop_span` with `pragma` (or remove
/// them when `None`). The new line takes the loop's indentation.
pub fn inject_pragma(source: &str, language: Language, loop_span: Span, pragma: Option<&str>) -> Result<String, HarnessError> {
    inject_many(source, language, &[(loop_span, pragma.map(str::to_owned))])
}

/// Apply several loop edits against the same original text.
pub fn inject_many(source: &str, language: Language, edits: &[(Span, Option<String>)]) -> Result<String, HarnessError> {
    let tree = parse_str(source, language);
    let mut cuts: Vec<(Span, String)> = Vec::new();
    for (span, pragma) in edits {
        cuts.extend(loop_edit(&tree, *span, pragma.as_deref())?);
    }
    cuts.sort_by_key(|(s, _)| (s.start, s.end));
    let mut out = String::with_capacity(source.len() + 64);
    let mut pos = 0;
    for (span, text) in cuts {
        if span.start < pos {
            continue;
        }
        out.push_str(&source[pos..span.start]);
        out.push_str(&text);
        pos = span.end;
    }
    out.push_str(&source[pos..]);
    let before = tree.error_count();
    let after = parse_str(&out, language).error_count();
    if after > before {
        return Err(HarnessError::InvalidGeneration {
            pragma: edits.iter().filter_map(|(_, p)| p.clone()).collect::<Vec<_>>().join(" / "),
            reason: format!("patched file has {after} syntax errors (was {before})"),
        });
    }
    Ok(out)
}

fn loop_edit(tree: &SyntaxTree, span: Span, pragma: Option<&str>) -> Result<Vec<(Span, String)>, HarnessError> {
    let src = tree.source();
    let loop_id = tree.find_exact(span, LOOP_KINDS).ok_or(HarnessError::SpanDrift(span))?;
    let mut cuts: Vec<(Span, String)> = pragmas_above(tree, loop_id)
        .into_iter()
        .map(|p| (line_extent(src, tree.span(p)), String::new()))
        .collect();
    if let Some(p) = pragma {
        let p = p.trim();
        parse_omp_pragma(p).map_err(|e| HarnessError::InvalidGeneration {
            pragma: p.to_owned(),
            reason: e.to_string(),
        })?;
        let line_start = src[..span.start].rfind('\n').map_or(0, |i| i + 1);
        let lead = &src[line_start..span.start];
        let text = if lead.trim().is_empty() {
            (Span::new(line_start, line_start), format!("{lead}{p}\n"))
        } else {
            (Span::new(span.start, span.start), format!("\n{p}\n"))
        };
        cuts.push(text);
    }
    Ok(cuts)
}
