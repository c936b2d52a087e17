//! Token streams over syntax trees, a small standalone C lexer for
//! preprocessor arguments, and the canonical code layout.

use super::tree::{NodeId, SyntaxTree};

/// One lexical token taken from a tree leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeToken {
    pub text: String,
    pub node: NodeId,
    /// `preproc_arg` text: opaque to the grammar, lexed separately when needed.
    pub directive_arg: bool,
    /// Last token of a preprocessor line.
    pub ends_directive: bool,
}

impl CodeToken {
    pub fn starts_directive(&self) -> bool {
        self.text.starts_with('#')
    }
}

/// Comment-free token stream of a tree. Backslash continuations inside
/// directive arguments are joined.
pub fn code_tokens(tree: &SyntaxTree) -> Vec<CodeToken> {
    code_tokens_under(tree, tree.root())
}

pub fn code_tokens_under(tree: &SyntaxTree, start: NodeId) -> Vec<CodeToken> {
    let src = tree.source();
    let mut out: Vec<CodeToken> = Vec::new();
    let mut in_directive = false;
    let mut prev_end: Option<usize> = None;
    for leaf in tree.leaves_under(start) {
        let node = tree.node(leaf);
        let text = &src[node.span.range()];
        if in_directive {
            let gap = prev_end.map(|e| &src[e..node.span.start]).unwrap_or("");
            if has_hard_newline(gap) {
                if let Some(last) = out.last_mut() {
                    last.ends_directive = true;
                }
                in_directive = false;
            }
        }
        prev_end = Some(node.span.end);
        if node.kind == "comment" {
            continue;
        }
        if text.trim().is_empty() {
            // grammar-level newline tokens terminate directives
            if in_directive && text.contains('\n') {
                if let Some(last) = out.last_mut() {
                    last.ends_directive = true;
                }
                in_directive = false;
            }
            continue;
        }
        let directive_arg = node.kind == "preproc_arg";
        let text = if directive_arg {
            join_continuations(text).trim().to_owned()
        } else {
            text.to_owned()
        };
        if text.starts_with('#') {
            in_directive = true;
        }
        out.push(CodeToken {
            text,
            node: leaf,
            directive_arg,
            ends_directive: false,
        });
    }
    if in_directive {
        if let Some(last) = out.last_mut() {
            last.ends_directive = true;
        }
    }
    out
}

fn has_hard_newline(gap: &str) -> bool {
    let bytes = gap.as_bytes();
    bytes.iter().enumerate().any(|(i, &b)| {
        b == b'\n' && {
            let before = &gap[..i];
            !before.trim_end_matches('\r').ends_with('\\')
        }
    })
}

/// Remove backslash-newline continuations, keeping one space in their place.
pub fn join_continuations(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            let mut lookahead = chars.clone();
            if lookahead.peek() == Some(&'\r') {
                lookahead.next();
            }
            if lookahead.peek() == Some(&'\n') {
                lookahead.next();
                chars = lookahead;
                out.push(' ');
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Lay out tokens in the canonical style: single spaces between tokens,
/// newline after `{`, `}` and `;`, preprocessor directives on their own lines.
pub fn render_canonical<'a, I>(tokens: I) -> String
where
    I: IntoIterator<Item = (&'a str, bool)>,
{
    let mut out = String::new();
    let mut at_line_start = true;
    for (text, ends_directive) in tokens {
        if text.starts_with('#') && !at_line_start {
            out.push('\n');
            at_line_start = true;
        }
        if !at_line_start {
            out.push(' ');
        }
        out.push_str(text);
        if ends_directive || matches!(text, "{" | "}" | ";") {
            out.push('\n');
            at_line_start = true;
        } else {
            at_line_start = false;
        }
    }
    if !at_line_start {
        out.push('\n');
    }
    out
}

/// Canonical, comment-free regeneration of a whole tree.
pub fn regenerate(tree: &SyntaxTree) -> String {
    let toks = code_tokens(tree);
    render_canonical(toks.iter().map(|t| (t.text.as_str(), t.ends_directive)))
}

const PUNCTUATORS: &[&str] = &[
    ">>=", "<<=", "->*", "...", "<=>", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "##", ".*",
];

/// Minimal C/C++ lexer used for opaque preprocessor text (pragma arguments,
/// macro bodies). Whitespace and continuations are skipped.
pub fn lex_simple(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() || b == b'\\' && bytes.get(i + 1).is_some_and(|c| *c == b'\n' || *c == b'\r') {
            i += 1;
            continue;
        }
        let start = i;
        if b.is_ascii_alphabetic() || b == b'_' || b >= 0x80 {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] >= 0x80) {
                i += 1;
            }
        } else if b.is_ascii_digit() || (b == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() {
                let c = bytes[i];
                let exponent_sign = (c == b'+' || c == b'-') && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P');
                if c.is_ascii_alphanumeric() || c == b'.' || c == b'_' || c == b'\'' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
        } else if b == b'"' || b == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != b {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(bytes.len());
        } else if let Some(p) = PUNCTUATORS.iter().find(|p| text[i..].starts_with(**p)) {
            i += p.len();
        } else {
            // one full UTF-8 scalar
            i += text[i..].chars().next().map_or(1, char::len_utf8);
        }
        out.push(text[start..i].to_owned());
    }
    out
}

/// C and C++ reserved words plus the builtin type names tree-sitter treats as
/// primitive types.
pub const KEYWORDS: &[&str] = &[
    "alignas", "alignof", "asm", "auto", "bool", "break", "case", "catch", "char", "char16_t",
    "char32_t", "char8_t", "class", "co_await", "co_return", "co_yield", "concept", "const",
    "const_cast", "consteval", "constexpr", "constinit", "continue", "decltype", "default",
    "delete", "do", "double", "dynamic_cast", "else", "enum", "explicit", "export", "extern",
    "false", "float", "for", "friend", "goto", "if", "inline", "int", "long", "mutable",
    "namespace", "new", "noexcept", "nullptr", "operator", "private", "protected", "public",
    "register", "reinterpret_cast", "requires", "restrict", "return", "short", "signed", "sizeof",
    "static", "static_assert", "static_cast", "struct", "switch", "template", "this",
    "thread_local", "throw", "true", "try", "typedef", "typeid", "typename", "union", "unsigned",
    "using", "virtual", "void", "volatile", "wchar_t", "while", "_Alignas", "_Alignof",
    "_Atomic", "_Bool", "_Complex", "_Generic", "_Imaginary", "_Noreturn", "_Static_assert",
    "_Thread_local", "size_t", "NULL",
];

pub fn is_keyword(token: &str) -> bool {
    KEYWORDS.contains(&token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_str, Language};

    #[test]
    fn comments_are_dropped() {
        let t = parse_str("int x = 1; // one\n/* two */ int y;", Language::C);
        let toks: Vec<String> = code_tokens(&t).into_iter().map(|t| t.text).collect();
        assert_eq!(toks, ["int", "x", "=", "1", ";", "int", "y", ";"]);
    }

    #[test]
    fn directive_lines_are_terminated() {
        let src = "void f(){\n#pragma omp parallel for \\\n private(i)\nfor(;;){}\n}\n";
        let t = parse_str(src, Language::C);
        let toks = code_tokens(&t);
        let arg = toks.iter().find(|t| t.directive_arg).unwrap();
        assert_eq!(arg.text, "omp parallel for   private(i)");
        assert!(arg.ends_directive);
        let out = regenerate(&t);
        assert!(out.contains("\n#pragma omp parallel for   private(i)\nfor"), "{out}");
        assert_eq!(parse_str(&out, Language::C).error_count(), 0);
    }

    #[test]
    fn canonical_layout() {
        let t = parse_str("int main() { int r[2800 + 1]; }", Language::C);
        assert_eq!(regenerate(&t), "int main ( ) {\nint r [ 2800 + 1 ] ;\n}\n");
    }

    #[test]
    fn string_with_slashes_survives() {
        let t = parse_str("char *s = \"http://x\"; // c", Language::C);
        assert_eq!(regenerate(&t), "char * s = \"http://x\" ;\n");
    }

    #[test]
    fn simple_lexer() {
        assert_eq!(
            lex_simple("omp parallel for reduction(+:s) private(a,b) num_threads(4)"),
            [
                "omp", "parallel", "for", "reduction", "(", "+", ":", "s", ")", "private", "(",
                "a", ",", "b", ")", "num_threads", "(", "4", ")"
            ]
        );
        assert_eq!(lex_simple("x>>=1e-3"), ["x", ">>=", "1e-3"]);
    }

    #[test]
    fn continuations_join() {
        assert_eq!(join_continuations("a \\\n b"), "a   b");
        assert_eq!(join_continuations("a \\ b"), "a \\ b");
    }
}
