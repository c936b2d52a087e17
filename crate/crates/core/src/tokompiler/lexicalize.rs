use serde::{Deserialize, Serialize};

use super::anonymize::{parse_replacement, AnonymizedUnit, Category};
use crate::parse::{code_tokens, lex_simple, parse_str, Language};

/// Line-break marker emitted after each preprocessor directive.
pub const NEWLINE: &str = "\n";

/// Lexicalized token sequence. Replacement tokens appear as three
/// sub-tokens (`var`, `_`, `12`); directive ends appear as [`NEWLINE`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenStream {
    pub tokens: Vec<String>,
}

impl TokenStream {
    /// Tokens excluding line-break markers.
    pub fn token_count(&self) -> usize {
        self.tokens.iter().filter(|t| *t != NEWLINE).count()
    }

    /// Rejoin split replacements and render with single spaces.
    pub fn to_source(&self) -> String {
        let merged = merge_splits(&self.tokens);
        let mut out = String::new();
        for tok in &merged {
            if tok == NEWLINE {
                out.push('\n');
                continue;
            }
            if !(out.is_empty() || out.ends_with('\n')) {
                out.push(' ');
            }
            out.push_str(tok);
        }
        out
    }
}

fn merge_splits(tokens: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 2 < tokens.len() && tokens[i + 1] == "_" && Category::from_prefix(&tokens[i]).is_some() {
            let joined = format!("{}_{}", tokens[i], tokens[i + 2]);
            if parse_replacement(&joined).is_some() {
                out.push(joined);
                i += 3;
                continue;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}

fn split_into(out: &mut Vec<String>, tok: &str, is_replacement: &dyn Fn(&str) -> bool) {
    if is_replacement(tok) {
        let (prefix, digits) = tok.split_once('_').expect("replacement has an underscore");
        out.push(prefix.to_owned());
        out.push("_".to_owned());
        out.push(digits.to_owned());
    } else {
        out.push(tok.to_owned());
    }
}

fn lexicalize_with(code: &str, language: Language, is_replacement: &dyn Fn(&str) -> bool) -> TokenStream {
    let tree = parse_str(code, language);
    let mut tokens = Vec::new();
    for t in code_tokens(&tree) {
        if t.directive_arg {
            for sub in lex_simple(&t.text) {
                split_into(&mut tokens, &sub, is_replacement);
            }
        } else {
            split_into(&mut tokens, &t.text, is_replacement);
        }
        if t.ends_directive {
            tokens.push(NEWLINE.to_owned());
        }
    }
    TokenStream { tokens }
}

/// Token stream of an anonymized unit, with map replacements split.
pub fn lexicalize(anon: &AnonymizedUnit) -> TokenStream {
    lexicalize_with(&anon.code, anon.origin.language, &|t| anon.map.is_replacement(t))
}

/// Token stream of arbitrary source without any splitting.
pub fn lexicalize_source(code: &str, language: Language) -> TokenStream {
    lexicalize_with(code, language, &|_| false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[&str]) -> TokenStream {
        TokenStream {
            tokens: v.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn to_source_merges_triples() {
        let s = ts(&["int", "func", "_", "252", "(", ")", "{", "}"]);
        assert_eq!(s.to_source(), "int func_252 ( ) { }");
        assert_eq!(s.token_count(), 8);
    }

    #[test]
    fn newline_markers() {
        let s = lexicalize_source("#pragma omp parallel for private(i)\nfor(;;);\n", Language::C);
        assert_eq!(
            s.tokens,
            ["#pragma", "omp", "parallel", "for", "private", "(", "i", ")", "\n", "for", "(", ";", ";", ")", ";"]
        );
        assert_eq!(s.token_count(), 14);
        assert!(s.to_source().starts_with("#pragma omp parallel for private ( i )\nfor"));
    }
}
