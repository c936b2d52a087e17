//! Grammar-based parsing of C and C++ sources and OpenMP pragmas.

mod functions;
mod pragma;
mod sites;
mod tokens;
mod tree;

pub use functions::{extract_functions, function_declarator, function_name, FileId, FunctionUnit};
pub use pragma::{parse_omp_pragma, Clause, Directive, OmpPragma, ReductionOp};
pub use sites::{find_pragma_sites, strip_pragmas, OrphanPragma, PragmaSite, SiteScan, StripResult};
pub(crate) use sites::{is_omp_pragma, line_extent, pragmas_above, pragma_text, LOOP_KINDS};
pub use tokens::{
    code_tokens, code_tokens_under, is_keyword, join_continuations, lex_simple, regenerate,
    render_canonical, CodeToken, KEYWORDS,
};
pub use tree::{decode_source, parse_source, parse_str, Language, Node, NodeId, Span, SyntaxTree};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("undecodable source: {0}")]
    Decode(String),
    #[error("not an OpenMP pragma: {0:?}")]
    NotAPragma(String),
    #[error("unknown OpenMP directive `{0}`")]
    UnknownDirective(String),
    #[error("malformed clause in `{text}`: {reason}")]
    MalformedClause { text: String, reason: String },
    #[error("source has {errors} syntax errors (limit {limit})")]
    ParseFailure { errors: usize, limit: usize },
}
