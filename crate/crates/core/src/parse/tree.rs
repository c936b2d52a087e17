//! Owned concrete syntax trees built from tree-sitter parses.
//!
//! Nothing outside this module touches tree-sitter types. Trees are copied
//! into a flat arena so they are immutable, `Send`, and cheap to walk.

use std::cell::RefCell;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::ParseError;

/// Source language of a file or unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    C,
    Cpp,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
        }
    }

    /// Language implied by a file extension (`.c/.h` and `.cc/.cpp/.cxx/.hpp`).
    pub fn from_extension(ext: &str) -> Option<Language> {
        match ext.to_ascii_lowercase().as_str() {
            "c" | "h" => Some(Language::C),
            "cc" | "cpp" | "cxx" | "hpp" => Some(Language::Cpp),
            _ => None,
        }
    }

    /// Node kind and field names of the grammar, interned once per process.
    fn names(self) -> &'static GrammarNames {
        static C: OnceLock<GrammarNames> = OnceLock::new();
        static CPP: OnceLock<GrammarNames> = OnceLock::new();
        let cell = match self {
            Language::C => &C,
            Language::Cpp => &CPP,
        };
        cell.get_or_init(|| GrammarNames::new(&self.grammar()))
    }

    fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::C => tree_sitter_c::LANGUAGE.into(),
            Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c" => Ok(Language::C),
            "cpp" | "c++" | "cxx" => Ok(Language::Cpp),
            other => Err(format!("unknown language `{other}` (expected c or cpp)")),
        }
    }
}

struct GrammarNames {
    kinds: Vec<&'static str>,
    fields: Vec<Option<&'static str>>,
}

impl GrammarNames {
    fn new(lang: &tree_sitter::Language) -> Self {
        let intern = |s: &str| -> &'static str { Box::leak(s.to_owned().into_boxed_str()) };
        let kinds = (0..lang.node_kind_count() as u16)
            .map(|id| lang.node_kind_for_id(id).map_or("", intern))
            .collect();
        let fields = (0..=lang.field_count() as u16)
            .map(|id| lang.field_name_for_id(id).map(intern))
            .collect();
        GrammarNames { kinds, fields }
    }

    fn kind(&self, node: &tree_sitter::Node<'_>) -> &'static str {
        if node.is_error() {
            return "ERROR";
        }
        self.kinds.get(node.kind_id() as usize).copied().unwrap_or("ERROR")
    }

    fn field(&self, id: Option<std::num::NonZeroU16>) -> Option<&'static str> {
        id.and_then(|f| self.fields.get(f.get() as usize).copied().flatten())
    }
}

/// Half-open byte range `[start, end)` into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

impl From<[usize; 2]> for Span {
    fn from(v: [usize; 2]) -> Self {
        Span::new(v[0], v[1])
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: &'static str,
    pub span: Span,
    pub named: bool,
    pub error: bool,
    pub missing: bool,
    /// Grammar field this node occupies in its parent (`declarator`, `body`, ...).
    pub field: Option<&'static str>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Node kinds whose whole text is one lexical token even though the grammar
/// gives them internal structure.
pub(crate) const ATOMIC_KINDS: &[&str] = &[
    "string_literal",
    "char_literal",
    "raw_string_literal",
    "system_lib_string",
    "user_defined_literal",
    "comment",
    "preproc_arg",
];

/// Immutable concrete syntax tree over an owned source string.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    source: String,
    language: Language,
    nodes: Vec<Node>,
}

impl SyntaxTree {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self, id: NodeId) -> &'static str {
        self.node(id).kind
    }

    pub fn span(&self, id: NodeId) -> Span {
        self.node(id).span
    }

    pub fn text(&self, id: NodeId) -> &str {
        &self.source[self.node(id).span.range()]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    /// First child occupying the given grammar field.
    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.children(id)
            .iter()
            .copied()
            .find(|&c| self.node(c).field == Some(field))
    }

    pub fn children_by_field<'a>(
        &'a self,
        id: NodeId,
        field: &'a str,
    ) -> impl Iterator<Item = NodeId> + 'a {
        self.children(id)
            .iter()
            .copied()
            .filter(move |&c| self.node(c).field == Some(field))
    }

    pub fn named_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children(id)
            .iter()
            .copied()
            .filter(|&c| self.node(c).named)
    }

    /// All node ids in pre-order (document order).
    pub fn preorder(&self) -> Vec<NodeId> {
        self.preorder_from(self.root())
    }

    pub fn preorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.children(id).iter().rev().copied());
        }
        out
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    pub fn has_ancestor_kind(&self, id: NodeId, kind: &str) -> bool {
        self.ancestors(id).any(|a| self.kind(a) == kind)
    }

    /// Number of ERROR and MISSING nodes. Zero means a clean parse.
    pub fn error_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.error || n.missing).count()
    }

    pub fn subtree_has_error(&self, id: NodeId) -> bool {
        self.preorder_from(id).into_iter().any(|n| {
            let node = self.node(n);
            node.error || node.missing
        })
    }

    /// Lexical leaves in document order: true leaves plus atomic token kinds
    /// (string and char literals, comments, preprocessor arguments).
    pub fn leaves(&self) -> Vec<NodeId> {
        self.leaves_under(self.root())
    }

    pub fn leaves_under(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            if node.is_leaf() || ATOMIC_KINDS.contains(&node.kind) {
                if !node.span.is_empty() {
                    out.push(id);
                }
            } else {
                stack.extend(node.children.iter().rev().copied());
            }
        }
        out
    }

    /// Smallest node of one of `kinds` whose span equals `span` exactly.
    pub fn find_exact(&self, span: Span, kinds: &[&str]) -> Option<NodeId> {
        self.preorder()
            .into_iter()
            .find(|&id| self.span(id) == span && kinds.contains(&self.kind(id)))
    }

    /// S-expression of named node kinds, for debugging and test failure output.
    pub fn sexp(&self, id: NodeId) -> String {
        let node = self.node(id);
        let named: Vec<_> = self.named_children(id).collect();
        if named.is_empty() {
            return format!("({})", node.kind);
        }
        let inner: Vec<String> = named.iter().map(|&c| self.sexp(c)).collect();
        format!("({} {})", node.kind, inner.join(" "))
    }
}

thread_local! {
    static PARSERS: RefCell<Option<(tree_sitter::Parser, tree_sitter::Parser)>> = const { RefCell::new(None) };
}

/// Decode raw file bytes: UTF-8 first, Latin-1 as fallback. Bytes containing
/// NUL are treated as binary and rejected.
pub fn decode_source(bytes: &[u8]) -> Result<String, ParseError> {
    if let Some(pos) = bytes.iter().position(|&b| b == 0) {
        return Err(ParseError::Decode(format!("NUL byte at offset {pos}")));
    }
    match std::str::from_utf8(bytes) {
        Ok(s) => Ok(s.to_owned()),
        Err(_) => Ok(bytes.iter().map(|&b| b as char).collect()),
    }
}

/// Parse raw bytes. Syntax errors never fail; they surface as ERROR nodes.
pub fn parse_source(bytes: &[u8], language: Language) -> Result<SyntaxTree, ParseError> {
    let text = decode_source(bytes)?;
    Ok(parse_text(text, language))
}

/// Parse already-decoded text.
pub fn parse_str(text: &str, language: Language) -> SyntaxTree {
    parse_text(text.to_owned(), language)
}

fn parse_text(source: String, language: Language) -> SyntaxTree {
    let ts_tree = PARSERS.with(|cell| {
        let mut slot = cell.borrow_mut();
        let (c, cpp) = slot.get_or_insert_with(|| {
            let mut c = tree_sitter::Parser::new();
            c.set_language(&Language::C.grammar())
                .expect("bundled C grammar is ABI compatible");
            let mut cpp = tree_sitter::Parser::new();
            cpp.set_language(&Language::Cpp.grammar())
                .expect("bundled C++ grammar is ABI compatible");
            (c, cpp)
        });
        let parser = match language {
            Language::C => c,
            Language::Cpp => cpp,
        };
        parser.reset();
        parser.parse(&source, None)
    });

    let Some(ts_tree) = ts_tree else {
        // Only reachable when parsing is cancelled; report one ERROR root.
        let len = source.len();
        return SyntaxTree {
            source,
            language,
            nodes: vec![Node {
                kind: "ERROR",
                span: Span::new(0, len),
                named: true,
                error: true,
                missing: false,
                field: None,
                parent: None,
                children: Vec::new(),
            }],
        };
    };

    let mut nodes: Vec<Node> = Vec::new();
    let names = language.names();
    let mut cursor = ts_tree.walk();
    // (parent, field) of the node the cursor points at
    let mut parents: Vec<NodeId> = Vec::new();
    'walk: loop {
        let ts = cursor.node();
        let id = NodeId(nodes.len() as u32);
        let parent = parents.last().copied();
        nodes.push(Node {
            kind: names.kind(&ts),
            span: Span::new(ts.start_byte(), ts.end_byte()),
            named: ts.is_named(),
            error: ts.is_error(),
            missing: ts.is_missing(),
            field: names.field(cursor.field_id()),
            parent,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            nodes[p.index()].children.push(id);
        }
        if cursor.goto_first_child() {
            parents.push(id);
            continue;
        }
        loop {
            if cursor.goto_next_sibling() {
                break;
            }
            if !cursor.goto_parent() {
                break 'walk;
            }
            parents.pop();
        }
    }
    drop(cursor);
    SyntaxTree {
        source,
        language,
        nodes,
    }
}
