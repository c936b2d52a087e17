use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TokompilerError;
use crate::parse::{
    function_declarator, is_omp_pragma, parse_str, regenerate, FileId, FunctionUnit, NodeId, Span,
    SyntaxTree,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Func,
    Var,
    Arr,
    Num,
    Str,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Func,
        Category::Var,
        Category::Arr,
        Category::Num,
        Category::Str,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Category::Func => "func",
            Category::Var => "var",
            Category::Arr => "arr",
            Category::Num => "num",
            Category::Str => "str",
        }
    }

    pub fn from_prefix(p: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.prefix() == p)
    }
}

/// Split `arr_88` into (`Arr`, 88) when it has the replacement shape.
pub fn parse_replacement(token: &str) -> Option<(Category, u64)> {
    let (prefix, digits) = token.split_once('_')?;
    let cat = Category::from_prefix(prefix)?;
    if digits.is_empty() || digits.len() > 18 || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    Some((cat, digits.parse().ok()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokompilerConfig {
    /// Suffixes are drawn from `1..=suffix_range_max`.
    pub suffix_range_max: u64,
    /// Grow the range ×10 (repeatedly) instead of failing when it is too small.
    pub auto_extend: bool,
}

impl Default for TokompilerConfig {
    fn default() -> Self {
        TokompilerConfig {
            suffix_range_max: 1000,
            auto_extend: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenameEntry {
    pub original: String,
    pub replacement: String,
    pub category: Category,
}

/// Bijection from original symbols and literals to replacement tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenameMap {
    /// Entries in order of first occurrence in the unit.
    pub entries: Vec<RenameEntry>,
    pub seed: u64,
    /// Effective suffix range (after any auto-extension).
    pub suffix_range_max: u64,
    /// Identifiers of the origin that already look like replacements but were
    /// kept (undeclared externals).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preserved: Vec<String>,
}

impl RenameMap {
    pub fn replacement_of(&self, original: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.original == original)
            .map(|e| e.replacement.as_str())
    }

    pub fn original_of(&self, replacement: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.replacement == replacement)
            .map(|e| e.original.as_str())
    }

    pub fn is_replacement(&self, token: &str) -> bool {
        self.entries.iter().any(|e| e.replacement == token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizedUnit {
    pub code: String,
    pub map: RenameMap,
    pub origin: FunctionUnit,
}

/// Per-unit seed for reproducible parallel runs.
pub fn unit_seed(global_seed: u64, file_id: &FileId, span: Span) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update(file_id.as_str().as_bytes());
    h.update((span.start as u64).to_le_bytes());
    h.update((span.end as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Comment-free canonical rendering of a unit, without renaming.
pub fn normalize(unit: &FunctionUnit) -> String {
    regenerate(&parse_str(&unit.source_text, unit.language))
}

pub(crate) const NAME_KINDS: &[&str] = &["identifier", "type_identifier", "statement_identifier"];

const LITERAL_KINDS: &[&str] = &[
    "number_literal",
    "string_literal",
    "char_literal",
    "concatenated_string",
    "raw_string_literal",
    "user_defined_literal",
];

/// Directive nodes whose contents are opaque to renaming.
const OPAQUE_PREPROC: &[&str] = &[
    "preproc_include",
    "preproc_def",
    "preproc_function_def",
    "preproc_call",
    "preproc_defined",
];

/// Anonymize one function: rename declared symbols and literals to
/// category tokens with seeded random suffixes, re-parse, and regenerate the
/// code without comments.
pub fn anonymize(
    unit: &FunctionUnit,
    seed: u64,
    config: &TokompilerConfig,
) -> Result<AnonymizedUnit, TokompilerError> {
    let tree = parse_str(&unit.source_text, unit.language);
    let errors = tree.error_count();
    if errors > 0 {
        return Err(TokompilerError::UncleanInput(errors));
    }

    let symbols = collect_symbols(&tree);
    let map = assign_suffixes(&tree, &symbols, seed, config)?;
    let lookup: HashMap<&str, &str> = map
        .entries
        .iter()
        .map(|e| (e.original.as_str(), e.replacement.as_str()))
        .collect();

    let replaced = apply_edits(tree.source(), rename_edits(&tree, &symbols, &lookup));
    let reparsed = parse_str(&replaced, unit.language);
    let errors = reparsed.error_count();
    if errors > 0 {
        return Err(TokompilerError::ReparseFailure {
            errors,
            code: replaced,
        });
    }
    let code = regenerate(&reparsed);
    let errors = parse_str(&code, unit.language).error_count();
    if errors > 0 {
        return Err(TokompilerError::ReparseFailure { errors, code });
    }
    Ok(AnonymizedUnit {
        code,
        map,
        origin: unit.clone(),
    })
}

/// Declared names and literals of a unit, keyed by text.
#[derive(Debug, Default)]
pub(crate) struct Symbols {
    /// (original text, category) in first-occurrence order
    pub order: Vec<(String, Category)>,
    pub names: HashMap<String, Category>,
    /// literal nodes to replace
    pub literal_nodes: Vec<NodeId>,
}

impl Symbols {
    fn declare(&mut self, name: &str, cat: Category) {
        if name.is_empty() || self.names.contains_key(name) {
            return;
        }
        self.names.insert(name.to_owned(), cat);
        self.order.push((name.to_owned(), cat));
    }
}

pub(crate) fn collect_symbols(tree: &SyntaxTree) -> Symbols {
    let mut sym = Symbols::default();
    let mut declared_at: Vec<(usize, String, Category)> = Vec::new();
    for id in tree.preorder() {
        match tree.kind(id) {
            "function_definition" => {
                if let Some(fd) = function_declarator(tree, id) {
                    if let Some(name) = tree.child_by_field(fd, "declarator") {
                        if tree.kind(name) == "identifier" {
                            declared_at.push((tree.span(name).start, tree.text(name).to_owned(), Category::Func));
                        }
                    }
                }
            }
            "parameter_declaration" | "optional_parameter_declaration" | "for_range_loop" => {
                if let Some(d) = tree.child_by_field(id, "declarator") {
                    push_declarator(tree, d, &mut declared_at);
                }
            }
            "declaration" | "type_definition" | "alias_declaration" => {
                if is_extern(tree, id) {
                    continue;
                }
                for d in tree.children_by_field(id, "declarator").collect::<Vec<_>>() {
                    push_declarator(tree, d, &mut declared_at);
                }
                if let Some(name) = tree.child_by_field(id, "name") {
                    declared_at.push((tree.span(name).start, tree.text(name).to_owned(), Category::Var));
                }
            }
            "struct_specifier" | "union_specifier" | "enum_specifier" | "class_specifier" => {
                if let (Some(name), Some(_body)) =
                    (tree.child_by_field(id, "name"), tree.child_by_field(id, "body"))
                {
                    if tree.kind(name) == "type_identifier" {
                        declared_at.push((tree.span(name).start, tree.text(name).to_owned(), Category::Var));
                    }
                }
            }
            "enumerator" => {
                if let Some(name) = tree.child_by_field(id, "name") {
                    declared_at.push((tree.span(name).start, tree.text(name).to_owned(), Category::Var));
                }
            }
            "labeled_statement" => {
                if let Some(label) = tree.child_by_field(id, "label") {
                    declared_at.push((tree.span(label).start, tree.text(label).to_owned(), Category::Var));
                }
            }
            "type_parameter_declaration" | "variadic_type_parameter_declaration" => {
                for c in tree.named_children(id) {
                    if tree.kind(c) == "type_identifier" {
                        declared_at.push((tree.span(c).start, tree.text(c).to_owned(), Category::Var));
                    }
                }
            }
            "optional_type_parameter_declaration" => {
                if let Some(name) = tree.child_by_field(id, "name") {
                    declared_at.push((tree.span(name).start, tree.text(name).to_owned(), Category::Var));
                }
            }
            "structured_binding_declarator" => {
                for c in tree.named_children(id) {
                    if tree.kind(c) == "identifier" {
                        declared_at.push((tree.span(c).start, tree.text(c).to_owned(), Category::Var));
                    }
                }
            }
            _ => {}
        }
    }
    // declaration order by position keeps categories stable regardless of walk order
    declared_at.sort_by_key(|(pos, _, _)| *pos);
    let declared: HashMap<String, Category> = {
        let mut m = HashMap::new();
        for (_, name, cat) in &declared_at {
            m.entry(name.clone()).or_insert(*cat);
        }
        m
    };

    // Assign in order of first textual occurrence (names and literals mixed).
    for id in tree.preorder() {
        let kind = tree.kind(id);
        if NAME_KINDS.contains(&kind) {
            let text = tree.text(id);
            if let Some(&cat) = declared.get(text) {
                if renamable_name(tree, id) {
                    sym.declare(text, cat);
                }
            }
        } else if LITERAL_KINDS.contains(&kind) && replaceable_literal(tree, id) {
            let cat = if kind == "number_literal"
                || (kind == "user_defined_literal"
                    && tree.named_children(id).any(|c| tree.kind(c) == "number_literal"))
            {
                Category::Num
            } else {
                Category::Str
            };
            sym.declare(tree.text(id), cat);
            sym.literal_nodes.push(id);
        }
    }
    sym
}

fn is_extern(tree: &SyntaxTree, decl: NodeId) -> bool {
    tree.named_children(decl)
        .any(|c| tree.kind(c) == "storage_class_specifier" && tree.text(c) == "extern")
}

/// Follow a declarator down to its identifier. Local function prototypes
/// (a function declarator reached before any pointer) name externals and are
/// left alone.
fn push_declarator(tree: &SyntaxTree, mut d: NodeId, out: &mut Vec<(usize, String, Category)>) {
    let mut cat = Category::Var;
    let mut through_pointer = false;
    loop {
        match tree.kind(d) {
            "identifier" | "type_identifier" => {
                out.push((tree.span(d).start, tree.text(d).to_owned(), cat));
                return;
            }
            "array_declarator" => {
                if !through_pointer {
                    cat = Category::Arr;
                }
            }
            "pointer_declarator" | "reference_declarator" => through_pointer = true,
            "function_declarator" => {
                if !through_pointer {
                    return;
                }
            }
            "init_declarator" | "parenthesized_declarator" | "attributed_declarator" => {}
            _ => return,
        }
        let next = tree
            .child_by_field(d, "declarator")
            .or_else(|| {
                tree.named_children(d).find(|&c| {
                    matches!(
                        tree.kind(c),
                        "identifier"
                            | "type_identifier"
                            | "pointer_declarator"
                            | "reference_declarator"
                            | "array_declarator"
                            | "function_declarator"
                            | "parenthesized_declarator"
                            | "attributed_declarator"
                    )
                })
            });
        match next {
            Some(n) => d = n,
            None => return,
        }
    }
}

fn in_opaque_preproc(tree: &SyntaxTree, id: NodeId) -> bool {
    let mut child = id;
    for anc in tree.ancestors(id) {
        let kind = tree.kind(anc);
        if OPAQUE_PREPROC.contains(&kind) {
            return true;
        }
        if matches!(kind, "preproc_if" | "preproc_elif") && tree.node(child).field == Some("condition") {
            return true;
        }
        if matches!(kind, "preproc_ifdef" | "preproc_elifdef") && tree.node(child).field == Some("name") {
            return true;
        }
        child = anc;
    }
    false
}

/// Name occurrences that refer to the unit's own declarations.
fn renamable_name(tree: &SyntaxTree, id: NodeId) -> bool {
    if in_opaque_preproc(tree, id) {
        return false;
    }
    if let Some(p) = tree.parent(id) {
        // `ns::name` and `obj.template name` refer to other scopes
        if tree.kind(p) == "qualified_identifier" && tree.node(id).field == Some("name") {
            return false;
        }
    }
    true
}

fn replaceable_literal(tree: &SyntaxTree, id: NodeId) -> bool {
    if in_opaque_preproc(tree, id) {
        return false;
    }
    let Some(p) = tree.parent(id) else { return true };
    let pk = tree.kind(p);
    // pieces of a larger literal are replaced as a whole
    if matches!(pk, "concatenated_string" | "user_defined_literal") {
        return false;
    }
    // template arguments, asm operands and linkage strings must stay literal
    if matches!(
        pk,
        "template_argument_list" | "gnu_asm_expression" | "gnu_asm_output_operand" | "gnu_asm_input_operand" | "linkage_specification"
    ) {
        return false;
    }
    !tree.ancestors(id).any(|a| tree.kind(a) == "static_assert_declaration" || tree.kind(a).starts_with("gnu_asm"))
}

fn assign_suffixes(
    tree: &SyntaxTree,
    symbols: &Symbols,
    seed: u64,
    config: &TokompilerConfig,
) -> Result<RenameMap, TokompilerError> {
    // digits already used by replacement-shaped identifiers in the unit
    let mut taken: BTreeSet<u64> = BTreeSet::new();
    let mut preserved: BTreeSet<String> = BTreeSet::new();
    for leaf in tree.leaves() {
        let node = tree.node(leaf);
        let words: Vec<String> = if node.kind == "preproc_arg" {
            crate::parse::lex_simple(tree.text(leaf))
        } else {
            vec![tree.text(leaf).to_owned()]
        };
        for w in words {
            if let Some((_, n)) = parse_replacement(&w) {
                taken.insert(n);
                if !symbols.names.contains_key(&w) {
                    preserved.insert(w);
                }
            }
        }
    }

    let needed = symbols.order.len();
    let mut range_max = config.suffix_range_max.max(1);
    loop {
        let available = range_max.saturating_sub(taken.range(1..=range_max).count() as u64);
        if needed as u64 <= available {
            break;
        }
        if !config.auto_extend || range_max > u64::MAX / 10 {
            return Err(TokompilerError::SuffixExhaustion {
                needed,
                max: range_max,
            });
        }
        range_max *= 10;
    }

    let excluded: Vec<u64> = taken.range(1..=range_max).copied().collect();
    let pool = (range_max - excluded.len() as u64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, pool, needed);
    let entries = symbols
        .order
        .iter()
        .zip(picks.iter())
        .map(|((original, cat), idx)| {
            let suffix = nth_allowed(idx as u64 + 1, &excluded);
            RenameEntry {
                original: original.clone(),
                replacement: format!("{}_{}", cat.prefix(), suffix),
                category: *cat,
            }
        })
        .collect();
    Ok(RenameMap {
        entries,
        seed,
        suffix_range_max: range_max,
        preserved: preserved.into_iter().collect(),
    })
}

/// The `rank`-th positive integer (1-based) not in sorted `excluded`.
fn nth_allowed(rank: u64, excluded: &[u64]) -> u64 {
    let mut v = rank;
    for &e in excluded {
        if e <= v {
            v += 1;
        } else {
            break;
        }
    }
    v
}

fn rename_edits(
    tree: &SyntaxTree,
    symbols: &Symbols,
    lookup: &HashMap<&str, &str>,
) -> Vec<(Span, String)> {
    let mut edits = Vec::new();
    for id in tree.preorder() {
        let kind = tree.kind(id);
        if NAME_KINDS.contains(&kind) && symbols.names.contains_key(tree.text(id)) && renamable_name(tree, id) {
            edits.push((tree.span(id), lookup[tree.text(id)].to_owned()));
        } else if is_omp_pragma(tree, id) {
            if let Some(arg) = tree.child_by_field(id, "argument") {
                let text = tree.text(arg);
                let rewritten = substitute_words(text, |w| {
                    symbols
                        .names
                        .contains_key(w)
                        .then(|| lookup[w].to_owned())
                });
                if rewritten != text {
                    edits.push((tree.span(arg), rewritten));
                }
            }
        }
    }
    for &lit in &symbols.literal_nodes {
        edits.push((tree.span(lit), lookup[tree.text(lit)].to_owned()));
    }
    edits
}

/// Replace identifier-shaped words in opaque text; everything else is kept
/// byte for byte.
pub(crate) fn substitute_words<F>(text: &str, mut f: F) -> String
where
    F: FnMut(&str) -> Option<String>,
{
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            match f(word) {
                Some(r) => out.push_str(&r),
                None => out.push_str(word),
            }
        } else if b.is_ascii_digit() {
            // numbers like 1e5 or 0x1f are not words
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                i += 1;
            }
            out.push_str(&text[start..i]);
        } else if b == b'"' || b == b'\'' {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i] != b {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(bytes.len());
            out.push_str(&text[start..i]);
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    out
}

pub(crate) fn apply_edits(src: &str, mut edits: Vec<(Span, String)>) -> String {
    edits.sort_by_key(|(s, _)| s.start);
    let mut out = String::with_capacity(src.len());
    let mut pos = 0;
    for (span, text) in edits {
        if span.start < pos {
            // nested inside an edit already applied
            continue;
        }
        out.push_str(&src[pos..span.start]);
        out.push_str(&text);
        pos = span.end;
    }
    out.push_str(&src[pos..]);
    out
}

/// Identifier leaves that name declarations of the unit (for leak checks).
pub fn declared_identifiers(unit: &FunctionUnit) -> BTreeSet<String> {
    let tree = parse_str(&unit.source_text, unit.language);
    collect_symbols(&tree)
        .order
        .into_iter()
        .filter(|(_, c)| !matches!(c, Category::Num | Category::Str))
        .map(|(n, _)| n)
        .collect()
}

/// Restore original names and literals.
pub fn deanonymize(anon: &AnonymizedUnit) -> Result<String, TokompilerError> {
    let tree = parse_str(&anon.code, anon.origin.language);
    let reverse: HashMap<&str, &str> = anon
        .map
        .entries
        .iter()
        .map(|e| (e.replacement.as_str(), e.original.as_str()))
        .collect();
    let resolve = |w: &str| -> Result<Option<String>, TokompilerError> {
        if parse_replacement(w).is_none() {
            return Ok(None);
        }
        match reverse.get(w) {
            Some(orig) => Ok(Some((*orig).to_owned())),
            None if anon.map.preserved.iter().any(|p| p == w) => Ok(None),
            None => Err(TokompilerError::UnknownReplacement(w.to_owned())),
        }
    };

    let mut edits = Vec::new();
    for leaf in tree.leaves() {
        let node = tree.node(leaf);
        if node.kind == "preproc_arg" {
            let mut failure = None;
            let text = tree.text(leaf);
            let rewritten = substitute_words(text, |w| match resolve(w) {
                Ok(r) => r,
                Err(e) => {
                    failure.get_or_insert(e);
                    None
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            if rewritten != text {
                edits.push((node.span, rewritten));
            }
        } else if let Some(orig) = resolve(tree.text(leaf))? {
            edits.push((node.span, orig));
        }
    }
    Ok(apply_edits(tree.source(), edits))
}
