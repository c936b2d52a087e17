use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::tree::{Language, NodeId, Span, SyntaxTree};
use super::parse_str;

/// Stable identifier of an origin file: lowercase hex SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FileId(pub String);

impl FileId {
    pub fn of_bytes(bytes: &[u8]) -> FileId {
        FileId(hex::encode(Sha256::digest(bytes)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for FileId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// One function definition lifted out of a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionUnit {
    pub source_text: String,
    pub language: Language,
    pub file_id: FileId,
    pub byte_span: Span,
    pub name: String,
}

/// Every function definition with a body, in byte order. Member functions in
/// classes and namespaces are included; template headers are kept with their
/// function. Definitions that do not re-parse cleanly on their own are skipped.
pub fn extract_functions(tree: &SyntaxTree, file_id: &FileId) -> Vec<FunctionUnit> {
    let mut units = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        if tree.kind(id) == "function_definition" {
            if let Some(unit) = unit_for(tree, id, file_id) {
                units.push(unit);
            }
            continue;
        }
        stack.extend(tree.children(id).iter().rev().copied());
    }
    units
}

fn unit_for(tree: &SyntaxTree, func: NodeId, file_id: &FileId) -> Option<FunctionUnit> {
    let body = tree.child_by_field(func, "body")?;
    if tree.kind(body) != "compound_statement" || tree.subtree_has_error(func) {
        return None;
    }
    let outer = match tree.parent(func) {
        Some(p) if tree.kind(p) == "template_declaration" => p,
        _ => func,
    };
    let span = tree.span(outer);
    let text = &tree.source()[span.range()];
    let name = function_name(tree, func).unwrap_or_default();
    if parse_str(text, tree.language()).error_count() != 0 {
        tracing::debug!(%name, %span, "function does not parse standalone; skipped");
        return None;
    }
    Some(FunctionUnit {
        source_text: text.to_owned(),
        language: tree.language(),
        file_id: file_id.clone(),
        byte_span: span,
        name,
    })
}

/// Declared name of a function definition (`f`, `A::g`, `operator+`).
pub fn function_name(tree: &SyntaxTree, func: NodeId) -> Option<String> {
    let declarator = function_declarator(tree, func)?;
    let name = tree.child_by_field(declarator, "declarator")?;
    Some(tree.text(name).to_owned())
}

/// The `function_declarator` of a definition, looking through pointer and
/// reference declarators on the return type.
pub fn function_declarator(tree: &SyntaxTree, func: NodeId) -> Option<NodeId> {
    let mut cur = tree.child_by_field(func, "declarator")?;
    loop {
        match tree.kind(cur) {
            "function_declarator" => return Some(cur),
            "pointer_declarator" | "reference_declarator" | "parenthesized_declarator"
            | "attributed_declarator" => {
                cur = tree
                    .child_by_field(cur, "declarator")
                    .or_else(|| tree.named_children(cur).last())?;
            }
            _ => return None,
        }
    }
}
