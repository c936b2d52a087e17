use crate::parse::{NodeId, SyntaxTree};

/// Literal kinds that anonymization turns into identifiers.
const LITERALS: &[&str] = &[
    "number_literal",
    "string_literal",
    "char_literal",
    "concatenated_string",
    "raw_string_literal",
    "user_defined_literal",
];

const NAMES: &[&str] = &[
    "identifier",
    "type_identifier",
    "field_identifier",
    "statement_identifier",
    "namespace_identifier",
    "preproc_arg",
];

/// Check that `anon` has the same shape as `orig`, ignoring identifier
/// spellings, literal values and comments.
pub fn isomorphic(orig: &SyntaxTree, anon: &SyntaxTree) -> Result<(), String> {
    let mut stack = vec![(orig.root(), anon.root())];
    while let Some((a, b)) = stack.pop() {
        let (ka, kb) = (orig.kind(a), anon.kind(b));
        if LITERALS.contains(&ka) && (kb == "identifier" || kb == ka) {
            continue;
        }
        if ka != kb {
            return Err(format!("`{ka}` vs `{kb}` at byte {}", orig.span(a).start));
        }
        if NAMES.contains(&ka) {
            continue;
        }
        let ca = structural_children(orig, a);
        let cb = structural_children(anon, b);
        if ca.len() != cb.len() {
            return Err(format!(
                "`{ka}` has {} children vs {} at byte {}",
                ca.len(),
                cb.len(),
                orig.span(a).start
            ));
        }
        if ca.is_empty() && orig.text(a) != anon.text(b) {
            return Err(format!("token `{}` vs `{}`", orig.text(a), anon.text(b)));
        }
        stack.extend(ca.into_iter().zip(cb).rev());
    }
    Ok(())
}

fn structural_children(tree: &SyntaxTree, id: NodeId) -> Vec<NodeId> {
    tree.children(id)
        .iter()
        .copied()
        .filter(|&c| tree.kind(c) != "comment" && !tree.text(c).trim().is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_str, Language};

    #[test]
    fn renaming_is_isomorphic() {
        let a = parse_str("int f(int x) { /* c */ return x + 1; }", Language::C);
        let b = parse_str("int func_1 ( int var_2 ) {\nreturn var_2 + num_3 ;\n}\n", Language::C);
        assert_eq!(isomorphic(&a, &b), Ok(()));
    }

    #[test]
    fn structure_change_detected() {
        let a = parse_str("int f(int x) { return x + 1; }", Language::C);
        let b = parse_str("int f(int x) { return x * 1; }", Language::C);
        assert!(isomorphic(&a, &b).is_err());
        let c = parse_str("int f(int x) { return (x + 1); }", Language::C);
        assert!(isomorphic(&a, &c).is_err());
    }
}
