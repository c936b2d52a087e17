use std::collections::{BTreeMap, BTreeSet};

use super::model::{Classification, ModelEndpoint};
use super::HarnessError;
use crate::ompdata::{LoopSample, NormalizedPragma, PragmaBase, Reduction};
use crate::parse::{parse_str, Language, NodeId, ReductionOp, SyntaxTree, LOOP_KINDS};

/// Calls that have no side effects on program state.
const PURE_CALLS: &[&str] = &[
    "abs", "labs", "fabs", "fabsf", "sqrt", "sqrtf", "cbrt", "exp", "expf", "exp2", "log", "logf",
    "log2", "log10", "pow", "powf", "sin", "sinf", "cos", "cosf", "tan", "tanh", "atan", "atan2",
    "asin", "acos", "floor", "floorf", "ceil", "ceilf", "round", "fmin", "fminf", "fmax", "fmaxf",
    "fmod", "hypot", "erf", "min", "max",
];

/// Conservative rule-based predictor. A loop is parallel only in canonical
/// form, without early exits, impure calls or loop-carried writes other than
/// recognizable reductions.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicModel;

impl ModelEndpoint for HeuristicModel {
    fn name(&self) -> String {
        "builtin:heuristic".into()
    }

    fn classify(&self, sample: &LoopSample) -> Result<Classification, HarnessError> {
        let a = analyze_loop(&sample.loop_code, sample.language);
        Ok(Classification {
            parallelizable: a.is_ok(),
            score: if a.is_ok() { 0.9 } else { 0.1 },
        })
    }

    fn generate(&self, sample: &LoopSample) -> Result<String, HarnessError> {
        analyze_loop(&sample.loop_code, sample.language)
            .map(|p| p.render())
            .map_err(|reason| HarnessError::InvalidGeneration {
                pragma: String::new(),
                reason,
            })
    }
}

/// Pragma for a parallelizable loop, or the reason it is not.
pub fn analyze_loop(code: &str, language: Language) -> Result<NormalizedPragma, String> {
    let wrapped = format!("void loop_wrapper__(void) {{\n{code}\n}}\n");
    let tree = parse_str(&wrapped, language);
    if tree.error_count() > 0 {
        return Err("loop does not parse".into());
    }
    let root_loop = tree
        .preorder()
        .into_iter()
        .find(|&n| LOOP_KINDS.contains(&tree.kind(n)))
        .ok_or("no loop")?;
    if tree.kind(root_loop) != "for_statement" {
        return Err("range-based loop".into());
    }
    let index = canonical_index(&tree, root_loop).ok_or("non-canonical loop")?;
    let body = tree.child_by_field(root_loop, "body").ok_or("empty loop")?;
    Analyzer::new(&tree, root_loop, body, index).run()
}

fn ident_text(tree: &SyntaxTree, id: NodeId) -> Option<&str> {
    (tree.kind(id) == "identifier").then(|| tree.text(id))
}

fn strip_parens(tree: &SyntaxTree, mut id: NodeId) -> NodeId {
    while tree.kind(id) == "parenthesized_expression" {
        match tree.named_children(id).next() {
            Some(c) => id = c,
            None => break,
        }
    }
    id
}

/// Loop variable of `for (i = a; i < b; i++)`-shaped loops.
fn canonical_index(tree: &SyntaxTree, lp: NodeId) -> Option<String> {
    let init = tree.child_by_field(lp, "initializer")?;
    let var = match tree.kind(init) {
        "declaration" => {
            let decls: Vec<NodeId> = tree.children_by_field(init, "declarator").collect();
            let [d] = decls[..] else { return None };
            (tree.kind(d) == "init_declarator")
                .then(|| tree.child_by_field(d, "declarator"))
                .flatten()
                .and_then(|n| ident_text(tree, n))?
                .to_owned()
        }
        "assignment_expression" => ident_text(tree, tree.child_by_field(init, "left")?)?.to_owned(),
        _ => return None,
    };
    let cond = strip_parens(tree, tree.child_by_field(lp, "condition")?);
    if tree.kind(cond) != "binary_expression" {
        return None;
    }
    let op = tree.text(tree.child_by_field(cond, "operator")?);
    if !matches!(op, "<" | "<=" | ">" | ">=" | "!=") {
        return None;
    }
    let l = tree.child_by_field(cond, "left")?;
    let r = tree.child_by_field(cond, "right")?;
    if ident_text(tree, l) != Some(&var) && ident_text(tree, r) != Some(&var) {
        return None;
    }
    let upd = strip_parens(tree, tree.child_by_field(lp, "update")?);
    let ok = match tree.kind(upd) {
        "update_expression" => ident_text(tree, tree.child_by_field(upd, "argument")?) == Some(&var),
        "assignment_expression" => {
            let target = ident_text(tree, tree.child_by_field(upd, "left")?) == Some(&var);
            let op = tree.text(tree.child_by_field(upd, "operator")?);
            target && matches!(op, "+=" | "-=" | "=")
        }
        _ => false,
    };
    ok.then_some(var)
}

struct Analyzer<'a> {
    tree: &'a SyntaxTree,
    root: NodeId,
    body: NodeId,
    index: String,
    locals: BTreeSet<String>,
    inner_indices: BTreeSet<String>,
    private: BTreeSet<String>,
    reductions: BTreeMap<String, ReductionOp>,
    /// nodes belonging to reduction updates (allowed occurrences of the var)
    reduction_nodes: BTreeSet<NodeId>,
    array_writes: BTreeMap<String, (String, NodeId)>,
}

impl<'a> Analyzer<'a> {
    fn new(tree: &'a SyntaxTree, root: NodeId, body: NodeId, index: String) -> Self {
        Analyzer {
            tree,
            root,
            body,
            index,
            locals: BTreeSet::new(),
            inner_indices: BTreeSet::new(),
            private: BTreeSet::new(),
            reductions: BTreeMap::new(),
            reduction_nodes: BTreeSet::new(),
            array_writes: BTreeMap::new(),
        }
    }

    fn run(mut self) -> Result<NormalizedPragma, String> {
        let t = self.tree;
        let nodes = t.preorder_from(self.body);
        for &n in &nodes {
            match t.kind(n) {
                "return_statement" => return Err("early return".into()),
                "goto_statement" => return Err("goto".into()),
                "break_statement" if self.breaks_root(n) => return Err("break out of the loop".into()),
                "declaration" => {
                    for id in t.preorder_from(n) {
                        if t.kind(id) == "identifier" && self.is_declarator_name(id) {
                            self.locals.insert(t.text(id).to_owned());
                        }
                    }
                }
                "for_statement" => {
                    if let Some(init) = t.child_by_field(n, "initializer") {
                        if t.kind(init) == "assignment_expression" {
                            if let Some(v) = t.child_by_field(init, "left").and_then(|l| ident_text(t, l)) {
                                self.inner_indices.insert(v.to_owned());
                            }
                        }
                    }
                }
                "call_expression" => {
                    let f = t.child_by_field(n, "function").ok_or("call")?;
                    match ident_text(t, f) {
                        Some(name) if PURE_CALLS.contains(&name) => {}
                        Some(name) => return Err(format!("call to `{name}`")),
                        None => return Err("indirect or member call".into()),
                    }
                }
                _ => {}
            }
        }
        for &n in &nodes {
            match t.kind(n) {
                "assignment_expression" => self.assignment(n)?,
                "update_expression" => {
                    let arg = strip_parens(t, t.child_by_field(n, "argument").ok_or("update")?);
                    self.write(n, arg, Some(ReductionOp::Add), None)?;
                }
                _ => {}
            }
        }
        self.check_arrays()?;
        self.check_reductions()?;
        self.private.extend(self.inner_indices.iter().filter(|v| !self.locals.contains(*v)).cloned());
        let mut ops: BTreeSet<ReductionOp> = self.reductions.values().copied().collect();
        if ops.len() > 1 {
            return Err("reductions with different operators".into());
        }
        let mut p = NormalizedPragma::plain(PragmaBase::ParallelFor);
        p.private_vars = self.private;
        if let Some(op) = ops.pop_first() {
            p.reduction = Some(Reduction {
                op,
                vars: self.reductions.into_keys().collect(),
            });
        }
        Ok(p)
    }

    fn breaks_root(&self, brk: NodeId) -> bool {
        self.tree
            .ancestors(brk)
            .find(|&a| {
                matches!(
                    self.tree.kind(a),
                    "for_statement" | "while_statement" | "do_statement" | "switch_statement" | "for_range_loop"
                )
            })
            == Some(self.root)
    }

    fn is_declarator_name(&self, id: NodeId) -> bool {
        self.tree.node(id).field == Some("declarator")
    }

    fn mentions(&self, id: NodeId, var: &str) -> bool {
        self.tree
            .preorder_from(id)
            .into_iter()
            .any(|n| ident_text(self.tree, n) == Some(var))
    }

    fn assignment(&mut self, n: NodeId) -> Result<(), String> {
        let t = self.tree;
        let lhs = strip_parens(t, t.child_by_field(n, "left").ok_or("assignment")?);
        let rhs = t.child_by_field(n, "right").ok_or("assignment")?;
        let op = t.text(t.child_by_field(n, "operator").ok_or("assignment")?);
        let red = match op {
            "+=" | "-=" => Some(ReductionOp::Add),
            "*=" => Some(ReductionOp::Mul),
            "&=" => Some(ReductionOp::BitAnd),
            "|=" => Some(ReductionOp::BitOr),
            "^=" => Some(ReductionOp::BitXor),
            "=" => None,
            _ => return Err(format!("operator `{op}`")),
        };
        self.write(n, lhs, red, Some((op, rhs)))
    }

    fn write(
        &mut self,
        stmt: NodeId,
        lhs: NodeId,
        compound: Option<ReductionOp>,
        assign: Option<(&str, NodeId)>,
    ) -> Result<(), String> {
        let t = self.tree;
        match t.kind(lhs) {
            "identifier" => {
                let v = t.text(lhs).to_owned();
                if v == self.index {
                    return Err("loop index modified".into());
                }
                if self.locals.contains(&v) || self.inner_indices.contains(&v) {
                    return Ok(());
                }
                let op = match assign {
                    None => compound,
                    Some((_, rhs)) if compound.is_some() => {
                        if self.mentions(rhs, &v) {
                            return Err(format!("`{v}` depends on itself"));
                        }
                        compound
                    }
                    Some((_, rhs)) => self.self_update(&v, rhs),
                };
                match op {
                    Some(op) => {
                        if self.reductions.get(&v).is_some_and(|o| *o != op) {
                            return Err(format!("mixed updates of `{v}`"));
                        }
                        self.reductions.insert(v, op);
                        self.reduction_nodes.insert(stmt);
                        Ok(())
                    }
                    None => {
                        let (_, rhs) = assign.expect("plain assignment");
                        let first = t
                            .preorder_from(self.body)
                            .into_iter()
                            .find(|&n| ident_text(t, n) == Some(&v));
                        if first == Some(lhs) && !self.mentions(rhs, &v) && !self.conditional(stmt) {
                            self.private.insert(v);
                            Ok(())
                        } else {
                            Err(format!("loop-carried write to `{v}`"))
                        }
                    }
                }
            }
            "subscript_expression" => {
                let (base, idx) = self.subscript(lhs).ok_or("complex array write")?;
                if self.locals.contains(&base) {
                    return Ok(());
                }
                if !self.index_chain_mentions(lhs, &self.index) {
                    return Err(format!("write to `{base}` independent of the loop index"));
                }
                match self.array_writes.get(&base) {
                    Some((other, _)) if *other != idx => Err(format!("`{base}` written at different indices")),
                    _ => {
                        self.array_writes.insert(base, (idx, lhs));
                        Ok(())
                    }
                }
            }
            _ => Err("write through pointer or member".into()),
        }
    }

    /// Whether `stmt` only executes on some paths through one iteration.
    fn conditional(&self, stmt: NodeId) -> bool {
        let t = self.tree;
        t.ancestors(stmt).take_while(|&a| a != self.body).any(|a| match t.kind(a) {
            "if_statement" | "switch_statement" | "conditional_expression" => true,
            "binary_expression" => t
                .child_by_field(a, "operator")
                .is_some_and(|o| matches!(t.text(o), "&&" | "||")),
            _ => false,
        })
    }

    fn index_chain_mentions(&self, e: NodeId, var: &str) -> bool {
        let t = self.tree;
        let mut cur = e;
        while t.kind(cur) == "subscript_expression" {
            if t.child_by_field(cur, "index").is_some_and(|i| self.mentions(i, var)) {
                return true;
            }
            match t.child_by_field(cur, "argument") {
                Some(a) => cur = strip_parens(t, a),
                None => break,
            }
        }
        false
    }

    /// `v = v op e` or `v = e op v` as a reduction operator.
    fn self_update(&self, v: &str, rhs: NodeId) -> Option<ReductionOp> {
        let t = self.tree;
        let rhs = strip_parens(t, rhs);
        if t.kind(rhs) != "binary_expression" {
            return None;
        }
        let op = ReductionOp::from_symbol(t.text(t.child_by_field(rhs, "operator")?))?;
        let l = t.child_by_field(rhs, "left")?;
        let r = t.child_by_field(rhs, "right")?;
        let (is_l, is_r) = (ident_text(t, l) == Some(v), ident_text(t, r) == Some(v));
        let other = if is_l { r } else if is_r { l } else { return None };
        if self.mentions(other, v) || (is_r && matches!(op, ReductionOp::Sub)) {
            return None;
        }
        Some(op)
    }

    /// Innermost array name and the text of the full index chain.
    fn subscript(&self, e: NodeId) -> Option<(String, String)> {
        let t = self.tree;
        let mut cur = e;
        let mut idx = Vec::new();
        while t.kind(cur) == "subscript_expression" {
            let i = t.child_by_field(cur, "index").or_else(|| t.named_children(cur).nth(1))?;
            idx.push(t.text(i).split_whitespace().collect::<String>());
            cur = strip_parens(t, t.child_by_field(cur, "argument")?);
        }
        idx.reverse();
        ident_text(t, cur).map(|b| (b.to_owned(), idx.join("][")))
    }

    fn check_arrays(&self) -> Result<(), String> {
        let t = self.tree;
        for n in t.preorder_from(self.body) {
            if t.kind(n) != "subscript_expression" {
                continue;
            }
            if t.parent(n).is_some_and(|p| t.kind(p) == "subscript_expression") {
                continue;
            }
            let Some((base, idx)) = self.subscript(n) else { continue };
            if let Some((w, _)) = self.array_writes.get(&base) {
                if *w != idx {
                    return Err(format!("`{base}` read at `{idx}` but written at `{w}`"));
                }
            }
        }
        Ok(())
    }

    fn check_reductions(&self) -> Result<(), String> {
        let t = self.tree;
        for v in self.reductions.keys() {
            for n in t.preorder_from(self.body) {
                if ident_text(t, n) != Some(v.as_str()) {
                    continue;
                }
                let inside = t.ancestors(n).any(|a| self.reduction_nodes.contains(&a));
                if !inside {
                    return Err(format!("reduction variable `{v}` used elsewhere"));
                }
            }
            if self.private.contains(v) {
                return Err(format!("`{v}` is both private and reduced"));
            }
        }
        Ok(())
    }
}
