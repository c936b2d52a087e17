use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::parse::{NodeId, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Relation {
    /// A use and the definitions reaching it.
    ComesFrom,
    /// A definition and the variables its value is computed from.
    ComputedFrom,
}

/// A def-use edge: variable occurrence `idx` relates to parent occurrences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataflowEdge {
    pub var: String,
    pub idx: usize,
    pub relation: Relation,
    pub parents: Vec<(String, usize)>,
}

type Defs = BTreeMap<String, BTreeSet<usize>>;

/// Target variable name and the `(name, occurrence)` sources feeding it.
type EdgeSources = (String, BTreeSet<(String, usize)>);

struct Flow<'a> {
    tree: &'a SyntaxTree,
    /// occurrence index of every variable identifier, by node
    occ: BTreeMap<NodeId, usize>,
    edges: BTreeMap<(usize, Relation), EdgeSources>,
}

/// Intra-procedural reaching-definitions graph over identifier occurrences.
/// Branches merge their definitions; loop bodies are walked twice so
/// loop-carried uses see later definitions.
pub fn dataflow_edges(tree: &SyntaxTree) -> Vec<DataflowEdge> {
    let mut occ = BTreeMap::new();
    for id in tree.preorder() {
        if is_variable(tree, id) {
            let n = occ.len();
            occ.insert(id, n);
        }
    }
    let mut flow = Flow {
        tree,
        occ,
        edges: BTreeMap::new(),
    };
    let mut defs = Defs::new();
    flow.stmt(tree.root(), &mut defs);
    flow.edges
        .into_iter()
        .map(|((idx, relation), (var, parents))| DataflowEdge {
            var,
            idx,
            relation,
            parents: parents.into_iter().collect(),
        })
        .collect()
}

fn is_variable(tree: &SyntaxTree, id: NodeId) -> bool {
    if tree.kind(id) != "identifier" {
        return false;
    }
    let Some(p) = tree.parent(id) else { return true };
    let field = tree.node(id).field;
    match tree.kind(p) {
        "call_expression" => field != Some("function"),
        "function_declarator" | "preproc_def" | "preproc_function_def" | "preproc_ifdef" | "preproc_defined" => false,
        "qualified_identifier" | "template_function" => false,
        k if k.starts_with("preproc_") && k != "preproc_if" && k != "preproc_else" => false,
        _ => true,
    }
}

impl Flow<'_> {
    fn edge(&mut self, relation: Relation, id: NodeId, parents: impl IntoIterator<Item = (String, usize)>) {
        let idx = self.occ[&id];
        let var = self.tree.text(id).to_owned();
        let entry = self
            .edges
            .entry((idx, relation))
            .or_insert_with(|| (var, BTreeSet::new()));
        entry.1.extend(parents);
    }

    fn vars_in(&self, id: NodeId) -> Vec<NodeId> {
        self.tree
            .preorder_from(id)
            .into_iter()
            .filter(|n| self.occ.contains_key(n))
            .collect()
    }

    fn named(&self, id: NodeId) -> (String, usize) {
        (self.tree.text(id).to_owned(), self.occ[&id])
    }

    /// Record a use of every variable under `id`.
    fn uses(&mut self, id: NodeId, defs: &mut Defs) {
        let kind = self.tree.kind(id);
        match kind {
            "assignment_expression" | "init_declarator" | "update_expression" => {
                self.stmt(id, defs);
                return;
            }
            "lambda_expression" => return,
            _ => {}
        }
        if self.occ.contains_key(&id) {
            let name = self.tree.text(id).to_owned();
            if let Some(reaching) = defs.get(&name) {
                let parents: Vec<(String, usize)> = reaching.iter().map(|&i| (name.clone(), i)).collect();
                if !parents.is_empty() {
                    self.edge(Relation::ComesFrom, id, parents);
                }
            }
            return;
        }
        for c in self.tree.children(id).to_vec() {
            self.uses(c, defs);
        }
    }

    fn define(&mut self, target: NodeId, sources: &[NodeId], defs: &mut Defs) {
        let parents: Vec<(String, usize)> = sources.iter().map(|&s| self.named(s)).collect();
        if !parents.is_empty() {
            self.edge(Relation::ComputedFrom, target, parents);
        }
        let (name, idx) = self.named(target);
        defs.insert(name, BTreeSet::from([idx]));
    }

    /// Base variable written by an lvalue (`a` in `a[i].x`).
    fn base_var(&self, lhs: NodeId) -> Option<NodeId> {
        let mut cur = lhs;
        loop {
            if self.occ.contains_key(&cur) {
                return Some(cur);
            }
            cur = match self.tree.kind(cur) {
                "subscript_expression" | "field_expression" | "parenthesized_expression" | "pointer_expression" => {
                    self.tree.child_by_field(cur, "argument").or_else(|| self.tree.named_children(cur).next())?
                }
                _ => return None,
            };
        }
    }

    fn stmt(&mut self, id: NodeId, defs: &mut Defs) {
        let t = self.tree;
        let field = |f: &str| t.child_by_field(id, f);
        match t.kind(id) {
            "assignment_expression" => {
                let (Some(lhs), Some(rhs)) = (field("left"), field("right")) else { return };
                self.uses(rhs, defs);
                let mut sources = self.vars_in(rhs);
                let compound = t.child_by_field(id, "operator").is_some_and(|o| t.text(o) != "=");
                if t.kind(lhs) == "identifier" && self.occ.contains_key(&lhs) {
                    if compound {
                        self.uses(lhs, defs);
                        sources.insert(0, lhs);
                    }
                    self.define(lhs, &sources, defs);
                } else {
                    self.uses(lhs, defs);
                    if let Some(base) = self.base_var(lhs) {
                        let mut s = self.vars_in(lhs);
                        s.retain(|&v| v != base);
                        s.extend(sources);
                        let parents: Vec<(String, usize)> = s.iter().map(|&v| self.named(v)).collect();
                        if !parents.is_empty() {
                            self.edge(Relation::ComputedFrom, base, parents);
                        }
                        let (name, idx) = self.named(base);
                        defs.entry(name).or_default().insert(idx);
                    }
                }
            }
            "init_declarator" => {
                let value = field("value");
                if let Some(v) = value {
                    self.uses(v, defs);
                }
                let sources = value.map(|v| self.vars_in(v)).unwrap_or_default();
                if let Some(target) = field("declarator").and_then(|d| self.declared_var(d)) {
                    self.define(target, &sources, defs);
                }
            }
            "update_expression" => {
                if let Some(arg) = field("argument") {
                    self.uses(arg, defs);
                    if let Some(base) = self.base_var(arg) {
                        self.define(base, &[base], defs);
                    }
                }
            }
            "declaration" | "parameter_declaration" => {
                for d in t.children_by_field(id, "declarator").collect::<Vec<_>>() {
                    if t.kind(d) == "init_declarator" {
                        self.stmt(d, defs);
                    } else if let Some(v) = self.declared_var(d) {
                        self.define(v, &[], defs);
                    }
                }
            }
            "if_statement" => {
                if let Some(c) = field("condition") {
                    self.uses(c, defs);
                }
                let mut then_defs = defs.clone();
                if let Some(c) = field("consequence") {
                    self.stmt(c, &mut then_defs);
                }
                let mut else_defs = defs.clone();
                if let Some(a) = field("alternative") {
                    self.stmt(a, &mut else_defs);
                }
                *defs = merge(then_defs, else_defs);
            }
            "for_statement" => {
                if let Some(i) = field("initializer") {
                    self.stmt(i, defs);
                }
                for _ in 0..2 {
                    let entry = defs.clone();
                    if let Some(c) = field("condition") {
                        self.uses(c, defs);
                    }
                    if let Some(b) = field("body") {
                        self.stmt(b, defs);
                    }
                    if let Some(u) = field("update") {
                        self.stmt(u, defs);
                    }
                    *defs = merge(entry, defs.clone());
                }
            }
            "for_range_loop" => {
                if let Some(r) = field("right") {
                    self.uses(r, defs);
                    let sources = self.vars_in(r);
                    if let Some(target) = field("declarator").and_then(|d| self.declared_var(d)) {
                        self.define(target, &sources, defs);
                    }
                }
                for _ in 0..2 {
                    let entry = defs.clone();
                    if let Some(b) = field("body") {
                        self.stmt(b, defs);
                    }
                    *defs = merge(entry, defs.clone());
                }
            }
            "while_statement" | "do_statement" => {
                for _ in 0..2 {
                    let entry = defs.clone();
                    if let Some(c) = field("condition") {
                        self.uses(c, defs);
                    }
                    if let Some(b) = field("body") {
                        self.stmt(b, defs);
                    }
                    *defs = merge(entry, defs.clone());
                }
            }
            "expression_statement" | "return_statement" | "condition_clause" | "comma_expression" => {
                for c in t.children(id).to_vec() {
                    self.stmt_or_use(c, defs);
                }
            }
            "function_definition" => {
                if let Some(d) = field("declarator") {
                    for p in t.preorder_from(d) {
                        if t.kind(p) == "parameter_declaration" {
                            self.stmt(p, defs);
                        }
                    }
                }
                if let Some(b) = field("body") {
                    self.stmt(b, defs);
                }
            }
            _ => {
                for c in t.children(id).to_vec() {
                    self.stmt_or_use(c, defs);
                }
            }
        }
    }

    fn stmt_or_use(&mut self, id: NodeId, defs: &mut Defs) {
        if self.occ.contains_key(&id) || self.tree.kind(id).ends_with("_expression") && !matches!(
            self.tree.kind(id),
            "assignment_expression" | "update_expression" | "comma_expression"
        ) {
            self.uses(id, defs);
        } else {
            self.stmt(id, defs);
        }
    }

    fn declared_var(&self, mut d: NodeId) -> Option<NodeId> {
        loop {
            if self.occ.contains_key(&d) {
                return Some(d);
            }
            d = self
                .tree
                .child_by_field(d, "declarator")
                .or_else(|| self.tree.named_children(d).find(|&c| self.tree.kind(c) != "type_qualifier"))?;
        }
    }
}

fn merge(mut a: Defs, b: Defs) -> Defs {
    for (k, v) in b {
        a.entry(k).or_default().extend(v);
    }
    a
}

/// Edges with variable names replaced by `var_<k>` in order of first
/// appearance and occurrence indices dropped.
pub(crate) fn normalized_edges(edges: &[DataflowEdge]) -> Vec<(String, Relation, Vec<String>)> {
    // first-appearance order across the graph
    let mut order: Vec<(usize, &str)> = Vec::new();
    for e in edges {
        order.push((e.idx, e.var.as_str()));
        for (p, i) in &e.parents {
            order.push((*i, p.as_str()));
        }
    }
    order.sort();
    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, n) in order {
        let k = names.len();
        names.entry(n).or_insert(k);
    }
    let norm = |n: &str| format!("var_{}", names[n]);
    edges
        .iter()
        .map(|e| {
            let mut ps: Vec<String> = e.parents.iter().map(|(p, _)| norm(p)).collect();
            ps.sort();
            (norm(&e.var), e.relation, ps)
        })
        .collect()
}
