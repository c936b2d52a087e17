use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dataflow::{dataflow_edges, normalized_edges};
use super::MetricsError;
use crate::exec::{map_ordered, Jobs};
use crate::parse::{is_keyword, parse_str, Language, NodeId, SyntaxTree};
use crate::tokompiler::{lexicalize_source, TokenStream, NEWLINE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeBleuConfig {
    /// (ngram, weighted ngram, AST match, dataflow match)
    pub weights: [f64; 4],
    pub keyword_weight: f64,
    pub max_n: usize,
    pub ast_depth: usize,
}

impl Default for CodeBleuConfig {
    fn default() -> Self {
        CodeBleuConfig {
            weights: [0.25; 4],
            keyword_weight: 5.0,
            max_n: 4,
            ast_depth: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub ngram: f64,
    pub weighted_ngram: f64,
    /// `None` when the reference has no subtrees to match.
    pub ast_match: Option<f64>,
    /// `None` when the reference has no def-use edges.
    pub dataflow_match: Option<f64>,
    /// Weights actually applied after redistributing undefined components.
    pub weights: [f64; 4],
    pub combined: f64,
}

fn tokens(code: &str, language: Language) -> Vec<String> {
    lexicalize_source(code, language)
        .tokens
        .into_iter()
        .filter(|t| t != NEWLINE)
        .collect()
}

pub fn codebleu(
    candidate: &str,
    reference: &str,
    language: Language,
    config: &CodeBleuConfig,
) -> Result<CodeBleuScore, MetricsError> {
    let cand_tree = parse_str(candidate, language);
    let ref_tree = parse_str(reference, language);
    let cand = tokens(candidate, language);
    let refs = tokens(reference, language);
    if cand.is_empty() {
        return Err(MetricsError::TokenizeFailure("candidate".into()));
    }
    if refs.is_empty() {
        return Err(MetricsError::TokenizeFailure("reference".into()));
    }
    let max_n = config.max_n.max(1);
    let ngram = bleu(&cand, &refs, max_n, |_| 1.0);
    let kw = config.keyword_weight;
    let weighted_ngram = bleu(&cand, &refs, max_n, |g: &[String]| {
        if g.len() == 1 && is_keyword(&g[0]) {
            kw
        } else {
            1.0
        }
    });
    let ast_match = ast_match(&cand_tree, &ref_tree, config.ast_depth.max(1));
    let dataflow_match = dataflow_match(&cand_tree, &ref_tree);

    let parts = [Some(ngram), Some(weighted_ngram), ast_match, dataflow_match];
    let defined: f64 = parts
        .iter()
        .zip(config.weights)
        .filter(|(p, _)| p.is_some())
        .map(|(_, w)| w)
        .sum();
    let mut weights = [0.0; 4];
    let mut combined = 0.0;
    for (i, (p, w)) in parts.iter().zip(config.weights).enumerate() {
        if let Some(v) = p {
            weights[i] = if defined > 0.0 { w / defined } else { 0.0 };
            combined += weights[i] * v;
        }
    }
    Ok(CodeBleuScore {
        ngram,
        weighted_ngram,
        ast_match,
        dataflow_match,
        weights,
        combined: combined.clamp(0.0, 1.0),
    })
}

fn counts(toks: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    for g in toks.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

/// Sentence BLEU with brevity penalty and no smoothing. Orders for which the
/// candidate has no n-grams are left out of the geometric mean.
fn bleu<W: Fn(&[String]) -> f64>(cand: &[String], refs: &[String], max_n: usize, weight: W) -> f64 {
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 1..=max_n {
        let c = counts(cand, n);
        if c.is_empty() {
            continue;
        }
        let r = counts(refs, n);
        let mut matched = 0.0;
        let mut total = 0.0;
        for (g, &k) in &c {
            let w = weight(g);
            matched += w * k.min(r.get(g).copied().unwrap_or(0)) as f64;
            total += w * k as f64;
        }
        if matched == 0.0 {
            return 0.0;
        }
        log_sum += (matched / total).ln();
        orders += 1;
    }
    let (c, r) = (cand.len() as f64, refs.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    (bp * (log_sum / orders as f64).exp()).min(1.0)
}

fn subtree_signature(tree: &SyntaxTree, id: NodeId, depth: usize, out: &mut String) {
    out.push('(');
    out.push_str(tree.kind(id));
    if depth > 1 {
        for c in tree.named_children(id) {
            if tree.kind(c) != "comment" {
                subtree_signature(tree, c, depth - 1, out);
            }
        }
    }
    out.push(')');
}

fn subtrees(tree: &SyntaxTree, depth: usize) -> HashMap<String, usize> {
    let mut m = HashMap::new();
    for id in tree.preorder() {
        let node = tree.node(id);
        if !node.named || node.kind == "comment" || tree.named_children(id).next().is_none() {
            continue;
        }
        let mut sig = String::new();
        subtree_signature(tree, id, depth, &mut sig);
        *m.entry(sig).or_insert(0) += 1;
    }
    m
}

fn ast_match(cand: &SyntaxTree, refr: &SyntaxTree, depth: usize) -> Option<f64> {
    let r = subtrees(refr, depth);
    let total: usize = r.values().sum();
    if total == 0 {
        return None;
    }
    let c = subtrees(cand, depth);
    let matched: usize = r.iter().map(|(s, &k)| k.min(c.get(s).copied().unwrap_or(0))).sum();
    Some(matched as f64 / total as f64)
}

fn dataflow_match(cand: &SyntaxTree, refr: &SyntaxTree) -> Option<f64> {
    let r = normalized_edges(&dataflow_edges(refr));
    if r.is_empty() {
        return None;
    }
    let mut pool = normalized_edges(&dataflow_edges(cand));
    let mut matched = 0;
    for e in &r {
        if let Some(pos) = pool.iter().position(|c| c == e) {
            pool.swap_remove(pos);
            matched += 1;
        }
    }
    Some(matched as f64 / r.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutScore {
    pub cut: usize,
    pub samples: usize,
    pub mean_codebleu: Option<f64>,
    pub mean_ngram: Option<f64>,
}

/// Completion scoring: for each cut, feed the first `cut` tokens of every
/// function long enough to the completer and score its output against the
/// remaining tokens.
pub fn completion_table<F>(
    functions: &[(TokenStream, Language)],
    cuts: &[usize],
    completer: F,
    config: &CodeBleuConfig,
    jobs: Jobs,
) -> Vec<CutScore>
where
    F: Fn(&[String]) -> String + Sync + Send,
{
    let jobs_list: Vec<(usize, &TokenStream, Language)> = cuts
        .iter()
        .flat_map(|&cut| {
            functions
                .iter()
                .filter(move |(ts, _)| ts.tokens.len() > cut)
                .map(move |(ts, lang)| (cut, ts, *lang))
        })
        .collect();
    let items = map_ordered(&jobs_list, jobs, |(cut, ts, lang)| {
        let (prefix, suffix) = ts.tokens.split_at(*cut);
        let reference = TokenStream {
            tokens: suffix.to_vec(),
        }
        .to_source();
        (*cut, completer(prefix), reference, *lang)
    });
    cut_table(&items, cuts, config, jobs)
}

/// Mean scores per cut over `(cut, candidate, reference, language)` items.
pub fn cut_table(
    items: &[(usize, String, String, Language)],
    cuts: &[usize],
    config: &CodeBleuConfig,
    jobs: Jobs,
) -> Vec<CutScore> {
    let scored: Vec<Option<CodeBleuScore>> =
        map_ordered(items, jobs, |(_, cand, reference, lang)| codebleu(cand, reference, *lang, config).ok());
    cuts.iter()
        .map(|&cut| {
            let ok: Vec<&CodeBleuScore> = items
                .iter()
                .zip(&scored)
                .filter(|((c, ..), _)| *c == cut)
                .filter_map(|(_, s)| s.as_ref())
                .collect();
            let mean = |f: fn(&CodeBleuScore) -> f64| {
                (!ok.is_empty()).then(|| ok.iter().map(|s| f(s)).sum::<f64>() / ok.len() as f64)
            };
            CutScore {
                cut,
                samples: ok.len(),
                mean_codebleu: mean(|s| s.combined),
                mean_ngram: mean(|s| s.ngram),
            }
        })
        .collect()
}
