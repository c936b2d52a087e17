use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::confusion::{ConfusionCounts, ConfusionReport, Outcome, Rate};
use super::MetricsError;
use crate::ompdata::NormalizedPragma;
use crate::parse::ReductionOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseKind {
    Private,
    Reduction,
}

fn has_clause(p: Option<&NormalizedPragma>, kind: ClauseKind) -> bool {
    p.is_some_and(|p| match kind {
        ClauseKind::Private => p.has_private(),
        ClauseKind::Reduction => p.has_reduction(),
    })
}

/// Clause-level judgement; a missing pragma has no clauses.
pub fn clause_presence_eval(
    pred: Option<&NormalizedPragma>,
    label: Option<&NormalizedPragma>,
    kind: ClauseKind,
) -> Outcome {
    match (has_clause(pred, kind), has_clause(label, kind)) {
        (true, true) => Outcome::TP,
        (true, false) => Outcome::FP,
        (false, true) => Outcome::FN,
        (false, false) => Outcome::TN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VariableMatchResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl VariableMatchResult {
    fn add(&mut self, o: VariableMatchResult) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    pub fn label_size(&self) -> usize {
        self.tp + self.fn_
    }
}

/// Order-free variable matching on trimmed names.
pub fn variable_set_eval<S: AsRef<str>>(pred: &[S], label: &[S]) -> VariableMatchResult {
    let p: BTreeSet<&str> = pred.iter().map(|s| s.as_ref().trim()).collect();
    let l: BTreeSet<&str> = label.iter().map(|s| s.as_ref().trim()).collect();
    VariableMatchResult {
        tp: p.intersection(&l).count(),
        fp: p.difference(&l).count(),
        fn_: l.difference(&p).count(),
    }
}

pub fn reduction_operator_eval(pred: Option<ReductionOp>, label: Option<ReductionOp>) -> Result<bool, MetricsError> {
    match (pred, label) {
        (Some(p), Some(l)) => Ok(p.symbol().trim() == l.symbol().trim()),
        (None, _) => Err(MetricsError::MissingOperand("predicted")),
        (_, None) => Err(MetricsError::MissingOperand("label")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "CurvePointCounts")]
pub struct CurvePoint {
    /// `<2`, `<3`, ... or `All`
    pub bucket: String,
    pub samples: usize,
    pub label_vars: usize,
    pub matched: usize,
    pub accuracy: Rate,
}

#[derive(Deserialize)]
struct CurvePointCounts {
    bucket: String,
    samples: usize,
    label_vars: usize,
    matched: usize,
}

impl From<CurvePointCounts> for CurvePoint {
    fn from(c: CurvePointCounts) -> Self {
        CurvePoint {
            accuracy: Rate::new(c.matched as u64, c.label_vars as u64),
            bucket: c.bucket,
            samples: c.samples,
            label_vars: c.label_vars,
            matched: c.matched,
        }
    }
}

/// Cumulative per-variable-count accuracy: for each threshold `k` in
/// `2..=max_lt`, samples whose label list has fewer than `k` variables, then
/// all samples. Accuracy is matched label variables over all label variables.
pub fn variable_curve(results: &[VariableMatchResult], max_lt: usize) -> Vec<CurvePoint> {
    let point = |bucket: String, keep: &dyn Fn(&VariableMatchResult) -> bool| {
        let mut sum = VariableMatchResult::default();
        let mut samples = 0;
        for r in results.iter().filter(|r| keep(r)) {
            sum.add(*r);
            samples += 1;
        }
        CurvePoint {
            bucket,
            samples,
            label_vars: sum.label_size(),
            matched: sum.tp,
            accuracy: Rate::new(sum.tp as u64, sum.label_size() as u64),
        }
    };
    let mut out: Vec<CurvePoint> = (2..=max_lt)
        .map(|k| point(format!("<{k}"), &|r: &VariableMatchResult| r.label_size() < k))
        .collect();
    out.push(point("All".into(), &|_| true));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OperatorTally {
    pub correct: usize,
    pub total: usize,
}

impl OperatorTally {
    pub fn accuracy(&self) -> Rate {
        Rate::new(self.correct as u64, self.total as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEval {
    pub id: String,
    pub private: Outcome,
    pub reduction: Outcome,
}

/// Results of the five pragma evaluation tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PragmaEvalReport {
    pub v: u32,
    pub samples: usize,
    pub private_clause: ConfusionReport,
    pub reduction_clause: ConfusionReport,
    pub private_vars: VariableMatchResult,
    pub private_curve: Vec<CurvePoint>,
    pub reduction_vars: VariableMatchResult,
    pub reduction_curve: Vec<CurvePoint>,
    pub reduction_operator: OperatorTally,
    pub per_sample: Vec<SampleEval>,
}

/// Score predictions against labels. Each item is `(id, prediction, label)`.
pub fn evaluate_pragmas(
    items: &[(String, Option<NormalizedPragma>, Option<NormalizedPragma>)],
    curve_max_lt: usize,
) -> PragmaEvalReport {
    let mut private_clause = ConfusionCounts::default();
    let mut reduction_clause = ConfusionCounts::default();
    let mut private_results = Vec::new();
    let mut reduction_results = Vec::new();
    let mut op = OperatorTally::default();
    let mut per_sample = Vec::new();
    for (id, pred, label) in items {
        let (pred, label) = (pred.as_ref(), label.as_ref());
        let po = clause_presence_eval(pred, label, ClauseKind::Private);
        let ro = clause_presence_eval(pred, label, ClauseKind::Reduction);
        private_clause.add(po);
        reduction_clause.add(ro);
        per_sample.push(SampleEval {
            id: id.clone(),
            private: po,
            reduction: ro,
        });
        if let Some(l) = label.filter(|l| l.has_private()) {
            let p: Vec<&String> = pred.map(|p| p.private_vars.iter().collect()).unwrap_or_default();
            let l: Vec<&String> = l.private_vars.iter().collect();
            private_results.push(variable_set_eval(&p, &l));
        }
        if let Some(lr) = label.and_then(|l| l.reduction.as_ref()) {
            let pr = pred.and_then(|p| p.reduction.as_ref());
            let p: Vec<&String> = pr.map(|r| r.vars.iter().collect()).unwrap_or_default();
            let l: Vec<&String> = lr.vars.iter().collect();
            reduction_results.push(variable_set_eval(&p, &l));
            if let Ok(same) = reduction_operator_eval(pr.map(|r| r.op), Some(lr.op)) {
                op.total += 1;
                op.correct += usize::from(same);
            }
        }
    }
    let sum = |rs: &[VariableMatchResult]| {
        let mut s = VariableMatchResult::default();
        rs.iter().for_each(|r| s.add(*r));
        s
    };
    PragmaEvalReport {
        v: crate::SCHEMA_VERSION,
        samples: items.len(),
        private_clause: ConfusionReport { counts: private_clause },
        reduction_clause: ConfusionReport { counts: reduction_clause },
        private_vars: sum(&private_results),
        private_curve: variable_curve(&private_results, curve_max_lt),
        reduction_vars: sum(&reduction_results),
        reduction_curve: variable_curve(&reduction_results, curve_max_lt),
        reduction_operator: op,
        per_sample,
    }
}
