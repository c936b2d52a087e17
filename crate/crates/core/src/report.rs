//! JSON report schemas and their rendering as aligned text tables and CSV.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{CorpusStats, RecordStats};
use crate::harness::{AccuracyReport, ScaleReport, Verdict};
use crate::metrics::{ConfusionCounts, ConfusionReport, CutScore, Outcome, PragmaEvalReport, Rate, SpeedupBucket};
use crate::ompdata::{ClauseCounts, ExtractReport};
use crate::parse::Language;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("not a report: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Output of `eval pragma`: the pragma tasks plus optional completion scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub pragma: PragmaEvalReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub codebleu: Vec<CutScore>,
}

/// Output of `eval codebleu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionReport {
    pub v: u32,
    pub cuts: Vec<CutScore>,
}

/// Output of `ompdata extract`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub v: u32,
    pub extract: ExtractReport,
    pub clauses: BTreeMap<Language, ClauseCounts>,
}

/// Any report this crate writes.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Confusion(ConfusionReport),
    Accuracy(AccuracyReport),
    Scale(ScaleReport),
    Eval(Box<EvalReport>),
    Completion(CompletionReport),
    Corpus(CorpusStats),
    Records(RecordStats),
    Dataset(DatasetReport),
}

fn typed<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T, ReportError> {
    serde_json::from_value(v).map_err(|e| ReportError::SchemaMismatch(format!("malformed {what} report: {e}")))
}

impl Report {
    /// Recognize a report by its distinguishing keys.
    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ReportError::SchemaMismatch(e.to_string()))?;
        let Some(obj) = v.as_object() else {
            return Err(ReportError::SchemaMismatch("expected a JSON object".into()));
        };
        if let Some(ver) = obj.get("v") {
            if ver.as_u64() != Some(u64::from(crate::SCHEMA_VERSION)) {
                return Err(ReportError::SchemaMismatch(format!("unsupported schema version {ver}")));
            }
        }
        let has = |k: &str| obj.contains_key(k);
        Ok(if has("thread_list") {
            Report::Scale(typed(v, "scale")?)
        } else if has("confusion") && has("model") {
            Report::Accuracy(typed(v, "accuracy")?)
        } else if has("private_clause") {
            Report::Eval(Box::new(typed(v, "pragma evaluation")?))
        } else if has("cuts") {
            Report::Completion(typed(v, "completion")?)
        } else if has("files_ingested") {
            Report::Corpus(typed(v, "corpus")?)
        } else if has("records") && has("per_language") {
            Report::Records(typed(v, "corpus record")?)
        } else if has("extract") && has("clauses") {
            Report::Dataset(typed(v, "dataset")?)
        } else if ["tp", "fp", "tn", "fn"].iter().all(|k| has(k)) {
            Report::Confusion(typed(v, "confusion")?)
        } else {
            return Err(ReportError::SchemaMismatch("unrecognized report layout".into()));
        })
    }

    pub fn tables(&self) -> Vec<Table> {
        match self {
            Report::Confusion(r) => vec![confusion_table(&[("accuracy test", r.counts)])],
            Report::Accuracy(r) => accuracy_tables(r),
            Report::Scale(r) => scale_tables(r),
            Report::Eval(r) => eval_tables(r),
            Report::Completion(r) => vec![cut_table(&r.cuts)],
            Report::Corpus(r) => vec![corpus_table(r)],
            Report::Records(r) => vec![records_table(r)],
            Report::Dataset(r) => dataset_tables(r),
        }
    }

    pub fn render_text(&self) -> String {
        self.tables().iter().map(Table::to_text).collect::<Vec<_>>().join("\n")
    }

    /// Tables as CSV, separated by a blank line.
    pub fn render_csv(&self) -> Result<String, ReportError> {
        let parts = self.tables().iter().map(Table::to_csv).collect::<Result<Vec<_>, _>>()?;
        Ok(parts.join("\n"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, headers: &[&str]) -> Table {
        Table {
            title: title.to_owned(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// First column left-aligned, the rest right-aligned.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            format!("{}\n", parts.join("  ").trim_end())
        };
        let mut out = format!("{}\n", self.title);
        out.push_str(&line(&self.headers));
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

fn pct1(r: Rate) -> String {
    r.value().map_or_else(|| "undefined".into(), |v| format!("{:.1}%", v * 100.0))
}

fn opt3(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn confusion_table(rows: &[(&str, ConfusionCounts)]) -> Table {
    let mut t = Table::new(
        "Accuracy test",
        &["Test", "Precision", "Recall", "Accuracy", "TP", "FP", "TN", "FN"],
    );
    for (name, c) in rows {
        if c.total() == 0 {
            continue;
        }
        t.push(vec![
            name.to_string(),
            c.precision().to_string(),
            c.recall().to_string(),
            c.accuracy().to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
        ]);
    }
    t
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "Pass",
        Verdict::CompileFail => "Compile fail",
        Verdict::RunFail => "Run fail",
        Verdict::OutputMismatch => "Output mismatch",
        Verdict::Timeout => "Timeout",
    }
}

fn accuracy_tables(r: &AccuracyReport) -> Vec<Table> {
    // counts before false positives that compiled and ran were promoted
    let mut before = ConfusionCounts::default();
    for s in &r.samples {
        before.add(if s.reclassified { Outcome::FP } else { s.outcome });
    }
    if r.samples.is_empty() {
        before = r.confusion.counts;
    }
    let mut rows = vec![("accuracy test", before)];
    if r.samples.iter().any(|s| s.reclassified) {
        rows.push(("compile & run", r.confusion.counts));
    }
    let mut tables = vec![confusion_table(&rows)];
    let mut tally: BTreeMap<Verdict, usize> = BTreeMap::new();
    for v in r.samples.iter().filter_map(|s| s.verdict) {
        *tally.entry(v).or_default() += 1;
    }
    if !tally.is_empty() {
        let mut t = Table::new("False positives by compile-and-run verdict", &["Verdict", "Samples"]);
        for v in Verdict::ALL {
            t.push(vec![verdict_label(v).into(), tally.get(&v).copied().unwrap_or(0).to_string()]);
        }
        tables.push(t);
    }
    tables
}

fn scale_tables(r: &ScaleReport) -> Vec<Table> {
    let mut headers = vec!["Threads"];
    headers.extend(Verdict::ALL.iter().map(|v| verdict_label(*v)));
    let mut verdicts = Table::new(
        &format!("Compile and run ({} logical cores)", r.logical_cores),
        &headers,
    );
    let mut bheaders = vec!["Threads"];
    bheaders.extend(SpeedupBucket::ALL.iter().map(|b| b.label()));
    bheaders.push("Total");
    let mut buckets = Table::new("Speedup over baseline", &bheaders);
    let has_baseline = r.benchmarks.iter().any(|b| b.baseline.is_some());
    if !r.benchmarks.is_empty() {
        for s in &r.summary {
            let mut row = vec![s.threads.to_string()];
            row.extend(Verdict::ALL.iter().map(|v| s.verdicts.get(v).copied().unwrap_or(0).to_string()));
            verdicts.push(row);
            let mut row = vec![s.threads.to_string()];
            row.extend(SpeedupBucket::ALL.iter().map(|b| s.buckets.get(b).copied().unwrap_or(0).to_string()));
            row.push(s.buckets.values().sum::<usize>().to_string());
            buckets.push(row);
        }
    }
    if has_baseline || r.benchmarks.is_empty() {
        vec![verdicts, buckets]
    } else {
        vec![verdicts]
    }
}

fn eval_tables(r: &EvalReport) -> Vec<Table> {
    let p = &r.pragma;
    let mut clause = confusion_table(&[
        ("private clause", p.private_clause.counts),
        ("reduction clause", p.reduction_clause.counts),
    ]);
    clause.title = "Clause presence".into();
    clause.headers[0] = "Task".into();
    let mut vars = Table::new("Clause variables", &["Task", "TP", "FP", "FN"]);
    let mut op = Table::new("Reduction operator", &["Task", "Correct", "Total", "Accuracy"]);
    if p.samples > 0 {
        for (name, v) in [("private variables", p.private_vars), ("reduction variables", p.reduction_vars)] {
            vars.push(vec![name.into(), v.tp.to_string(), v.fp.to_string(), v.fn_.to_string()]);
        }
        let o = p.reduction_operator;
        op.push(vec![
            "reduction operator".into(),
            o.correct.to_string(),
            o.total.to_string(),
            o.accuracy().to_string(),
        ]);
    }
    let mut headers = vec!["Clause".to_string()];
    headers.extend(p.private_curve.iter().map(|c| c.bucket.clone()));
    let mut curve = Table {
        title: "Variable accuracy by clause size".into(),
        headers,
        rows: Vec::new(),
    };
    if p.samples > 0 {
        for (name, pts) in [("private", &p.private_curve), ("reduction", &p.reduction_curve)] {
            let mut row = vec![name.to_string()];
            row.extend(pts.iter().map(|c| format!("{} ({}/{})", pct1(c.accuracy), c.matched, c.label_vars)));
            curve.push(row);
        }
    }
    let mut tables = vec![clause, vars, op, curve];
    if !r.codebleu.is_empty() {
        tables.push(cut_table(&r.codebleu));
    }
    tables
}

fn cut_table(cuts: &[CutScore]) -> Table {
    let mut t = Table::new("Completion CodeBLEU", &["Prefix tokens", "Samples", "CodeBLEU", "N-gram"]);
    for c in cuts {
        t.push(vec![c.cut.to_string(), c.samples.to_string(), opt3(c.mean_codebleu), opt3(c.mean_ngram)]);
    }
    t
}

fn corpus_table(r: &CorpusStats) -> Table {
    let mut t = Table::new(
        &format!(
            "Corpus ({} files ingested, {} duplicates dropped, {} kept)",
            r.files_ingested, r.duplicates_dropped, r.files_kept
        ),
        &["Language", "Repos", "Size (MB)", "Files", "Functions"],
    );
    for (lang, s) in &r.per_language {
        t.push(vec![
            lang.as_str().into(),
            s.repos.to_string(),
            format!("{:.3}", s.size_bytes as f64 / 1e6),
            s.file_count.to_string(),
            s.function_count.to_string(),
        ]);
    }
    t
}

fn records_table(r: &RecordStats) -> Table {
    let mut t = Table::new(
        &format!("Corpus records ({})", r.records),
        &["Language", "Files", "Functions", "Bytes", "Tokens"],
    );
    for (lang, s) in &r.per_language {
        t.push(vec![
            lang.as_str().into(),
            s.files.to_string(),
            s.functions.to_string(),
            s.code_bytes.to_string(),
            s.tokens.to_string(),
        ]);
    }
    t
}

fn dataset_tables(r: &DatasetReport) -> Vec<Table> {
    let e = &r.extract;
    let mut summary = Table::new(
        "Loop extraction",
        &["Files", "Positives", "Negatives", "Candidates", "Unsupported", "Unparseable", "Dropped clauses"],
    );
    if e.files > 0 {
        summary.push(vec![
            e.files.to_string(),
            e.positives.to_string(),
            e.negatives.to_string(),
            e.negative_candidates.to_string(),
            e.unsupported.to_string(),
            e.unparseable.to_string(),
            e.dropped_clauses.to_string(),
        ]);
    }
    let mut clauses = Table::new(
        "Clauses in positive samples",
        &["Language", "Total", "private", "reduction", "target", "simd", "plain"],
    );
    let row = |name: &str, c: &ClauseCounts| {
        vec![
            name.to_owned(),
            c.total.to_string(),
            c.private.to_string(),
            c.reduction.to_string(),
            c.target.to_string(),
            c.simd.to_string(),
            c.plain.to_string(),
        ]
    };
    for (lang, c) in &r.clauses {
        clauses.push(row(lang.as_str(), c));
    }
    if !r.clauses.is_empty() {
        clauses.push(row("all", &ClauseCounts::merged(r.clauses.values().copied())));
    }
    vec![summary, clauses]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn confusion_row_is_truncated_percentages() {
        let json = r#"{"tp":311,"fp":127,"tn":262,"fn":70}"#;
        let r = Report::from_json(json).unwrap();
        let text = r.render_text();
        assert!(words(&text).contains("accuracy test 71% 81% 74% 311 127 262 70"), "{text}");
        let csv = r.render_csv().unwrap();
        assert!(csv.contains("accuracy test,71%,81%,74%,311,127,262,70"), "{csv}");
    }

    #[test]
    fn empty_report_has_headers_only() {
        let r = Report::from_json(r#"{"tp":0,"fp":0,"tn":0,"fn":0}"#).unwrap();
        assert_eq!(r.render_text(), "Accuracy test\nTest  Precision  Recall  Accuracy  TP  FP  TN  FN\n");
        assert_eq!(r.render_csv().unwrap(), "Test,Precision,Recall,Accuracy,TP,FP,TN,FN\n");
    }

    #[test]
    fn unknown_layouts_are_rejected() {
        for bad in ["[]", r#"{"hello":1}"#, r#"{"v":9,"tp":1,"fp":0,"tn":0,"fn":0}"#, "not json"] {
            assert!(matches!(Report::from_json(bad), Err(ReportError::SchemaMismatch(_))), "{bad}");
        }
        assert!(matches!(
            Report::from_json(r#"{"v":1,"thread_list":"x"}"#),
            Err(ReportError::SchemaMismatch(_))
        ));
    }
}
