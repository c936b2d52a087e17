use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::bench::Verdict;
use super::model::{predict, ModelEndpoint};
use super::HarnessError;
use crate::exec::{map_ordered, Jobs};
use crate::metrics::{ConfusionCounts, ConfusionReport, Outcome};
use crate::ompdata::LoopSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub label: Option<String>,
    pub predicted: bool,
    pub pragma: Option<String>,
    pub score: f64,
    pub latency_ms: f64,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Compile-and-run verdict of the predicted pragma, when checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reclassified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub v: u32,
    pub model: String,
    pub confusion: ConfusionReport,
    pub failed_samples: usize,
    pub samples: Vec<SampleRecord>,
}

impl AccuracyReport {
    pub fn from_records(model: String, samples: Vec<SampleRecord>) -> Self {
        let mut counts = ConfusionCounts::default();
        for s in &samples {
            counts.add(s.outcome);
        }
        AccuracyReport {
            v: crate::SCHEMA_VERSION,
            model,
            confusion: ConfusionReport { counts },
            failed_samples: samples.iter().filter(|s| s.error.is_some()).count(),
            samples,
        }
    }
}

fn outcome(predicted: bool, labeled: bool) -> Outcome {
    match (predicted, labeled) {
        (true, true) => Outcome::TP,
        (true, false) => Outcome::FP,
        (false, false) => Outcome::TN,
        (false, true) => Outcome::FN,
    }
}

/// Compare the model's decision on every loop with its label. A sample whose
/// prediction fails counts as a negative prediction and keeps the error.
pub fn accuracy_test(dataset: &[LoopSample], model: &dyn ModelEndpoint, jobs: Jobs) -> AccuracyReport {
    let records = map_ordered(dataset, jobs, |s| {
        let labeled = s.label.is_some();
        let label = s.label.as_ref().map(|l| l.render());
        match predict(model, s) {
            Ok(p) => SampleRecord {
                id: s.id.clone(),
                label,
                predicted: p.parallelizable,
                pragma: p.pragma,
                score: p.score,
                latency_ms: p.latency_ms,
                outcome: outcome(p.parallelizable, labeled),
                error: None,
                verdict: None,
                reclassified: false,
            },
            Err(e) => {
                tracing::warn!("sample {}: {e}", s.id);
                SampleRecord {
                    id: s.id.clone(),
                    label,
                    predicted: false,
                    pragma: None,
                    score: 0.0,
                    latency_ms: 0.0,
                    outcome: outcome(false, labeled),
                    error: Some(e.to_string()),
                    verdict: None,
                    reclassified: false,
                }
            }
        }
    });
    AccuracyReport::from_records(model.name(), records)
}

/// Promote false positives whose pragma compiled, ran and verified to true
/// positives. Every false positive needs a verdict.
pub fn reclassify_fp(report: &AccuracyReport, verdicts: &HashMap<String, Verdict>) -> Result<AccuracyReport, HarnessError> {
    let mut samples = report.samples.clone();
    for s in samples.iter_mut().filter(|s| s.outcome == Outcome::FP) {
        let v = *verdicts
            .get(&s.id)
            .ok_or_else(|| HarnessError::MissingVerdict(s.id.clone()))?;
        s.verdict = Some(v);
        if v == Verdict::Pass {
            s.outcome = Outcome::TP;
            s.reclassified = true;
        }
    }
    Ok(AccuracyReport::from_records(report.model.clone(), samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ReplayModel;
    use crate::ompdata::normalize_pragma;
    use crate::parse::{parse_omp_pragma, Language};

    fn dataset(pos: usize, neg: usize) -> Vec<LoopSample> {
        (0..pos + neg)
            .map(|i| LoopSample {
                id: format!("s{i}"),
                loop_code: "for (int i = 0; i < n; i++) a[i] = 0;".into(),
                label: (i < pos).then(|| normalize_pragma(&parse_omp_pragma("#pragma omp parallel for").unwrap()).unwrap()),
                benchmark_ref: None,
                language: Language::C,
            })
            .collect()
    }

    struct Never;
    impl ModelEndpoint for Never {
        fn name(&self) -> String {
            "never".into()
        }
        fn classify(&self, _: &LoopSample) -> Result<crate::harness::Classification, HarnessError> {
            Ok(crate::harness::Classification { parallelizable: false, score: 0.0 })
        }
        fn generate(&self, s: &LoopSample) -> Result<String, HarnessError> {
            Err(HarnessError::MissingPrediction(s.id.clone()))
        }
    }

    #[test]
    fn replay_is_perfect() {
        let r = accuracy_test(&dataset(5, 5), &ReplayModel, Jobs::ALL);
        assert_eq!(r.confusion.counts, ConfusionCounts::new(5, 0, 5, 0));
    }

    #[test]
    fn always_negative() {
        let r = accuracy_test(&dataset(5, 5), &Never, Jobs::SEQUENTIAL);
        assert_eq!(r.confusion.counts.fp, 0);
        assert_eq!(r.confusion.recall().value(), Some(0.0));
    }

    fn synthetic(tp: usize, fp: usize, tn: usize, fn_: usize) -> AccuracyReport {
        let mut recs = Vec::new();
        for (n, o) in [(tp, Outcome::TP), (fp, Outcome::FP), (tn, Outcome::TN), (fn_, Outcome::FN)] {
            for _ in 0..n {
                recs.push(SampleRecord {
                    id: format!("s{}", recs.len()),
                    label: None,
                    predicted: matches!(o, Outcome::TP | Outcome::FP),
                    pragma: None,
                    score: 0.0,
                    latency_ms: 0.0,
                    outcome: o,
                    error: None,
                    verdict: None,
                    reclassified: false,
                });
            }
        }
        AccuracyReport::from_records("synthetic".into(), recs)
    }

    #[test]
    fn reclassification() {
        let r = synthetic(3, 4, 2, 1);
        let fps: Vec<String> = r.samples.iter().filter(|s| s.outcome == Outcome::FP).map(|s| s.id.clone()).collect();
        let mut v: HashMap<String, Verdict> = fps.iter().map(|id| (id.clone(), Verdict::CompileFail)).collect();
        assert_eq!(reclassify_fp(&r, &v).unwrap().confusion.counts, r.confusion.counts);
        v.insert(fps[0].clone(), Verdict::Pass);
        assert_eq!(reclassify_fp(&r, &v).unwrap().confusion.counts, ConfusionCounts::new(4, 3, 2, 1));
        let all: HashMap<String, Verdict> = fps.iter().map(|id| (id.clone(), Verdict::Pass)).collect();
        assert_eq!(reclassify_fp(&r, &all).unwrap().confusion.counts.fp, 0);
        v.remove(&fps[1]);
        assert!(matches!(reclassify_fp(&r, &v), Err(HarnessError::MissingVerdict(_))));
    }
}
