use std::collections::HashMap;
use std::io::BufRead;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::heuristic::HeuristicModel;
use super::HarnessError;
use crate::ompdata::LoopSample;
use crate::parse::parse_omp_pragma;

/// Instruction used when an external chat model is asked for a pragma.
pub const GENERATION_PROMPT: &str = "Generate the optimal OpenMP pragma for the provided code";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub parallelizable: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub parallelizable: bool,
    pub score: f64,
    /// Present iff `parallelizable`.
    pub pragma: Option<String>,
    pub latency_ms: f64,
}

/// A two-stage predictor: classify a loop, then generate a pragma for
/// positives.
pub trait ModelEndpoint: Send + Sync {
    fn name(&self) -> String;
    fn classify(&self, sample: &LoopSample) -> Result<Classification, HarnessError>;
    fn generate(&self, sample: &LoopSample) -> Result<String, HarnessError>;
}

/// Classify, generate for positives, and validate the generated pragma.
pub fn predict(model: &dyn ModelEndpoint, sample: &LoopSample) -> Result<ModelPrediction, HarnessError> {
    let start = Instant::now();
    let c = model.classify(sample)?;
    let pragma = if c.parallelizable {
        let text = model.generate(sample)?;
        let text = text.trim().to_owned();
        parse_omp_pragma(&text).map_err(|e| HarnessError::InvalidGeneration {
            pragma: text.clone(),
            reason: e.to_string(),
        })?;
        Some(text)
    } else {
        None
    };
    Ok(ModelPrediction {
        parallelizable: c.parallelizable,
        score: c.score.clamp(0.0, 1.0),
        pragma,
        latency_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Oracle returning each sample's ground-truth label.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReplayModel;

impl ModelEndpoint for ReplayModel {
    fn name(&self) -> String {
        "builtin:replay".into()
    }

    fn classify(&self, sample: &LoopSample) -> Result<Classification, HarnessError> {
        let p = sample.label.is_some();
        Ok(Classification {
            parallelizable: p,
            score: if p { 1.0 } else { 0.0 },
        })
    }

    fn generate(&self, sample: &LoopSample) -> Result<String, HarnessError> {
        sample
            .label
            .as_ref()
            .map(|l| l.render())
            .ok_or_else(|| HarnessError::MissingPrediction(sample.id.clone()))
    }
}

/// One line of an offline predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflinePrediction {
    pub id: String,
    pub parallelizable: bool,
    #[serde(default)]
    pub score: Option<f64>,
    #[serde(default)]
    pub pragma: Option<String>,
}

/// Predictions precomputed by an external tool, keyed by sample id.
#[derive(Debug, Clone, Default)]
pub struct OfflineModel {
    name: String,
    by_id: HashMap<String, OfflinePrediction>,
}

impl OfflineModel {
    pub fn from_reader<R: BufRead>(name: &str, reader: R) -> Result<Self, HarnessError> {
        let mut by_id = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let p: OfflinePrediction = serde_json::from_str(&line)
                .map_err(|e| HarnessError::Config(format!("{name}:{}: {e}", i + 1)))?;
            by_id.insert(p.id.clone(), p);
        }
        Ok(OfflineModel {
            name: name.to_owned(),
            by_id,
        })
    }

    fn get(&self, id: &str) -> Result<&OfflinePrediction, HarnessError> {
        self.by_id
            .get(id)
            .ok_or_else(|| HarnessError::MissingPrediction(id.to_owned()))
    }
}

impl ModelEndpoint for OfflineModel {
    fn name(&self) -> String {
        format!("offline:{}", self.name)
    }

    fn classify(&self, sample: &LoopSample) -> Result<Classification, HarnessError> {
        let p = self.get(&sample.id)?;
        Ok(Classification {
            parallelizable: p.parallelizable,
            score: p.score.unwrap_or(if p.parallelizable { 1.0 } else { 0.0 }),
        })
    }

    fn generate(&self, sample: &LoopSample) -> Result<String, HarnessError> {
        self.get(&sample.id)?
            .pragma
            .clone()
            .ok_or_else(|| HarnessError::MissingPrediction(sample.id.clone()))
    }
}

#[derive(Serialize)]
struct CodeRequest<'a> {
    code: &'a str,
}

#[derive(Deserialize)]
struct GenerateResponse {
    pragma: String,
}

/// JSON-over-HTTP endpoint: `POST {base}/v1/classify` and `POST {base}/v1/generate`.
pub struct HttpModel {
    base: String,
    agent: ureq::Agent,
    retries: u32,
    backoff: Duration,
}

impl HttpModel {
    pub fn new(base: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpModel {
            base: base.trim_end_matches('/').to_owned(),
            agent,
            retries: 3,
            backoff: Duration::from_millis(200),
        }
    }

    pub fn with_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    fn post<T: serde::de::DeserializeOwned>(&self, path: &str, code: &str) -> Result<T, HarnessError> {
        let url = format!("{}{path}", self.base);
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match self.agent.post(&url).send_json(CodeRequest { code }) {
                Ok(mut resp) => {
                    return resp
                        .body_mut()
                        .read_json::<T>()
                        .map_err(|e| HarnessError::EndpointUnreachable(format!("{url}: bad response: {e}")));
                }
                Err(e) => {
                    tracing::debug!("{url} attempt {}: {e}", attempt + 1);
                    last = e.to_string();
                }
            }
        }
        Err(HarnessError::EndpointUnreachable(format!("{url}: {last}")))
    }
}

impl ModelEndpoint for HttpModel {
    fn name(&self) -> String {
        self.base.clone()
    }

    fn classify(&self, sample: &LoopSample) -> Result<Classification, HarnessError> {
        self.post("/v1/classify", &sample.loop_code)
    }

    fn generate(&self, sample: &LoopSample) -> Result<String, HarnessError> {
        self.post::<GenerateResponse>("/v1/generate", &sample.loop_code)
            .map(|g| g.pragma)
    }
}

/// Build a model from `http://…`, `offline:<file>`, `builtin:replay` or
/// `builtin:heuristic`.
pub fn model_from_spec(spec: &str, timeout: Duration) -> Result<Box<dyn ModelEndpoint>, HarnessError> {
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Box::new(HttpModel::new(spec, timeout)));
    }
    if let Some(path) = spec.strip_prefix("offline:") {
        let file = std::fs::File::open(path).map_err(|e| HarnessError::Config(format!("{path}: {e}")))?;
        return Ok(Box::new(OfflineModel::from_reader(path, std::io::BufReader::new(file))?));
    }
    match spec {
        "builtin:replay" => Ok(Box::new(ReplayModel)),
        "builtin:heuristic" => Ok(Box::new(HeuristicModel)),
        _ => Err(HarnessError::Config(format!("unknown model `{spec}`"))),
    }
}
