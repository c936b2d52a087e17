//! Shared experiment configuration, loaded from one JSON file.
//!
//! Every section is optional; command-line flags override file values.
//! Relative paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusConfig, SizeFilterLevel, DEFAULT_EXTENSIONS};
use crate::harness::{BenchmarkSuite, DEFAULT_THREADS};
use crate::metrics::CodeBleuConfig;
use crate::parse::Language;
use crate::tokompiler::TokompilerConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration file {path}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Directories scanned by `corpus build` and `ompdata extract`.
    pub corpus_roots: Vec<PathBuf>,
    /// Benchmark suite file for `harness run` and `harness scale`.
    pub benchmarks: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub extensions: Vec<String>,
    pub min_tokens: usize,
    pub max_bytes: usize,
    pub size_filter: SizeFilterLevel,
    pub anonymize: bool,
    pub emit_tokens: bool,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let c = CorpusConfig::default();
        CorpusSection {
            extensions: DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
            min_tokens: c.min_tokens,
            max_bytes: c.max_bytes,
            size_filter: c.size_filter,
            anonymize: c.anonymize,
            emit_tokens: c.emit_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub codebleu: CodeBleuConfig,
    /// Largest `<k` bucket of the variable-count accuracy curves.
    pub curve_max_lt: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            codebleu: CodeBleuConfig::default(),
            curve_max_lt: 6,
        }
    }
}

/// Commands substituted for `{cc}`, `{cxx}` and `{omp}` in benchmark build templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolchainConfig {
    pub cc: String,
    pub cxx: String,
    pub openmp_flags: String,
}

impl Default for ToolchainConfig {
    fn default() -> Self {
        ToolchainConfig {
            cc: "gcc".into(),
            cxx: "g++".into(),
            openmp_flags: "-fopenmp".into(),
        }
    }
}

impl ToolchainConfig {
    pub fn expand(&self, template: &str) -> String {
        template
            .replace("{cc}", &self.cc)
            .replace("{cxx}", &self.cxx)
            .replace("{omp}", &self.openmp_flags)
    }

    pub fn apply(&self, suite: &mut BenchmarkSuite) {
        for b in &mut suite.benchmarks {
            b.build = self.expand(&b.build);
            b.run = self.expand(&b.run);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessSection {
    pub threads: Vec<usize>,
    pub model_timeout_s: f64,
    pub model_retries: u32,
    /// Thread count used when re-checking false positives by compile-and-run.
    pub verify_threads: usize,
}

impl Default for HarnessSection {
    fn default() -> Self {
        HarnessSection {
            threads: DEFAULT_THREADS.to_vec(),
            model_timeout_s: 60.0,
            model_retries: 3,
            verify_threads: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub seed: u64,
    /// Language assumed for inputs whose extension does not say.
    pub language: Option<Language>,
    pub paths: PathsConfig,
    pub tokompiler: TokompilerConfig,
    pub corpus: CorpusSection,
    pub eval: EvalSection,
    pub toolchain: ToolchainConfig,
    pub harness: HarnessSection,
}

impl GlobalConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        for r in &mut self.paths.corpus_roots {
            if r.is_relative() {
                *r = dir.join(&*r);
            }
        }
        if let Some(b) = &mut self.paths.benchmarks {
            if b.is_relative() {
                *b = dir.join(&*b);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.tokompiler.suffix_range_max == 0 {
            return bad("tokompiler.suffix_range_max must be at least 1".into());
        }
        let w = self.eval.codebleu.weights;
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return bad(format!("eval.codebleu.weights must be non-negative with a positive sum, got {w:?}"));
        }
        if self.eval.codebleu.max_n == 0 {
            return bad("eval.codebleu.max_n must be at least 1".into());
        }
        if self.eval.curve_max_lt < 2 {
            return bad("eval.curve_max_lt must be at least 2".into());
        }
        if self.harness.threads.is_empty() || self.harness.threads.contains(&0) {
            return bad("harness.threads must be a non-empty list of positive counts".into());
        }
        if !(self.harness.model_timeout_s > 0.0) {
            return bad("harness.model_timeout_s must be positive".into());
        }
        if self.harness.verify_threads == 0 {
            return bad("harness.verify_threads must be positive".into());
        }
        if self.corpus.extensions.is_empty() {
            return bad("corpus.extensions is empty".into());
        }
        Ok(())
    }

    /// Corpus pipeline settings with the global seed and tokompiler settings.
    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            roots: self.paths.corpus_roots.clone(),
            extensions: self.corpus.extensions.clone(),
            min_tokens: self.corpus.min_tokens,
            max_bytes: self.corpus.max_bytes,
            size_filter: self.corpus.size_filter,
            anonymize: self.corpus.anonymize,
            emit_tokens: self.corpus.emit_tokens,
            seed: self.seed,
            tokompiler: self.tokompiler,
        }
    }
}
