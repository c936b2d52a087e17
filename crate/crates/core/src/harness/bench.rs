use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedOutput {
    File(PathBuf),
    Text(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Compare {
    #[default]
    Exact,
    Numeric { rel_eps: f64 },
}

fn default_timeout() -> f64 {
    600.0
}

fn default_repeats() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub name: String,
    /// Paths relative to the suite file.
    pub sources: Vec<PathBuf>,
    /// Shell template with `{src}` and `{bin}`.
    pub build: String,
    /// Shell template with `{bin}`.
    pub run: String,
    pub expected_output: ExpectedOutput,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
    #[serde(default)]
    pub compare: Compare,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(format!("benchmark `{}`: {m}", self.name)));
        if !self.build.contains("{src}") || !self.build.contains("{bin}") {
            return bad("build template needs {src} and {bin}");
        }
        if !self.run.contains("{bin}") {
            return bad("run template needs {bin}");
        }
        if !(self.timeout_s > 0.0) {
            return bad("timeout_s must be positive");
        }
        if self.sources.is_empty() {
            return bad("no sources");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSuite {
    #[serde(default)]
    pub v: Option<u32>,
    pub benchmarks: Vec<BenchmarkSpec>,
    /// Directory the relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl BenchmarkSuite {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut suite: BenchmarkSuite =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        suite.base_dir = path.parent().map(Path::to_owned).unwrap_or_default();
        for b in &suite.benchmarks {
            b.validate()?;
        }
        Ok(suite)
    }

    /// `(relative path, text)` of each source of a benchmark.
    pub fn read_sources(&self, bench: &BenchmarkSpec) -> Result<Vec<(PathBuf, String)>, HarnessError> {
        bench
            .sources
            .iter()
            .map(|rel| {
                let p = self.base_dir.join(rel);
                std::fs::read_to_string(&p)
                    .map(|t| (rel.clone(), t))
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
            })
            .collect()
    }

    pub fn expected(&self, bench: &BenchmarkSpec) -> Result<String, HarnessError> {
        match &bench.expected_output {
            ExpectedOutput::Text(t) => Ok(t.clone()),
            ExpectedOutput::File(f) => {
                let p = self.base_dir.join(f);
                std::fs::read_to_string(&p).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    CompileFail,
    RunFail,
    OutputMismatch,
    Timeout,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::Pass,
        Verdict::CompileFail,
        Verdict::RunFail,
        Verdict::OutputMismatch,
        Verdict::Timeout,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub verdict: Verdict,
    /// Median wall time of the run command; present for Pass and OutputMismatch.
    pub wall_time_s: Option<f64>,
    /// `None` means OMP_NUM_THREADS was left unset.
    pub threads: Option<usize>,
    pub diagnostics: String,
}

const DIAG_LIMIT: usize = 4000;

fn clip(s: &str) -> String {
    if s.len() <= DIAG_LIMIT {
        return s.to_owned();
    }
    let mut end = DIAG_LIMIT;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}…", &s[..end])
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', "'\\''"))
}

enum Exit {
    Finished { ok: bool, code: Option<i32> },
    TimedOut,
}

/// Run `sh -c cmd` in its own process group, killing the group on timeout.
fn run_shell(
    cmd: &str,
    dir: &Path,
    env: &BTreeMap<String, String>,
    threads: Option<usize>,
    timeout: Duration,
    stdout: &Path,
    stderr: &Path,
) -> Result<(Exit, Duration), HarnessError> {
    use std::os::unix::process::CommandExt;
    let mut c = Command::new("sh");
    c.arg("-c")
        .arg(cmd)
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(File::create(stdout)?)
        .stderr(File::create(stderr)?)
        .process_group(0);
    for (k, v) in env {
        c.env(k, v);
    }
    match threads {
        Some(t) => c.env("OMP_NUM_THREADS", t.to_string()),
        None => c.env_remove("OMP_NUM_THREADS"),
    };
    let start = Instant::now();
    let mut child = c
        .spawn()
        .map_err(|e| HarnessError::Config(format!("cannot start sh: {e}")))?;
    let status = child.wait_timeout(timeout)?;
    let elapsed = start.elapsed();
    match status {
        Some(s) => Ok((
            Exit::Finished {
                ok: s.success(),
                code: s.code(),
            },
            elapsed,
        )),
        None => {
            // SAFETY: kill(2) on our own child's process group id
            unsafe {
                libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
            }
            let _ = child.wait();
            Ok((Exit::TimedOut, elapsed))
        }
    }
}

/// Compare program output with the reference.
pub fn outputs_match(actual: &str, expected: &str, mode: Compare) -> bool {
    match mode {
        Compare::Exact => actual == expected,
        Compare::Numeric { rel_eps } => {
            let a: Vec<&str> = actual.lines().collect();
            let e: Vec<&str> = expected.lines().collect();
            a.len() == e.len()
                && a.iter().zip(&e).all(|(la, le)| {
                    let ta: Vec<&str> = la.split_whitespace().collect();
                    let te: Vec<&str> = le.split_whitespace().collect();
                    ta.len() == te.len()
                        && ta.iter().zip(&te).all(|(x, y)| match (x.parse::<f64>(), y.parse::<f64>()) {
                            (Ok(x), Ok(y)) => {
                                x == y || (x - y).abs() <= rel_eps * x.abs().max(y.abs())
                            }
                            _ => x == y,
                        })
                })
        }
    }
}

/// Build the given sources and run the binary `bench.repeats` times.
/// A missing compiler or shell is a configuration error; everything else is
/// a verdict.
pub fn compile_and_run(
    bench: &BenchmarkSpec,
    sources: &[(PathBuf, String)],
    expected: &str,
    threads: Option<usize>,
) -> Result<RunOutcome, HarnessError> {
    let dir = tempfile::tempdir()?;
    let mut paths = Vec::new();
    for (rel, text) in sources {
        let p = dir.path().join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&p, text)?;
        if rel.extension().is_some_and(|e| e != "h" && e != "hpp") {
            paths.push(quote(&p));
        }
    }
    let bin = dir.path().join("bench.bin");
    let timeout = Duration::from_secs_f64(bench.timeout_s);
    let (out_p, err_p) = (dir.path().join("stdout"), dir.path().join("stderr"));
    let outcome = |verdict, wall_time_s, diagnostics: String| RunOutcome {
        verdict,
        wall_time_s,
        threads,
        diagnostics: clip(&diagnostics),
    };

    let build = bench.build.replace("{src}", &paths.join(" ")).replace("{bin}", &quote(&bin));
    let (exit, _) = run_shell(&build, dir.path(), &bench.env, threads, timeout, &out_p, &err_p)?;
    let build_err = std::fs::read_to_string(&err_p).unwrap_or_default();
    match exit {
        Exit::TimedOut => return Ok(outcome(Verdict::CompileFail, None, "build timed out".into())),
        Exit::Finished { code: Some(127), .. } => {
            return Err(HarnessError::Toolchain(format!("`{build}`: {}", build_err.trim())));
        }
        Exit::Finished { ok: false, .. } => return Ok(outcome(Verdict::CompileFail, None, build_err)),
        Exit::Finished { ok: true, .. } => {}
    }

    let run = bench.run.replace("{bin}", &quote(&bin));
    let mut times = Vec::new();
    let mut mismatch = None;
    for _ in 0..bench.repeats {
        let (exit, elapsed) = run_shell(&run, dir.path(), &bench.env, threads, timeout, &out_p, &err_p)?;
        match exit {
            Exit::TimedOut => {
                return Ok(outcome(Verdict::Timeout, None, format!("killed after {}s", bench.timeout_s)));
            }
            Exit::Finished { ok: false, code } => {
                let err = std::fs::read_to_string(&err_p).unwrap_or_default();
                return Ok(outcome(Verdict::RunFail, None, format!("exit {code:?}: {err}")));
            }
            Exit::Finished { ok: true, .. } => {}
        }
        times.push(elapsed.as_secs_f64());
        let actual = String::from_utf8_lossy(&std::fs::read(&out_p)?).into_owned();
        if mismatch.is_none() && !outputs_match(&actual, expected, bench.compare) {
            mismatch = Some(actual);
        }
    }
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    Ok(match mismatch {
        Some(actual) => outcome(Verdict::OutputMismatch, Some(median), format!("unexpected output:\n{actual}")),
        None => outcome(Verdict::Pass, Some(median), String::new()),
    })
}
