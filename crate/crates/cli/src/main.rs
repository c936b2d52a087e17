#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpcoder::config::GlobalConfig;
use hpcoder::exec::Jobs;

mod data;
mod eval;
mod harness;
mod io;
mod tokompile;

#[derive(Parser)]
#[command(name = "hpcoder", version, about = "Anonymization, dataset curation and evaluation tooling for HPC code models")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalArgs {
    /// JSON configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (overrides the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker cap; 0 uses all logical cores
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// More log output on stderr (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Anonymize the functions of C/C++ files
    Tokompile(tokompile::TokompileArgs),
    /// Build and inspect function corpora
    #[command(subcommand)]
    Corpus(data::CorpusCommand),
    /// Extract OpenMP loop datasets
    #[command(subcommand)]
    Ompdata(data::OmpdataCommand),
    /// Score predictions
    #[command(subcommand)]
    Eval(eval::EvalCommand),
    /// Auto-parallelization harness
    #[command(subcommand)]
    Harness(harness::HarnessCommand),
    /// Render a JSON report as a table or CSV
    Report(ReportArgs),
}

#[derive(Args)]
struct ReportArgs {
    report: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

/// Settings shared by every subcommand.
pub struct Ctx {
    pub config: GlobalConfig,
    pub jobs: Jobs,
}

impl Ctx {
    fn new(g: &GlobalArgs) -> anyhow::Result<Ctx> {
        let mut config = match &g.config {
            Some(p) => GlobalConfig::load(p)?,
            None => GlobalConfig::default(),
        };
        if let Some(s) = g.seed {
            config.seed = s;
        }
        Ok(Ctx {
            config,
            jobs: Jobs(g.jobs),
        })
    }
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
}

fn report(args: &ReportArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.report)?;
    let r = hpcoder::report::Report::from_json(&text)?;
    let out = match args.format {
        Format::Text => r.render_text(),
        Format::Csv => r.render_csv()?,
    };
    io::write_text(args.out.as_deref(), &out)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = Ctx::new(&cli.global)?;
    match cli.command {
        Command::Tokompile(a) => tokompile::run(&ctx, a),
        Command::Corpus(c) => data::corpus(&ctx, c),
        Command::Ompdata(c) => data::ompdata(&ctx, c),
        Command::Eval(c) => eval::run(&ctx, c),
        Command::Harness(c) => harness::run(&ctx, c),
        Command::Report(a) => report(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.global.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
