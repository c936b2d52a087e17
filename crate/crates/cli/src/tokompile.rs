use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use hpcoder::corpus::{ingest, RawFile};
use hpcoder::exec::map_ordered;
use hpcoder::parse::{decode_source, extract_functions, parse_str, FileId, Language, Span};
use hpcoder::tokompiler::{anonymize, lexicalize, unit_seed, RenameMap, TokompilerConfig};
use serde::Serialize;

use crate::{io, Ctx};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    C,
    Cpp,
}

impl From<Lang> for Language {
    fn from(l: Lang) -> Language {
        match l {
            Lang::C => Language::C,
            Lang::Cpp => Language::Cpp,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Code,
    Tokens,
    Map,
}

#[derive(Args)]
pub struct TokompileArgs {
    /// Files or directories
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Language of every input (default: from the file extension)
    #[arg(long, value_enum)]
    lang: Option<Lang>,
    /// Largest random suffix
    #[arg(long)]
    suffix_max: Option<u64>,
    /// Grow the suffix range instead of failing when it is too small
    #[arg(long)]
    auto_extend: bool,
    /// Payload fields of each record
    #[arg(long, value_enum, value_delimiter = ',', default_value = "code")]
    emit: Vec<Emit>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Record {
    v: u32,
    file_id: FileId,
    name: String,
    span: Span,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<RenameMap>,
}

fn inputs(args: &TokompileArgs, ctx: &Ctx) -> anyhow::Result<Vec<RawFile>> {
    let forced = args.lang.map(Language::from);
    let mut files = Vec::new();
    for p in &args.paths {
        if p.is_dir() {
            let mut found = ingest(std::slice::from_ref(p), &ctx.config.corpus.extensions);
            if let Some(l) = forced {
                found.iter_mut().for_each(|f| f.language = l);
            }
            files.extend(found);
            continue;
        }
        let bytes = std::fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
        let ext_lang = p.extension().and_then(|e| e.to_str()).and_then(Language::from_extension);
        let Some(lang) = forced.or(ext_lang).or(ctx.config.language) else {
            bail!("cannot tell the language of {}; pass --lang", p.display());
        };
        files.push(RawFile::new(p.clone(), ".".into(), bytes, lang));
    }
    Ok(files)
}

pub fn run(ctx: &Ctx, args: TokompileArgs) -> anyhow::Result<()> {
    let mut config: TokompilerConfig = ctx.config.tokompiler;
    if let Some(m) = args.suffix_max {
        config.suffix_range_max = m;
    }
    config.auto_extend |= args.auto_extend;
    if config.suffix_range_max == 0 {
        bail!("--suffix-max must be at least 1");
    }
    let seed = ctx.config.seed;
    let mut units = Vec::new();
    for f in inputs(&args, ctx)? {
        let text = match decode_source(&f.bytes) {
            Ok(t) => t,
            Err(e) => {
                tracing::warn!("skipping {}: {e}", f.path.display());
                continue;
            }
        };
        units.extend(extract_functions(&parse_str(&text, f.language), &f.content_hash));
    }
    let results = map_ordered(&units, ctx.jobs, |u| {
        let s = unit_seed(seed, &u.file_id, u.byte_span);
        (s, anonymize(u, s, &config))
    });
    let mut records = Vec::new();
    for (u, (s, r)) in units.iter().zip(results) {
        let anon = match r {
            Ok(a) => a,
            Err(e) => {
                tracing::warn!("{} in {}: {e}", u.name, u.file_id.as_str());
                continue;
            }
        };
        records.push(Record {
            v: hpcoder::SCHEMA_VERSION,
            file_id: u.file_id.clone(),
            name: u.name.clone(),
            span: u.byte_span,
            seed: s,
            code: args.emit.contains(&Emit::Code).then(|| anon.code.clone()),
            tokens: args.emit.contains(&Emit::Tokens).then(|| lexicalize(&anon).tokens),
            map: args.emit.contains(&Emit::Map).then(|| anon.map.clone()),
        });
    }
    tracing::info!(functions = units.len(), anonymized = records.len(), "tokompile done");
    io::write_jsonl(args.out.as_deref(), &records)
}
