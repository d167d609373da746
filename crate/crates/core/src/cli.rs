//! The `semsketch` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.
//! Diagnostics go to stderr; machine output goes to files or stdout.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{ingest_contexts, ingest_corpus, read_mapping, Flag, HeadRule, IngestConfig};
use crate::dataset::{
    emit_dataset, published_splits, parse_pool, split_dataset, write_file, SplitOptions, SplitSpec,
};
use crate::error::{io_err, Error, Result};
use crate::eval::accuracy;
use crate::fill::plugin::{Capability, PluginPool};
use crate::fill::{CooccurrenceModel, Embedder, FillModel};
use crate::matchers::{match_all, MatchConfig, Plugins, Strategy};
use crate::render::{file_name, render_sketch};
use crate::sketch::{
    anonymize, build_all, parse_secret, read_sketches, write_secret, write_sketches, BuildConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "semsketch",
    version,
    about = "Build, anonymize, match and score semantic sketches"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dependency-record file and/or a context file and print counts.
    Ingest(IngestArgs),
    /// Build named sketches from a dependency-record file.
    Build(BuildArgs),
    /// Hide the senses of built sketches behind opaque ids.
    Anonymize(AnonymizeArgs),
    /// Sample trial / dev / manual_dev splits with gold mappings.
    Dataset(DatasetArgs),
    /// Map contexts to sketches with one of the matching strategies.
    Match(MatchArgs),
    /// Score a predicted mapping against gold.
    Score(ScoreArgs),
    /// Render sketches as HTML tables.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    contexts: Option<PathBuf>,
    /// Lowercase lexeme groups and filler lemmas.
    #[arg(long)]
    lowercase: bool,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory; receives sketches.jsonl.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    threshold: u64,
    #[arg(long, default_value_t = 2)]
    min_meanings: usize,
    #[arg(long, default_value_t = 8)]
    max_roles: usize,
    #[arg(long, default_value_t = 10)]
    max_fillers: usize,
    /// Comma-separated flags whose records are dropped; empty keeps all.
    #[arg(long, default_value = "PRONOUN,PERSONAL_NOUN,ELLIPTED,MOVED")]
    exclude: String,
    #[arg(long)]
    lowercase: bool,
}

#[derive(Debug, Args)]
struct AnonymizeArgs {
    #[arg(long)]
    sketches: PathBuf,
    /// Output directory; receives sketches.jsonl and secret.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Anonymized sketches.
    #[arg(long)]
    sketches: PathBuf,
    #[arg(long)]
    secret: PathBuf,
    /// Context pool: context JSON lines with a `sense` object each.
    #[arg(long)]
    pool: PathBuf,
    /// Output directory; receives <split>/ directories and answers/.
    #[arg(long)]
    out: PathBuf,
    /// `name=sketches,contexts_per_sketch[,total_contexts]`; repeatable.
    #[arg(long = "split", value_name = "SPEC")]
    splits: Vec<String>,
    /// Use the published split sizes (20/2000, 895/44750, 100/4347).
    #[arg(long, conflicts_with = "splits")]
    published_splits: bool,
    /// Fail when a sketch has fewer contexts than requested.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    sketches: PathBuf,
    #[arg(long)]
    contexts: PathBuf,
    #[arg(long)]
    strategy: String,
    /// Output mapping file.
    #[arg(long)]
    out: PathBuf,
    /// Dependency records for the built-in co-occurrence fill model.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Command for an external fill/embed plugin.
    #[arg(long)]
    plugin: Option<String>,
    #[arg(long, default_value_t = 1000)]
    top_n: usize,
    /// Cell template with {mask} and {cell} slots.
    #[arg(long, default_value = "{mask} {cell}")]
    template: String,
    #[arg(long, default_value_t = 1)]
    restoration_top_k: usize,
    /// Head lemma of multiword fillers: last, first or whole.
    #[arg(long, default_value = "last")]
    head_rule: String,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    sketches: PathBuf,
    /// Output directory; one HTML file per sketch.
    #[arg(long)]
    out: PathBuf,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

fn usage<T, E: std::fmt::Display>(
    r: std::result::Result<T, E>,
) -> std::result::Result<T, CliError> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

fn dispatch(cli: Cli) -> std::result::Result<(), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Build(a) => build(a),
        Command::Anonymize(a) => {
            let sketches = read_sketches(&a.sketches)?;
            let anon = anonymize(&sketches, seed)?;
            create_dir(&a.out)?;
            write_file(
                &a.out.join("sketches.jsonl"),
                &write_sketches(&anon.sketches)?,
            )?;
            write_file(&a.out.join("secret.json"), &write_secret(&anon.secret)?)?;
            eprintln!("anonymized {} sketches", anon.sketches.len());
            Ok(())
        }
        Command::Dataset(a) => dataset(a, seed),
        Command::Match(a) => match_cmd(a),
        Command::Score(a) => {
            let pred = read_mapping(&a.pred)?;
            let gold = read_mapping(&a.gold)?;
            let report = accuracy(&pred, &gold);
            if report.n_total == 0 {
                eprintln!("warning: gold mapping is empty");
            }
            if report.n_extraneous > 0 {
                eprintln!(
                    "warning: {} predicted contexts are not in gold",
                    report.n_extraneous
                );
            }
            println!("{}", report.formatted());
            if let Some(path) = a.report {
                let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
                json.push('\n');
                write_file(&path, &json)?;
            }
            Ok(())
        }
        Command::Render(a) => {
            let sketches = read_sketches(&a.sketches)?;
            create_dir(&a.out)?;
            for sk in &sketches {
                render_sketch(sk, a.out.join(file_name(&sk.id)))?;
            }
            eprintln!("rendered {} sketches", sketches.len());
            Ok(())
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn ingest(a: IngestArgs) -> std::result::Result<(), CliError> {
    if a.corpus.is_none() && a.contexts.is_none() {
        return Err(CliError::Usage(
            "ingest needs --corpus and/or --contexts".into(),
        ));
    }
    let mut summary = serde_json::Map::new();
    if let Some(path) = &a.corpus {
        let cfg = IngestConfig {
            lowercase_lemmas: a.lowercase,
        };
        let records = ingest_corpus(path, &cfg)?;
        let senses: BTreeSet<_> = records.iter().map(|r| &r.sense).collect();
        summary.insert("records".into(), records.len().into());
        summary.insert("senses".into(), senses.len().into());
    }
    if let Some(path) = &a.contexts {
        summary.insert("contexts".into(), ingest_contexts(path)?.len().into());
    }
    println!("{}", serde_json::Value::Object(summary));
    Ok(())
}

fn build(a: BuildArgs) -> std::result::Result<(), CliError> {
    let excluded_flags = if a.exclude.is_empty() {
        BTreeSet::new()
    } else {
        usage(
            a.exclude
                .split(',')
                .map(str::parse::<Flag>)
                .collect::<Result<_>>(),
        )?
    };
    let cfg = BuildConfig {
        dependency_threshold: a.threshold,
        min_meanings: a.min_meanings,
        max_roles: a.max_roles,
        max_fillers_per_role: a.max_fillers,
        excluded_flags,
    };
    usage(cfg.validate())?;
    let records = ingest_corpus(
        &a.corpus,
        &IngestConfig {
            lowercase_lemmas: a.lowercase,
        },
    )?;
    let sketches = build_all(&records, &cfg)?;
    create_dir(&a.out)?;
    write_file(&a.out.join("sketches.jsonl"), &write_sketches(&sketches)?)?;
    eprintln!(
        "built {} sketches from {} records",
        sketches.len(),
        records.len()
    );
    Ok(())
}

fn dataset(a: DatasetArgs, seed: u64) -> std::result::Result<(), CliError> {
    let specs: Vec<SplitSpec> = if a.published_splits {
        published_splits()
    } else if a.splits.is_empty() {
        return Err(CliError::Usage(
            "dataset needs --split or --published-splits".into(),
        ));
    } else {
        usage(a.splits.iter().map(|s| s.parse()).collect::<Result<_>>())?
    };
    let sketches = read_sketches(&a.sketches)?;
    let secret_path = &a.secret;
    let secret = parse_secret(&fs::read_to_string(secret_path).map_err(io_err(secret_path))?)
        .map_err(|e| e.in_file(secret_path))?;
    let pool = parse_pool(&fs::read_to_string(&a.pool).map_err(io_err(&a.pool))?)
        .map_err(|e| e.in_file(&a.pool))?;
    if let Some(sk) = sketches.iter().find(|s| s.sense.is_some()) {
        return Err(Error::invalid("sketches", format!("{} is not anonymized", sk.id)).into());
    }
    let anon = crate::sketch::Anonymized { sketches, secret };
    let out = split_dataset(
        &anon,
        &pool,
        &specs,
        seed,
        &SplitOptions { strict: a.strict },
    )?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let answers = a.out.join("answers");
    create_dir(&answers)?;
    for ds in &out.datasets {
        emit_dataset(ds, a.out.join(ds.split.name.as_str()))?;
        write_file(
            &answers.join(format!("{}.json", ds.split.name)),
            &ds.gold.to_json()?,
        )?;
        eprintln!(
            "{}: {} sketches, {} contexts",
            ds.split.name,
            ds.sketches.len(),
            ds.contexts.len()
        );
    }
    Ok(())
}

fn match_cmd(a: MatchArgs) -> std::result::Result<(), CliError> {
    let strategy: Strategy = usage(a.strategy.parse())?;
    let config = MatchConfig {
        strategy,
        top_n: a.top_n,
        template_pattern: a.template.clone(),
        restoration_top_k: a.restoration_top_k,
        head_rule: usage(a.head_rule.parse::<HeadRule>())?,
        jobs: a.jobs.max(1),
    };
    usage(config.validate())?;
    if strategy.needs_fill() && a.plugin.is_none() && a.corpus.is_none() {
        return Err(CliError::Usage(format!(
            "{strategy} needs --corpus or --plugin"
        )));
    }
    if strategy == Strategy::FlattenSimilarity && a.plugin.is_none() {
        return Err(CliError::Usage(format!(
            "{strategy} needs an embedding --plugin"
        )));
    }

    let sketches = read_sketches(&a.sketches)?;
    let contexts = ingest_contexts(&a.contexts)?;
    let pool = match &a.plugin {
        Some(cmd) => Some(PluginPool::spawn(cmd, config.jobs)?),
        None => None,
    };
    let builtin = match &a.corpus {
        Some(path) => Some(CooccurrenceModel::train_with(
            &ingest_corpus(path, &IngestConfig::default())?,
            config.head_rule,
        )),
        None => None,
    };
    let fill: Option<&dyn FillModel> = match (&pool, &builtin) {
        (Some(p), _) if p.has(Capability::Fill) => Some(p),
        (_, Some(m)) => Some(m),
        _ => None,
    };
    let embed: Option<&dyn Embedder> = pool
        .as_ref()
        .filter(|p| p.has(Capability::Embed))
        .map(|p| p as _);

    let out = match_all(&contexts, &sketches, &config, Plugins { fill, embed })?;
    if !out.flagged.is_empty() {
        eprintln!(
            "warning: {} of {} contexts had no evidence and fell back to id order",
            out.flagged.len(),
            contexts.len()
        );
    }
    write_file(&a.out, &out.mapping.to_json()?)?;
    Ok(())
}
