//! Command-line front end: one subcommand per pipeline stage plus
//! `pipeline` for a whole run and `compare` for side-by-side reports.
//!
//! Exit codes: 0 success, 2 parse, 3 split, 4 adapter, 5 I/O, 64 usage.

pub mod config;
pub mod failure;
pub mod files;
pub mod pipeline;
pub mod stages;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use caster_punct::metrics::{compare_reports, MetricReport};
use clap::{Args, Parser, Subcommand};

use crate::config::{FileConfig, Overrides};
use crate::failure::{Classify, CliResult, Failure, FailureClass};
use crate::files::{write_atomic, OutputRecord, SentenceRecord};

pub const LOG_ENV: &str = "CASTER_PUNCT_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "caster-punct",
    version,
    about = "Caption punctuation experiments for collaborative game commentary"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse caption files or URLs into transcript JSON.
    Ingest(IngestArgs),
    /// Merge transcript cues into commentary sentences (JSONL).
    Punctuate(PunctuateArgs),
    /// Pair adjacent sentences into (context, target) JSONL.
    Pairs(PairsArgs),
    /// Split a pairs file into train and test by video.
    Split(SplitArgs),
    /// Generate a commentary for every test pair.
    Generate(GenerateArgs),
    /// Score generated commentaries against their targets.
    Eval(EvalArgs),
    /// Run every stage from captions to report.
    Pipeline(PipelineArgs),
    /// Tabulate several reports, marking the best value per strategy.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Caption files, directories, glob patterns or http(s) URLs.
    #[arg(required = true)]
    pub inputs: Vec<String>,
    /// webvtt, srt or json3; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, default_value_t = stages::FETCH_TIMEOUT_MS)]
    pub timeout_ms: u64,
    /// Directory receiving `<video_id>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PunctuateArgs {
    /// Transcript JSON files, directories or glob patterns.
    #[arg(required = true)]
    pub inputs: Vec<String>,
    /// solo, duo, tri or k=<N>.
    #[arg(long, default_value = "duo")]
    pub strategy: String,
    /// drop or keep the trailing short group.
    #[arg(long)]
    pub remainder: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    /// Sentences JSONL written by `punctuate`.
    pub input: PathBuf,
    /// Pairs JSONL; a `.manifest.json` is written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub input: PathBuf,
    /// Fraction of videos for training, as `9/10` or `0.9`.
    #[arg(long)]
    pub train_fraction: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving pairs-train.jsonl and pairs-test.jsonl.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GeneratorArgs {
    /// retrieval, command or http. Defaults from the adapter flags.
    #[arg(long)]
    pub generator: Option<String>,
    /// Adapter program and arguments, split on whitespace.
    #[arg(long)]
    pub adapter_cmd: Option<String>,
    /// Adapter base URL; requests go to `<url>/generate`.
    #[arg(long)]
    pub adapter_url: Option<String>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Outputs JSONL.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Outputs JSONL written by `generate`.
    pub input: PathBuf,
    /// Row label used by `compare`.
    #[arg(long)]
    pub label: Option<String>,
    /// Generator name recorded in the report.
    #[arg(long)]
    pub generator: Option<String>,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Caption inputs; replaces the config file's list when given.
    pub inputs: Vec<String>,
    /// TOML run configuration. Flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub remainder: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub reports: Vec<PathBuf>,
    /// Emit CSV instead of the text table.
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                FailureClass::Usage.exit_code()
            } else {
                0
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.class.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Punctuate(a) => punctuate(a),
        Command::Pairs(a) => pairs(a),
        Command::Split(a) => split(a),
        Command::Generate(a) => generate(a),
        Command::Eval(a) => eval(a),
        Command::Pipeline(a) => run_pipeline(a),
        Command::Compare(a) => compare(a),
    }
}

fn ingest(args: IngestArgs) -> CliResult<()> {
    let inputs = config::resolve_inputs(&args.inputs, args.format.as_deref(), "ingest")?;
    for input in &inputs {
        let transcript = stages::load_captions(input, args.timeout_ms)?;
        let path = args.out.join(format!("{}.json", transcript.video_id));
        write_atomic(&path, transcript.to_json().as_bytes()).class(FailureClass::Io, "ingest")?;
        log::info!(
            "{input}: {} cues -> {}",
            transcript.cues.len(),
            path.display()
        );
    }
    Ok(())
}

fn punctuate(args: PunctuateArgs) -> CliResult<()> {
    let strategy = config::parse_strategy(&args.strategy, args.remainder.as_deref())?;
    let paths = config::expand_paths(&args.inputs, "punctuate")?;
    let transcripts = paths
        .iter()
        .map(|p| stages::read_transcript(p))
        .collect::<CliResult<Vec<_>>>()?;
    let records = stages::sentence_records(&transcripts, &strategy)?;
    write_atomic(&args.out, &files::to_jsonl(&records)).class(FailureClass::Io, "punctuate")
}

fn pairs(args: PairsArgs) -> CliResult<()> {
    stages::ensure_exists(&[&args.input], "pairs")?;
    let text = files::read_to_string(&args.input).class(FailureClass::Io, "pairs")?;
    let records: Vec<SentenceRecord> = files::parse_jsonl(&text)
        .map_err(|e| anyhow!("{}: {e}", args.input.display()))
        .class(FailureClass::Parse, "pairs")?;
    let corpus = stages::pairs_from_sentences(records)?;
    files::write_corpus(&args.out, &corpus).class(FailureClass::Io, "pairs")
}

fn split(args: SplitArgs) -> CliResult<()> {
    stages::ensure_exists(&[&args.input], "split")?;
    let spec = config::parse_split(args.train_fraction.as_deref(), args.seed)?;
    let corpus = stages::read_pairs(&args.input, "split")?;
    let (train, test) = caster_punct::dataset::split_by_video(&corpus, &spec)
        .class(FailureClass::Split, "split")?;
    files::write_corpus(&args.out.join(pipeline::TRAIN_PAIRS), &train)
        .class(FailureClass::Io, "split")?;
    files::write_corpus(&args.out.join(pipeline::TEST_PAIRS), &test)
        .class(FailureClass::Io, "split")
}

fn generator_spec(
    args: GeneratorArgs,
    file: config::GeneratorSection,
) -> CliResult<config::GeneratorSpec> {
    let command = args
        .adapter_cmd
        .as_deref()
        .map(config::split_command)
        .or(file.command);
    config::resolve_generator(
        args.generator.as_deref().or(file.kind.as_deref()),
        command,
        args.adapter_url.or(file.url),
        (
            args.timeout_ms.or(file.timeout_ms),
            args.max_retries.or(file.max_retries),
            args.workers.or(file.workers),
        ),
    )
}

fn generate(args: GenerateArgs) -> CliResult<()> {
    stages::ensure_exists(&[&args.train, &args.test], "generate")?;
    let spec = generator_spec(args.generator, Default::default())?;
    let train = stages::read_pairs(&args.train, "generate")?;
    let test = stages::read_pairs(&args.test, "generate")?;
    let generated = stages::generate(
        &train,
        &test,
        &spec,
        &args.out.with_extension("partial.jsonl"),
    )?;
    if let Some(info) = &generated.adapter_info {
        log::info!("adapter ready: {info}");
    }
    write_atomic(&args.out, &files::to_jsonl(&generated.records))
        .class(FailureClass::Io, "generate")
}

fn eval(args: EvalArgs) -> CliResult<()> {
    stages::ensure_exists(&[&args.input], "eval")?;
    let text = files::read_to_string(&args.input).class(FailureClass::Io, "eval")?;
    let records: Vec<OutputRecord> = files::parse_jsonl(&text)
        .map_err(|e| anyhow!("{}: {e}", args.input.display()))
        .class(FailureClass::Parse, "eval")?;
    let report =
        stages::evaluate_outputs(&records, args.label, args.generator, FailureClass::Parse)?;
    let json = report.to_json_pretty();
    match &args.out {
        Some(path) => write_atomic(path, json.as_bytes()).class(FailureClass::Io, "eval"),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn run_pipeline(args: PipelineArgs) -> CliResult<()> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let g = args.generator;
    let flags = Overrides {
        inputs: args.inputs,
        format: args.format,
        strategy: args.strategy,
        remainder: args.remainder,
        train_fraction: args.train_fraction,
        seed: args.seed,
        out: args.out,
        label: args.label,
        generator: g.generator,
        adapter_cmd: g.adapter_cmd,
        adapter_url: g.adapter_url,
        timeout_ms: g.timeout_ms,
        max_retries: g.max_retries,
        workers: g.workers,
    };
    let config = config::resolve(file, flags)?;
    let run = pipeline::run(&config)?;
    let counts = &run.manifest.counts;
    log::info!(
        "{} videos, {} train / {} test pairs -> {}",
        counts.videos,
        counts.train_pairs,
        counts.test_pairs,
        run.out.display()
    );
    Ok(())
}

pub fn load_report(path: &Path) -> CliResult<MetricReport> {
    let text = files::read_to_string(path).class(FailureClass::Io, "compare")?;
    MetricReport::from_json(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
        .class(FailureClass::Parse, "compare")
}

fn compare(args: CompareArgs) -> CliResult<()> {
    if args.reports.is_empty() {
        return Err(Failure::usage("compare", "at least one report is required"));
    }
    let refs: Vec<&Path> = args.reports.iter().map(PathBuf::as_path).collect();
    stages::ensure_exists(&refs, "compare")?;
    let reports = args
        .reports
        .iter()
        .map(|p| Ok((p.display().to_string(), load_report(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let table = compare_reports(&reports).class(FailureClass::Parse, "compare")?;
    let rendered = if args.csv {
        table.render_csv()
    } else {
        table.render_text()
    };
    match &args.out {
        Some(path) => write_atomic(path, rendered.as_bytes()).class(FailureClass::Io, "compare"),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
