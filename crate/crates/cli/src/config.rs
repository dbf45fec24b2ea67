//! Run configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::anyhow;
use caster_punct::captions::CaptionFormat;
use caster_punct::dataset::SplitSpec;
use caster_punct::generation::{AdapterTransport, ExternalConfig};
use caster_punct::punctuation::{RemainderPolicy, Strategy};
use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure, FailureClass};

const STAGE: &str = "config";

/// The file form. Every field is optional so flags can fill the gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub inputs: Vec<String>,
    pub format: Option<String>,
    pub strategy: Option<String>,
    pub remainder: Option<String>,
    pub train_fraction: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub label: Option<String>,
    #[serde(default)]
    pub generator: GeneratorSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub kind: Option<String>,
    pub command: Option<Vec<String>>,
    pub url: Option<String>,
    pub timeout_ms: Option<u64>,
    pub max_retries: Option<u32>,
    pub workers: Option<usize>,
}

impl FileConfig {
    /// Relative paths in the file are taken relative to the file itself.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::new(
                FailureClass::Io,
                STAGE,
                anyhow!("reading {}: {e}", path.display()),
            )
        })?;
        let mut config: FileConfig = toml::from_str(&text)
            .map_err(|e| Failure::usage(STAGE, format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for input in &mut config.inputs {
            if !is_url(input) && Path::new(input).is_relative() {
                *input = base.join(&*input).to_string_lossy().into_owned();
            }
        }
        if let Some(out) = &config.out {
            if out.is_relative() {
                config.out = Some(base.join(out));
            }
        }
        Ok(config)
    }
}

/// Values given on the command line; `Some` wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub inputs: Vec<String>,
    pub format: Option<String>,
    pub strategy: Option<String>,
    pub remainder: Option<String>,
    pub train_fraction: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub label: Option<String>,
    pub generator: Option<String>,
    pub adapter_cmd: Option<String>,
    pub adapter_url: Option<String>,
    pub timeout_ms: Option<u64>,
    pub max_retries: Option<u32>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    File(PathBuf),
    Url(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSpec {
    pub source: InputSource,
    pub format: CaptionFormat,
    pub video_id: String,
}

impl InputSpec {
    pub fn display(&self) -> String {
        match &self.source {
            InputSource::File(p) => p.display().to_string(),
            InputSource::Url(u) => u.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    Retrieval,
    External(ExternalConfig),
}

impl GeneratorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Retrieval => "retrieval",
            GeneratorSpec::External(c) => match c.transport {
                AdapterTransport::Command { .. } => "command",
                AdapterTransport::Http { .. } => "http",
            },
        }
    }

    pub fn record(&self) -> serde_json::Value {
        match self {
            GeneratorSpec::Retrieval => serde_json::json!({"kind": "retrieval"}),
            GeneratorSpec::External(c) => {
                let target = match &c.transport {
                    AdapterTransport::Command { program, args } => {
                        let mut command = vec![program.clone()];
                        command.extend(args.iter().cloned());
                        serde_json::json!({"command": command})
                    }
                    AdapterTransport::Http { url } => serde_json::json!({"url": url}),
                };
                serde_json::json!({
                    "kind": self.kind(),
                    "target": target,
                    "timeout_ms": c.timeout_ms,
                    "max_retries": c.max_retries,
                    "workers": c.workers,
                })
            }
        }
    }
}

/// A validated configuration: inputs exist, the strategy and split parse.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<InputSpec>,
    pub strategy: Strategy,
    pub split: SplitSpec,
    pub generator: GeneratorSpec,
    pub out: PathBuf,
    pub label: Option<String>,
}

/// The fields that determine a run's results, hashed into the manifest.
/// The output directory is left out: moving a run does not change it.
#[derive(Serialize)]
struct HashedConfig<'a> {
    inputs: Vec<HashedInput>,
    strategy: String,
    remainder: String,
    train_fraction: String,
    seed: u64,
    generator: serde_json::Value,
    label: &'a Option<String>,
}

#[derive(Serialize)]
struct HashedInput {
    source: String,
    format: &'static str,
    video_id: String,
}

impl RunConfig {
    pub fn canonical_json(&self) -> String {
        let (num, den) = self.split.train_fraction();
        let hashed = HashedConfig {
            inputs: self
                .inputs
                .iter()
                .map(|i| HashedInput {
                    source: i.display(),
                    format: i.format.as_str(),
                    video_id: i.video_id.clone(),
                })
                .collect(),
            strategy: self.strategy.name(),
            remainder: self.strategy.remainder.to_string(),
            train_fraction: format!("{num}/{den}"),
            seed: self.split.seed,
            generator: self.generator.record(),
            label: &self.label,
        };
        serde_json::to_string(&hashed).expect("config serialization is infallible")
    }
}

pub fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://")
}

pub fn parse_strategy(spec: &str, remainder: Option<&str>) -> CliResult<Strategy> {
    let strategy: Strategy = spec.parse().map_err(|e| Failure::usage(STAGE, e))?;
    match remainder {
        Some(r) => {
            let policy: RemainderPolicy = r.parse().map_err(|e| Failure::usage(STAGE, e))?;
            Ok(strategy.with_remainder(policy))
        }
        None => Ok(strategy),
    }
}

pub fn parse_split(fraction: Option<&str>, seed: Option<u64>) -> CliResult<SplitSpec> {
    let mut spec = match fraction {
        Some(f) => {
            let (n, d) = SplitSpec::parse_fraction(f).map_err(|e| Failure::usage(STAGE, e))?;
            SplitSpec::new(n, d, 0).map_err(|e| Failure::usage(STAGE, e))?
        }
        None => SplitSpec::default(),
    };
    if let Some(seed) = seed {
        spec = spec.with_seed(seed);
    }
    Ok(spec)
}

/// Format from the file extension, unless one is forced.
pub fn caption_format(name: &str, forced: Option<&str>) -> CliResult<CaptionFormat> {
    if let Some(f) = forced {
        return f.parse().map_err(|e| Failure::usage(STAGE, e));
    }
    let path = name.split(['?', '#']).next().unwrap_or(name);
    let ext = Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "vtt" | "webvtt" => Ok(CaptionFormat::Webvtt),
        "srt" => Ok(CaptionFormat::Srt),
        "json3" | "json" => Ok(CaptionFormat::Json3),
        _ => Err(Failure::usage(
            STAGE,
            format!("cannot infer caption format of `{name}`; pass --format"),
        )),
    }
}

fn video_id_of(name: &str) -> String {
    let path = name.split(['?', '#']).next().unwrap_or(name);
    let stem = Path::new(path.trim_end_matches('/'))
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned());
    stem.filter(|s| !s.is_empty())
        .unwrap_or_else(|| "video".to_string())
}

const CAPTION_EXTENSIONS: [&str; 5] = ["vtt", "webvtt", "srt", "json3", "json"];

/// Expands files, directories and glob patterns into a sorted, duplicate-free
/// list. A missing literal path or a pattern matching nothing is an I/O failure.
pub fn expand_paths(patterns: &[String], stage: &'static str) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pattern in patterns {
        let path = Path::new(pattern);
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| {
                    Failure::new(FailureClass::Io, stage, anyhow!("reading {pattern}: {e}"))
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file()
                        && p.extension().and_then(|e| e.to_str()).is_some_and(|e| {
                            CAPTION_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str())
                        })
                })
                .collect();
            files.sort();
            out.extend(files);
        } else if path.exists() {
            out.push(path.to_path_buf());
        } else if pattern.contains(['*', '?', '[']) {
            let matches: Vec<PathBuf> = glob::glob(pattern)
                .map_err(|e| Failure::usage(stage, format!("bad pattern `{pattern}`: {e}")))?
                .filter_map(Result::ok)
                .filter(|p| p.is_file())
                .collect();
            if matches.is_empty() {
                return Err(Failure::new(
                    FailureClass::Io,
                    stage,
                    anyhow!("pattern `{pattern}` matches no files"),
                ));
            }
            out.extend(matches);
        } else {
            return Err(Failure::new(
                FailureClass::Io,
                stage,
                anyhow!("no such file: {pattern}"),
            ));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|p| seen.insert(p.clone()));
    Ok(out)
}

/// Turns input strings into caption inputs with formats and unique video ids.
pub fn resolve_inputs(
    inputs: &[String],
    format: Option<&str>,
    stage: &'static str,
) -> CliResult<Vec<InputSpec>> {
    if inputs.is_empty() {
        return Err(Failure::usage(stage, "no caption inputs given"));
    }
    let mut specs = Vec::new();
    for input in inputs {
        if is_url(input) {
            specs.push(InputSpec {
                source: InputSource::Url(input.clone()),
                format: caption_format(input, format)?,
                video_id: video_id_of(input),
            });
            continue;
        }
        for path in expand_paths(std::slice::from_ref(input), stage)? {
            let name = path.to_string_lossy().into_owned();
            specs.push(InputSpec {
                format: caption_format(&name, format)?,
                video_id: video_id_of(&name),
                source: InputSource::File(path),
            });
        }
    }
    let mut ids = std::collections::BTreeSet::new();
    for spec in &specs {
        if !ids.insert(spec.video_id.as_str()) {
            return Err(Failure::usage(
                stage,
                format!("two inputs map to video id `{}`", spec.video_id),
            ));
        }
    }
    Ok(specs)
}

pub fn resolve_generator(
    kind: Option<&str>,
    command: Option<Vec<String>>,
    url: Option<String>,
    tuning: (Option<u64>, Option<u32>, Option<usize>),
) -> CliResult<GeneratorSpec> {
    let kind = match kind {
        Some(k) => k.to_string(),
        None if command.is_some() => "command".into(),
        None if url.is_some() => "http".into(),
        None => "retrieval".into(),
    };
    let mut config = match kind.as_str() {
        "retrieval" => return Ok(GeneratorSpec::Retrieval),
        "command" | "external" => {
            let command = command
                .filter(|c| !c.is_empty())
                .ok_or_else(|| Failure::usage(STAGE, "generator `command` needs --adapter-cmd"))?;
            ExternalConfig::command(command[0].clone(), command[1..].to_vec())
        }
        "http" => {
            let url =
                url.ok_or_else(|| Failure::usage(STAGE, "generator `http` needs --adapter-url"))?;
            if !is_url(&url) {
                return Err(Failure::usage(
                    STAGE,
                    format!("adapter url `{url}` is not http(s)"),
                ));
            }
            ExternalConfig::http(url)
        }
        other => {
            return Err(Failure::usage(
                STAGE,
                format!("unknown generator `{other}` (expected retrieval, command or http)"),
            ))
        }
    };
    let (timeout_ms, max_retries, workers) = tuning;
    if let Some(t) = timeout_ms {
        config.timeout_ms = t;
    }
    if let Some(r) = max_retries {
        config.max_retries = r;
    }
    if let Some(w) = workers {
        if w == 0 {
            return Err(Failure::usage(STAGE, "workers must be at least 1"));
        }
        config.workers = w;
    }
    Ok(GeneratorSpec::External(config))
}

pub fn split_command(command: &str) -> Vec<String> {
    command.split_whitespace().map(String::from).collect()
}

/// Merges file and flags, then validates. Paths are checked before anything runs.
pub fn resolve(file: FileConfig, flags: Overrides) -> CliResult<RunConfig> {
    let inputs = if flags.inputs.is_empty() {
        file.inputs
    } else {
        flags.inputs
    };
    let format = flags.format.or(file.format);
    let inputs = resolve_inputs(&inputs, format.as_deref(), STAGE)?;
    let strategy_spec = flags
        .strategy
        .or(file.strategy)
        .unwrap_or_else(|| "duo".to_string());
    let remainder = flags.remainder.or(file.remainder);
    let strategy = parse_strategy(&strategy_spec, remainder.as_deref())?;
    let split = parse_split(
        flags.train_fraction.or(file.train_fraction).as_deref(),
        flags.seed.or(file.seed),
    )?;
    let g = file.generator;
    // an adapter flag implies its generator kind over the file's
    let kind = flags
        .generator
        .clone()
        .or_else(|| flags.adapter_cmd.as_ref().map(|_| "command".to_string()))
        .or_else(|| flags.adapter_url.as_ref().map(|_| "http".to_string()))
        .or(g.kind);
    let command = flags
        .adapter_cmd
        .as_deref()
        .map(split_command)
        .or(g.command);
    let generator = resolve_generator(
        kind.as_deref(),
        command,
        flags.adapter_url.or(g.url),
        (
            flags.timeout_ms.or(g.timeout_ms),
            flags.max_retries.or(g.max_retries),
            flags.workers.or(g.workers),
        ),
    )?;
    let out = flags
        .out
        .or(file.out)
        .ok_or_else(|| Failure::usage(STAGE, "no output directory (--out)"))?;
    Ok(RunConfig {
        inputs,
        strategy,
        split,
        generator,
        out,
        label: flags.label.or(file.label),
    })
}

impl std::fmt::Display for InputSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.display(), self.format)
    }
}
