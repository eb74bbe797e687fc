use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use sfcgen_core::datagen::{
    fim_examples, ntp_sequence, write_records, BagOfWords, Embedder, MaskParams, TrainingRecord,
};
use sfcgen_core::diag::line_col;
use sfcgen_core::plcopen::{emit_plcopen, normalize, parse_plcopen, MetadataTemplate, DEFAULT_TEMPLATE};
use sfcgen_core::reduced::{grammar, parse_reduced, serialize_reduced, REDUCED_SCHEMA};
use sfcgen_core::safety::{classify_failure, emit_smv, verify, VerifyLimits};
use sfcgen_core::st::check_chart;
use sfcgen_core::synth::describe;
use sfcgen_core::{validate_reduced, ReducedSfc, RetrievalIndex};
use sfcgen_pipeline::client::{HttpChatClient, HttpEmbedder};
use sfcgen_pipeline::config::ConfigFile;
use sfcgen_pipeline::generate::{generate_all, Prompt, REQUEST_TIMEOUT};
use sfcgen_pipeline::metrics::{score, Definition};
use sfcgen_pipeline::records::{read_records, RecordWriter};

#[derive(Parser)]
#[command(name = "sfcgen", version, about = "Sequential function chart toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between the reduced form (.red/.json) and PLCopen XML (.xml).
    Convert {
        input: PathBuf,
        /// Write PLCopen XML (default for non-.xml inputs).
        #[arg(long, conflicts_with = "to_reduced")]
        to_plcopen: bool,
        /// Write the reduced form (default for .xml inputs).
        #[arg(long)]
        to_reduced: bool,
        /// Output file; `-` for stdout. Defaults to the input with the other extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// PLCopen project supplying headers and vendor data.
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Check charts against the model rules and the ST subset.
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Verify a chart under guard-free token semantics.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        /// Print the report as one JSON line.
        #[arg(long)]
        json: bool,
        /// Also write the SMV model to this file.
        #[arg(long)]
        smv: Option<PathBuf>,
    },
    /// Print the grammar of the canonical reduced form.
    Grammar {
        /// Print the JSON schema instead.
        #[arg(long)]
        schema: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write fill-in-the-middle (and optionally next-token) training records.
    Mask {
        #[arg(required = true)]
        charts: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Masked examples per chart.
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        min_steps: usize,
        #[arg(long, default_value_t = 3)]
        max_steps: usize,
        /// Also write one next-token record per chart.
        #[arg(long)]
        ntp: bool,
    },
    /// Build a retrieval index over chart summaries.
    ///
    /// The summary of `x.red` is read from `x.txt` when present and
    /// generated from the step names otherwise.
    Index {
        #[arg(required = true)]
        charts: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Buckets of the built-in hashed bag-of-words embedder.
        #[arg(long, default_value_t = 1024)]
        dimension: usize,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Show the charts closest to a query.
    Retrieve {
        index: PathBuf,
        query: String,
        #[arg(short, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Generate charts for a prompt file and record per-sample verdicts.
    Generate(Box<GenerateArgs>),
    /// Compute Pass@k and Safe@k over a record file.
    Score {
        records: PathBuf,
        #[arg(short, long)]
        k: usize,
        /// Fraction of prompts with at least one hit among k, instead of
        /// the fraction of samples.
        #[arg(long)]
        any: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct LimitArgs {
    /// Distinct markings before giving up.
    #[arg(long, default_value_t = 1_000_000)]
    max_states: usize,
    /// Seconds before giving up.
    #[arg(long, default_value_t = 60)]
    max_time: u64,
}

#[derive(Args)]
struct EmbedArgs {
    /// Embeddings endpoint; the built-in embedder is used when absent.
    #[arg(long, env = "SFCGEN_EMBED_URL")]
    embed_url: Option<String>,
    #[arg(long, env = "SFCGEN_EMBED_MODEL")]
    embed_model: Option<String>,
    #[arg(long, env = "SFCGEN_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Prompt file, one `{"id": ..., "prompt": ...}` object per line.
    #[arg(long)]
    prompts: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Retrieval index for few-shot examples.
    #[arg(long)]
    index: Option<PathBuf>,
    /// TOML file with defaults for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chat-completions URL.
    #[arg(long, env = "SFCGEN_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long, env = "SFCGEN_MODEL")]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Samples per prompt.
    #[arg(short = 'k', long)]
    samples: Option<usize>,
    #[arg(long)]
    few_shot: Option<usize>,
    /// Attach the reduced-form schema and screen answers with the recognizer.
    #[arg(long)]
    constrained: bool,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    max_time: Option<u64>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    embed: EmbedArgs,
}

/// Exit 1 for inputs that fail checks, 2 for usage and I/O problems.
enum Failure {
    Invalid(String),
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn is_xml(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml"))
}

fn at(path: &Path, source: &str, offset: usize) -> String {
    let (line, col) = line_col(source, offset);
    format!("{}:{line}:{col}", path.display())
}

/// Reads a chart in either format; XML import warnings go to stderr.
fn read_chart(path: &Path) -> Result<ReducedSfc, Failure> {
    let text = read(path)?;
    if is_xml(path) {
        let (sfc, warnings) = parse_plcopen(&text).map_err(|e| {
            let pos = match &e {
                sfcgen_core::plcopen::PlcopenError::Xml(x) => at(path, &text, x.position),
                _ => path.display().to_string(),
            };
            Failure::Invalid(format!("{pos}: {e}"))
        })?;
        for w in warnings {
            eprintln!("{}: warning: {}: {}", path.display(), w.element, w.message);
        }
        Ok(sfc)
    } else {
        parse_reduced(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", at(path, &text, e.position()))))
    }
}

fn write_out(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn limits(max_states: usize, max_time: u64) -> Result<VerifyLimits, Failure> {
    VerifyLimits::new(max_states, Duration::from_secs(max_time)).map_err(|e| Failure::Usage(format!("--max-states/--max-time: {e}")))
}

fn embedder_for(id: &str, args: &EmbedArgs) -> Result<Box<dyn Embedder<f32> + Sync>, Failure> {
    if let Some(dim) = id.strip_prefix("bow-fnv-") {
        let dimension = dim.parse().map_err(|_| Failure::Usage(format!("unknown embedder {id}")))?;
        return Ok(Box::new(BagOfWords { dimension }));
    }
    if let Some(model) = id.strip_prefix("http:") {
        let url = args
            .embed_url
            .clone()
            .ok_or_else(|| Failure::Usage(format!("index uses embedder {id}; pass --embed-url")))?;
        return Ok(Box::new(HttpEmbedder::new(url, model, args.api_key.clone(), REQUEST_TIMEOUT)));
    }
    Err(Failure::Usage(format!("unknown embedder {id}")))
}

fn load_index(path: &Path) -> Result<RetrievalIndex, Failure> {
    RetrievalIndex::load(path).map_err(|e| io_err(path, e))
}

fn convert(input: &Path, to_plcopen: bool, to_reduced: bool, output: Option<PathBuf>, template: Option<PathBuf>) -> Outcome {
    let sfc = read_chart(input)?;
    let xml_out = to_plcopen || (!to_reduced && !is_xml(input));
    let text = if xml_out {
        let tpl_text = match &template {
            Some(p) => read(p)?,
            None => DEFAULT_TEMPLATE.to_string(),
        };
        let tpl = MetadataTemplate::from_xml(&tpl_text).map_err(|e| Failure::Usage(format!("template: {e}")))?;
        emit_plcopen(&sfc, &tpl).map_err(|e| Failure::Invalid(format!("{}: {e}", input.display())))?
    } else {
        serialize_reduced(&sfc).map_err(|e| Failure::Invalid(format!("{}: {e}", input.display())))?
    };
    let output = output.unwrap_or_else(|| input.with_extension(if xml_out { "xml" } else { "red" }));
    if output == input {
        return Err(Failure::Usage(format!("--output: refusing to overwrite {}", input.display())));
    }
    write_out(Some(&output), &text)
}

fn validate(inputs: &[PathBuf]) -> Outcome {
    let mut failed = 0;
    for path in inputs {
        let sfc = match read_chart(path) {
            Ok(s) => s,
            Err(Failure::Invalid(msg)) => {
                eprintln!("{msg}");
                failed += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut diags = validate_reduced(&sfc, true);
        diags.extend(check_chart(&sfc));
        if let Err(e) = normalize(&sfc) {
            if !sfcgen_core::diag::has_errors(&diags) {
                diags.push(sfcgen_core::Diagnostic::error(
                    sfcgen_core::DiagCode::Connectivity,
                    sfc.pou_name.clone(),
                    e.to_string(),
                ));
            }
        }
        for d in &diags {
            let kind = if d.is_error() { "error" } else { "warning" };
            println!("{}: {kind}: {}: {} ({})", path.display(), d.code, d.message, d.element);
        }
        if sfcgen_core::diag::has_errors(&diags) {
            failed += 1;
        } else {
            println!("{}: ok", path.display());
        }
    }
    if failed > 0 {
        Err(Failure::Invalid(format!("{failed} of {} charts failed validation", inputs.len())))
    } else {
        Ok(())
    }
}

fn verify_cmd(input: &Path, lim: &LimitArgs, json: bool, smv: Option<PathBuf>) -> Outcome {
    let sfc = read_chart(input)?;
    let limits = limits(lim.max_states, lim.max_time)?;
    if let Some(p) = smv {
        let g = normalize(&sfc).map_err(|e| Failure::Invalid(format!("{}: {e}", input.display())))?;
        write_out(Some(&p), &emit_smv(&g))?;
    }
    let report = verify(&sfc, &limits);
    if json {
        println!("{}", report.to_json_line());
    } else {
        println!("{}: {:?}", input.display(), report.verdict);
        if let Ok(class) = classify_failure(&report) {
            println!("class: {class}");
        }
        for v in &report.violations {
            println!("violation: {:?} {}", v.kind, v.element);
        }
        for d in &report.diagnostics {
            println!("diagnostic: {d}");
        }
        println!("explored states: {}", report.explored_states);
    }
    if report.is_safe() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{}: not verified safe", input.display())))
    }
}

fn summary_for(path: &Path, sfc: &ReducedSfc) -> Result<String, Failure> {
    let side = path.with_extension("txt");
    if side.is_file() && side != path {
        Ok(read(&side)?.trim().to_string())
    } else {
        Ok(describe(sfc))
    }
}

fn chart_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn mask(charts: &[PathBuf], output: &Path, count: usize, seed: u64, params: MaskParams, ntp: bool) -> Outcome {
    let mut records: Vec<TrainingRecord> = Vec::new();
    for (i, path) in charts.iter().enumerate() {
        let sfc = read_chart(path)?;
        if ntp {
            let prompt = summary_for(path, &sfc)?;
            records.push(ntp_sequence(&sfc, &prompt).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?);
        }
        let examples = fim_examples(&sfc, seed.wrapping_add((i as u64) << 20), count, params)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        records.extend(examples.into_iter().map(TrainingRecord::from));
    }
    let n = write_records(create(output)?, &records).map_err(|e| io_err(output, e))?;
    eprintln!("wrote {n} records to {}", output.display());
    Ok(())
}

fn index(charts: &[PathBuf], output: &Path, dimension: usize, embed: &EmbedArgs) -> Outcome {
    if dimension == 0 {
        return Err(Failure::Usage("--dimension must be positive".into()));
    }
    let embedder: Box<dyn Embedder<f32> + Sync> = match (&embed.embed_url, &embed.embed_model) {
        (Some(url), Some(model)) => Box::new(HttpEmbedder::new(url, model, embed.api_key.clone(), REQUEST_TIMEOUT)),
        (Some(_), None) => return Err(Failure::Usage("--embed-url needs --embed-model".into())),
        _ => Box::new(BagOfWords { dimension }),
    };
    let mut items = Vec::new();
    for path in charts {
        let sfc = read_chart(path)?;
        let doc = serialize_reduced(&sfc).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        items.push((chart_id(path), doc, summary_for(path, &sfc)?));
    }
    let (idx, warnings) = RetrievalIndex::build(items, embedder.as_ref());
    for w in &warnings {
        eprintln!("warning: {}: {}", w.chart_id, w.message);
    }
    idx.save(output).map_err(|e| io_err(output, e))?;
    eprintln!("indexed {} charts into {}", idx.len(), output.display());
    Ok(())
}

fn retrieve(path: &Path, query: &str, k: usize, json: bool, embed: &EmbedArgs) -> Outcome {
    let idx = load_index(path)?;
    let embedder = embedder_for(&idx.embedder, embed)?;
    let hits = idx
        .retrieve(query, k, embedder.as_ref())
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    for h in hits {
        if json {
            let v = serde_json::json!({ "chart_id": h.item.chart_id, "score": h.score, "summary": h.item.summary });
            println!("{v}");
        } else {
            println!("{:.4}  {}  {}", h.score, h.item.chart_id, h.item.summary);
        }
    }
    Ok(())
}

fn read_prompts(path: &Path) -> Result<Vec<Prompt>, Failure> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(line)
                .map_err(|e| Failure::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn generate(a: GenerateArgs) -> Outcome {
    let file = match &a.config {
        Some(p) => ConfigFile::load(p).map_err(|e| Failure::Usage(e.to_string()))?,
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        endpoint: a.endpoint.clone(),
        model: a.model.clone(),
        temperature: a.temperature,
        samples: a.samples,
        few_shot: a.few_shot,
        constrained: a.constrained.then_some(true),
        max_retries: a.max_retries,
        max_states: a.max_states,
        max_time_secs: a.max_time,
        parallelism: a.parallelism,
        seed: a.seed,
    };
    let cfg = file.overlay(flags).resolve().map_err(|e| Failure::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let prompts = read_prompts(&a.prompts)?;
    let idx = match &a.index {
        Some(p) => Some(load_index(p)?),
        None => None,
    };
    let embedder = match &idx {
        Some(i) => Some(embedder_for(&i.embedder, &a.embed)?),
        None => None,
    };
    let pair = idx.as_ref().zip(embedder.as_deref());
    let api_key = a.embed.api_key.clone();
    let client = HttpChatClient::new(cfg.endpoint.clone(), api_key, REQUEST_TIMEOUT);
    let writer = RecordWriter::new(create(&a.output)?);
    let write_failed = std::sync::atomic::AtomicBool::new(false);
    let sink = |r: &sfcgen_pipeline::records::SampleRecord| {
        if writer.append(r).is_err() {
            write_failed.store(true, std::sync::atomic::Ordering::Relaxed);
        }
    };
    let records = generate_all(&prompts, pair, &cfg, &client, &sink).map_err(|e| Failure::Usage(e.to_string()))?;
    if write_failed.into_inner() {
        return Err(io_err(&a.output, "write failed"));
    }
    eprintln!("wrote {} records to {}", records.len(), a.output.display());
    if let Ok(s) = score(&records, cfg.samples, Definition::PerSample) {
        println!("{s}");
    }
    Ok(())
}

fn score_cmd(path: &Path, k: usize, any: bool, json: bool) -> Outcome {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let records = read_records(BufReader::new(file)).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let def = if any { Definition::AnyOfK } else { Definition::PerSample };
    let s = score(&records, k, def).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    if json {
        println!("{}", serde_json::to_string(&s).expect("plain data"));
    } else {
        println!("{s}");
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Convert {
            input,
            to_plcopen,
            to_reduced,
            output,
            template,
        } => convert(&input, to_plcopen, to_reduced, output, template),
        Command::Validate { inputs } => validate(&inputs),
        Command::Verify { input, limits, json, smv } => verify_cmd(&input, &limits, json, smv),
        Command::Grammar { schema, output } => {
            let text = if schema { REDUCED_SCHEMA.to_string() } else { grammar().to_string() };
            write_out(output.as_deref(), &text)
        }
        Command::Mask {
            charts,
            output,
            count,
            seed,
            min_steps,
            max_steps,
            ntp,
        } => mask(&charts, &output, count, seed, MaskParams { min_steps, max_steps }, ntp),
        Command::Index {
            charts,
            output,
            dimension,
            embed,
        } => index(&charts, &output, dimension, &embed),
        Command::Retrieve {
            index,
            query,
            k,
            json,
            embed,
        } => retrieve(&index, &query, k, json, &embed),
        Command::Generate(args) => generate(*args),
        Command::Score { records, k, any, json } => score_cmd(&records, k, any, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli);
    let _ = io::stdout().flush();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
