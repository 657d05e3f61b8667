//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 provider or transport error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::harness::{
    bench, read_decode_outputs, render_table, run_decode_eval, run_eval, sweep_masks, sweep_steps,
    BenchConfig, Dataset, EvalConfig, HarnessError, MetricsReport,
};
use crate::pool::{attach_masks, build_pool, load_pool, save_pool, PoolFileError};
use crate::provider::{read_frame, FileProvider, FrameRequest, HttpProvider, LogitProvider, ProviderError, StubProvider};
use crate::scoring::{score_pool, top_k, ScoreError};
use crate::tokenizer::{ReferenceTokenizer, TokenizerAdapter, TokenizerError, VocabTokenizer};
use crate::types::{LogitFrame, Method, MethodError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_PROVIDER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lgsel", version, about = "Decoding-free candidate selection from language-model logits")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or mask tokenized candidate pools.
    #[command(subcommand)]
    Pool(PoolCommand),
    /// Score one frame against a pool and print the top candidates.
    Score(ScoreArgs),
    /// Evaluate an estimation method over a dataset.
    Eval(EvalArgs),
    /// Evaluate full-decoding outputs through answer extraction.
    EvalDecode(EvalDecodeArgs),
    /// Evaluate the same dataset at several output steps.
    SweepSteps(SweepStepsArgs),
    /// Evaluate with several keyword-mask files plus the unmasked baseline.
    SweepMasks(SweepMasksArgs),
    /// Time single-frame estimation against a simulated decode lap.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
enum PoolCommand {
    /// Tokenize a candidate file into a pool file.
    Build(PoolBuildArgs),
    /// Attach keyword masks to a pool file.
    Mask(PoolMaskArgs),
}

#[derive(Debug, Args)]
struct TokenizerArgs {
    /// Tokenizer definition file; the built-in reference tokenizer when absent.
    #[arg(long)]
    tokenizer: Option<PathBuf>,
    /// Vocabulary size of the reference tokenizer.
    #[arg(long, default_value_t = ReferenceTokenizer::DEFAULT_VOCAB)]
    tokenizer_vocab: usize,
    /// Encode candidate texts without a leading space.
    #[arg(long)]
    no_prepend_space: bool,
}

#[derive(Debug, Args)]
struct PoolBuildArgs {
    /// Candidate file: one `{"id","text","mask"?}` object per line.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Debug, Args)]
struct PoolMaskArgs {
    #[arg(long)]
    pool: PathBuf,
    /// Mask file: one `{"id","positions"}` object per line.
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodName {
    First,
    Last,
    Kth,
    Average,
    Sum,
    SampleAverage,
}

impl MethodName {
    fn as_str(self) -> &'static str {
        match self {
            MethodName::First => "first",
            MethodName::Last => "last",
            MethodName::Kth => "kth",
            MethodName::Average => "average",
            MethodName::Sum => "sum",
            MethodName::SampleAverage => "sample-average",
        }
    }
}

#[derive(Debug, Args)]
struct MethodArgs {
    #[arg(long, value_enum)]
    method: MethodName,
    /// Token index for `--method kth` (1-based).
    #[arg(long)]
    kth: Option<usize>,
    /// Score with the keyword masks stored in the pool.
    #[arg(long)]
    use_mask: bool,
}

impl MethodArgs {
    fn method(&self) -> Result<Method, CliError> {
        if self.kth.is_some() && self.method != MethodName::Kth {
            return Err(CliError::usage("--kth is only valid with --method kth"));
        }
        Method::from_name(self.method.as_str(), self.kth).map_err(|e| match e {
            MethodError::MissingK => CliError::usage("--method kth requires --kth N"),
            other => CliError::usage(other.to_string()),
        })
    }
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    pool: PathBuf,
    /// LGTS or readable JSON frame.
    #[arg(long)]
    frame: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 1)]
    top_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Stub,
    Http,
    File,
}

#[derive(Debug, Args)]
struct ProviderArgs {
    /// Frame source for prompt-based instances.
    #[arg(long, value_enum)]
    provider: Option<ProviderKind>,
    /// Seed for the stub provider.
    #[arg(long)]
    seed: Option<u64>,
    /// Vocabulary size of stub frames; defaults to the tokenizer's.
    #[arg(long)]
    vocab_size: Option<usize>,
    /// Inference server base URL (overrides LGSEL_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// Bound on concurrent HTTP requests.
    #[arg(long, default_value_t = 8)]
    max_in_flight: usize,
    /// Directory of `<id>.lgts` frames for the file provider.
    #[arg(long)]
    frames_dir: Option<PathBuf>,
}

struct Unconfigured;

impl LogitProvider for Unconfigured {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError> {
        Err(ProviderError::NoSource(
            request.prompt_id.clone().unwrap_or_else(|| request.prompt.clone()),
        ))
    }

    fn describe(&self) -> String {
        "none".into()
    }
}

impl ProviderArgs {
    fn build(&self, default_vocab: usize) -> Result<Box<dyn LogitProvider>, CliError> {
        let kind = self.provider;
        if self.seed.is_some() && kind != Some(ProviderKind::Stub) {
            return Err(CliError::usage("--seed only applies to --provider stub"));
        }
        if self.vocab_size.is_some() && kind != Some(ProviderKind::Stub) {
            return Err(CliError::usage("--vocab-size only applies to --provider stub"));
        }
        if self.endpoint.is_some() && kind != Some(ProviderKind::Http) {
            return Err(CliError::usage("--endpoint only applies to --provider http"));
        }
        if self.frames_dir.is_some() && kind != Some(ProviderKind::File) {
            return Err(CliError::usage("--frames-dir only applies to --provider file"));
        }
        Ok(match kind {
            None => Box::new(Unconfigured),
            Some(ProviderKind::Stub) => {
                let seed = self
                    .seed
                    .ok_or_else(|| CliError::usage("--provider stub requires --seed"))?;
                let vocab = self.vocab_size.unwrap_or(default_vocab);
                if vocab == 0 {
                    return Err(CliError::usage("--vocab-size must be positive"));
                }
                Box::new(StubProvider::new(vocab, seed))
            }
            Some(ProviderKind::Http) => {
                Box::new(HttpProvider::from_env_or(self.endpoint.as_deref(), self.max_in_flight)?)
            }
            Some(ProviderKind::File) => {
                let dir = self
                    .frames_dir
                    .clone()
                    .ok_or_else(|| CliError::usage("--provider file requires --frames-dir"))?;
                Box::new(FileProvider::new(dir))
            }
        })
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Ranking cutoff; 1 for single-gold datasets and 20 otherwise by default.
    #[arg(long)]
    top_k: Option<usize>,
    /// Ask sources for chat-templated prompts.
    #[arg(long)]
    template: bool,
    /// Concurrent instances; defaults to the number of processors.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
    /// Write the report(s) as JSON to this path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include wall-clock timing in the report file (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Output step to request frames at.
    #[arg(long, default_value_t = 0)]
    step: u32,
}

#[derive(Debug, Args)]
struct SweepStepsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated output steps.
    #[arg(long, value_delimiter = ',', required = true)]
    steps: Vec<u32>,
}

#[derive(Debug, Args)]
struct SweepMasksArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Output step to request frames at.
    #[arg(long, default_value_t = 0)]
    step: u32,
    /// Mask file; repeat for several configurations.
    #[arg(long = "mask-file", required = true)]
    mask_files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalDecodeArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Decode outputs: one `{"id","output","gen_seconds"?}` per line.
    #[arg(long)]
    outputs: PathBuf,
    /// Comma-separated head labels; A, B, C, ... by default.
    #[arg(long, value_delimiter = ',')]
    heads: Option<Vec<String>>,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    pool: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Comma-separated methods (`kth@K` for the k-th token).
    #[arg(long, value_delimiter = ',', default_value = "first,last,average,sum,sample-average")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Frames acquired sequentially in the simulated decode lap.
    #[arg(long, default_value_t = 50)]
    decode_length: usize,
    #[arg(long)]
    use_mask: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Diagnostic plus exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        let code = if e.is_transport() { EXIT_PROVIDER } else { EXIT_DATA };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let code = if e.is_transport() { EXIT_PROVIDER } else { EXIT_DATA };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<PoolFileError> for CliError {
    fn from(e: PoolFileError) -> Self {
        Self::data(e)
    }
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        Self::data(e)
    }
}

impl From<TokenizerError> for CliError {
    fn from(e: TokenizerError) -> Self {
        Self::data(e)
    }
}

impl TokenizerArgs {
    fn adapter(&self) -> Result<Box<dyn TokenizerAdapter>, CliError> {
        match &self.tokenizer {
            Some(path) => Ok(Box::new(VocabTokenizer::from_file(path)?)),
            None => {
                if self.tokenizer_vocab <= 256 {
                    return Err(CliError::usage("--tokenizer-vocab must exceed 256"));
                }
                Ok(Box::new(ReferenceTokenizer::new(self.tokenizer_vocab)))
            }
        }
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::data)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn finish_reports(
    reports: Vec<MetricsReport>,
    single: bool,
    report_path: Option<&Path>,
    timing: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let _ = write!(out, "{}", render_table(&reports));
    if let Some(path) = report_path {
        let stored: Vec<MetricsReport> = if timing {
            reports
        } else {
            reports.into_iter().map(MetricsReport::without_timing).collect()
        };
        if single {
            write_json(path, &stored[0])?;
        } else {
            write_json(path, &stored)?;
        }
    }
    Ok(())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

struct Prepared {
    dataset: Dataset,
    provider: Box<dyn LogitProvider>,
    config: EvalConfig,
}

fn prepare(run: &RunArgs, step: u32) -> Result<Prepared, CliError> {
    let method = run.method.method()?;
    if run.top_k == Some(0) {
        return Err(CliError::usage("--top-k must be at least 1"));
    }
    if run.workers == Some(0) {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    let adapter = run.tokenizer.adapter()?;
    let provider = run.provider.build(adapter.vocab_size())?;
    let dataset = Dataset::load(&run.dataset, adapter.as_ref(), !run.tokenizer.no_prepend_space)?;
    let config = EvalConfig {
        method,
        k: run.top_k,
        use_mask: run.method.use_mask,
        step,
        template: run.template,
        workers: run.workers.unwrap_or_else(default_workers),
        mask_label: None,
    };
    Ok(Prepared {
        dataset,
        provider,
        config,
    })
}

fn collect_sweep(results: Vec<Result<MetricsReport, HarnessError>>, err: &mut dyn Write) -> Result<Vec<MetricsReport>, CliError> {
    let mut reports = Vec::new();
    let mut first_error = None;
    for result in results {
        match result {
            Ok(r) => reports.push(r),
            Err(e) => {
                let _ = writeln!(err, "lgsel: {e}");
                first_error.get_or_insert(CliError::from(e));
            }
        }
    }
    match first_error {
        Some(e) if reports.is_empty() => Err(e),
        _ => Ok(reports),
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Pool(PoolCommand::Build(args)) => {
            let adapter = args.tokenizer.adapter()?;
            let (pool, warnings) = build_pool(&args.candidates, adapter.as_ref(), !args.tokenizer.no_prepend_space)?;
            for w in warnings {
                let _ = writeln!(err, "lgsel: warning: {w}");
            }
            save_pool(&pool, &args.out)?;
            let _ = writeln!(out, "wrote {} candidates to {}", pool.len(), args.out.display());
        }
        Command::Pool(PoolCommand::Mask(args)) => {
            let pool = load_pool(&args.pool)?;
            let masked = attach_masks(&pool, &args.masks)?;
            save_pool(&masked, &args.out)?;
            let n = masked.candidates().iter().filter(|c| c.mask.is_some()).count();
            let _ = writeln!(out, "{n} of {} candidates masked; wrote {}", masked.len(), args.out.display());
        }
        Command::Score(args) => {
            let method = args.method.method()?;
            if args.top_k == 0 {
                return Err(CliError::usage("--top-k must be at least 1"));
            }
            let pool = load_pool(&args.pool)?;
            let frame = read_frame(&args.frame)?;
            let scores = score_pool(&frame, &pool, method, args.method.use_mask)?;
            let ranking = top_k(&scores, &pool, args.top_k)?;
            for (rank, entry) in ranking.entries.iter().enumerate() {
                let _ = writeln!(out, "{}\t{}\t{:.6}", rank + 1, entry.id, entry.probability);
            }
        }
        Command::Eval(args) => {
            let p = prepare(&args.run, args.step)?;
            let report = run_eval(&p.dataset, p.provider.as_ref(), &p.config)?;
            finish_reports(vec![report], true, args.run.report.as_deref(), args.run.timing, out)?;
        }
        Command::SweepSteps(args) => {
            let p = prepare(&args.run, 0)?;
            let results = sweep_steps(&p.dataset, p.provider.as_ref(), &p.config, &args.steps);
            let reports = collect_sweep(results, err)?;
            finish_reports(reports, false, args.run.report.as_deref(), args.run.timing, out)?;
        }
        Command::SweepMasks(args) => {
            let p = prepare(&args.run, args.step)?;
            let files: Vec<&Path> = args.mask_files.iter().map(PathBuf::as_path).collect();
            let results = sweep_masks(&p.dataset, p.provider.as_ref(), &p.config, &files);
            let reports = collect_sweep(results, err)?;
            finish_reports(reports, false, args.run.report.as_deref(), args.run.timing, out)?;
        }
        Command::EvalDecode(args) => {
            let adapter = args.tokenizer.adapter()?;
            let dataset = Dataset::load(&args.dataset, adapter.as_ref(), !args.tokenizer.no_prepend_space)?;
            let outputs = read_decode_outputs(&args.outputs)?;
            let report = run_decode_eval(&dataset, &outputs, args.heads.as_deref())?;
            finish_reports(vec![report], true, args.report.as_deref(), args.timing, out)?;
        }
        Command::Bench(args) => {
            let methods = args
                .methods
                .iter()
                .map(|m| m.parse::<Method>().map_err(|e| CliError::usage(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let pool = load_pool(&args.pool)?;
            let default_vocab = pool.max_token() as usize + 1;
            let provider = args.provider.build(default_vocab.max(ReferenceTokenizer::DEFAULT_VOCAB))?;
            let config = BenchConfig {
                trials: args.trials,
                decode_length: args.decode_length,
                use_mask: args.use_mask,
                ..BenchConfig::default()
            };
            let report = bench(provider.as_ref(), &pool, &methods, &config)?;
            let _ = writeln!(
                out,
                "pool {}  trials {}  acquire {:.6}s  decode lap (L={}) {:.6}s",
                report.pool_size, report.trials, report.acquire.mean_seconds, report.decode_length, report.decode_lap.mean_seconds
            );
            for m in &report.methods {
                let _ = writeln!(
                    out,
                    "{:<16} scoring {:.6}s ± {:.6}  estimate {:.6}s  speedup {:.1}x",
                    m.method, m.scoring.mean_seconds, m.scoring.std_seconds, m.estimate_seconds, m.speedup
                );
            }
            if let Some(path) = &args.report {
                write_json(path, &report)?;
            }
        }
    }
    Ok(())
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "lgsel: {}", e.message);
            e.code
        }
    }
}
