//! Evaluation harness: run estimation methods over datasets and report
//! accuracy, recall@k and per-instance timing; compare with a
//! full-decoding baseline; benchmark scoring cost.

mod bench;
mod dataset;
pub mod metrics;
mod report;

pub use bench::{bench, BenchConfig, BenchReport, MethodTiming, TimingStat};
pub use dataset::{Dataset, EvalInstance, FrameSource};
pub use report::{render_table, MetricsReport, ReportConfig, Timing};

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::decode_map::{extract_choice, DecodeError, HeadScheme};
use crate::pool::{read_mask_file, PoolFileError};
use crate::provider::{read_frame, FrameRequest, LogitProvider, ProviderError};
use crate::scoring::{score_pool, top_k, ScoreError};
use crate::types::Method;

/// Share of instances allowed to fail before a run is aborted.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
    #[error("dataset has no instances")]
    NoInstances,
    #[error(transparent)]
    Pool(#[from] PoolFileError),
    #[error("outputs line {line}: {message}")]
    Outputs { line: usize, message: String },
    #[error("no decoded output for instance `{0}`")]
    MissingOutput(String),
    #[error("duplicate decoded output for instance `{0}`")]
    DuplicateOutput(String),
    #[error("decoded output for unknown instance `{0}`")]
    UnknownOutput(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("{failed} of {total} instances failed (limit {:.0}%); first failure: {first}", MAX_FAILURE_RATE * 100.0)]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: InstanceFailure,
    },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("bench needs at least 3 trials, got {0}")]
    TooFewTrials(usize),
    #[error("worker pool: {0}")]
    Workers(String),
}

impl HarnessError {
    /// True when the failure came from a frame source's transport rather
    /// than from the data.
    pub fn is_transport(&self) -> bool {
        match self {
            HarnessError::Provider(e) => e.is_transport(),
            HarnessError::TooManyFailures { first, .. } => first.transport,
            _ => false,
        }
    }
}

/// One instance that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFailure {
    pub id: String,
    pub message: String,
    pub transport: bool,
}

impl std::fmt::Display for InstanceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "instance `{}`: {}", self.id, self.message)
    }
}

/// Settings for one evaluation run.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub method: Method,
    /// Ranking cutoff; `None` picks 1 for single-gold datasets, 20 otherwise.
    pub k: Option<usize>,
    pub use_mask: bool,
    pub step: u32,
    pub template: bool,
    /// Concurrent instances; 1 evaluates sequentially.
    pub workers: usize,
    /// Label of the mask configuration, echoed in the report.
    pub mask_label: Option<String>,
}

impl EvalConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k: None,
            use_mask: false,
            step: 0,
            template: false,
            workers: 1,
            mask_label: None,
        }
    }
}

struct InstanceOutcome {
    score: f64,
    acquire: f64,
    scoring: f64,
}

fn instance_failure(id: &str, err: impl std::fmt::Display, transport: bool) -> InstanceFailure {
    InstanceFailure {
        id: id.to_string(),
        message: err.to_string(),
        transport,
    }
}

fn eval_instance(
    inst: &EvalInstance,
    provider: &dyn LogitProvider,
    config: &EvalConfig,
    k: usize,
    accuracy: bool,
) -> Result<InstanceOutcome, InstanceFailure> {
    let provider_err = |e: ProviderError| {
        let transport = e.is_transport();
        instance_failure(&inst.id, e, transport)
    };
    let started = Instant::now();
    let frame = match &inst.source {
        FrameSource::Prompt(prompt) => {
            let request = FrameRequest::new(prompt.clone())
                .with_id(inst.id.clone())
                .at_step(config.step)
                .with_template(config.template);
            provider.get_frame(&request).map_err(provider_err)?
        }
        FrameSource::File(path) => {
            let frame = read_frame(path).map_err(provider_err)?;
            if frame.step() != config.step {
                return Err(provider_err(ProviderError::StepMismatch {
                    requested: config.step,
                    returned: frame.step(),
                }));
            }
            frame
        }
    };
    let acquired = Instant::now();
    let scores = score_pool(&frame, &inst.pool, config.method, config.use_mask)
        .map_err(|e| instance_failure(&inst.id, e, false))?;
    let ranking = top_k(&scores, &inst.pool, k).map_err(|e| instance_failure(&inst.id, e, false))?;
    let done = Instant::now();
    let score = if accuracy {
        metrics::top1_correct(&ranking, &inst.gold[0])
    } else {
        metrics::recall_at_k(&ranking, &inst.gold, k)
    };
    Ok(InstanceOutcome {
        score,
        acquire: (acquired - started).as_secs_f64(),
        scoring: (done - acquired).as_secs_f64(),
    })
}

fn run_parallel<T: Send, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>, HarnessError>
where
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Workers(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Scores every instance and aggregates accuracy (single-gold, k = 1) or
/// mean recall@k.
///
/// Failed instances are excluded and counted; the run aborts once more
/// than [`MAX_FAILURE_RATE`] of them fail. Aggregation happens in dataset
/// order, so reports do not depend on the worker count.
pub fn run_eval(
    dataset: &Dataset,
    provider: &dyn LogitProvider,
    config: &EvalConfig,
) -> Result<MetricsReport, HarnessError> {
    let k = config.k.unwrap_or_else(|| dataset.default_k()).max(1);
    let accuracy = k == 1 && dataset.all_single_gold();
    let outcomes = run_parallel(config.workers, dataset.len(), |i| {
        eval_instance(&dataset.instances[i], provider, config, k, accuracy)
    })?;

    let total = outcomes.len();
    let mut failures = Vec::new();
    let mut ok = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(o) => ok.push(o),
            Err(f) => failures.push(f),
        }
    }
    for f in &failures {
        log::warn!("excluded {f}");
    }
    if !failures.is_empty() && (failures.len() as f64 > MAX_FAILURE_RATE * total as f64 || ok.is_empty()) {
        return Err(HarnessError::TooManyFailures {
            failed: failures.len(),
            total,
            first: failures.swap_remove(0),
        });
    }
    let n = ok.len() as f64;
    let value = ok.iter().map(|o| o.score).sum::<f64>() / n;
    let acquire = ok.iter().map(|o| o.acquire).sum::<f64>() / n;
    let scoring = ok.iter().map(|o| o.scoring).sum::<f64>() / n;
    Ok(MetricsReport {
        method: config.method.to_string(),
        metric: if accuracy {
            "accuracy".into()
        } else {
            format!("recall@{k}")
        },
        value,
        instances: ok.len(),
        failed: failures.len(),
        config: ReportConfig {
            provider: provider.describe(),
            step: config.step,
            use_mask: config.use_mask,
            mask: config.mask_label.clone(),
            template: config.template,
            k,
        },
        timing: Some(Timing {
            mean_elapsed_seconds: acquire + scoring,
            mean_acquire_seconds: acquire,
            mean_scoring_seconds: scoring,
        }),
    })
}

/// One report per requested output step. A step the provider cannot serve
/// yields an error in its slot without stopping the other steps.
pub fn sweep_steps(
    dataset: &Dataset,
    provider: &dyn LogitProvider,
    config: &EvalConfig,
    steps: &[u32],
) -> Vec<Result<MetricsReport, HarnessError>> {
    steps
        .iter()
        .map(|&step| {
            let config = EvalConfig {
                step,
                ..config.clone()
            };
            run_eval(dataset, provider, &config)
        })
        .collect()
}

/// The unmasked baseline followed by one masked run per mask file.
pub fn sweep_masks(
    dataset: &Dataset,
    provider: &dyn LogitProvider,
    config: &EvalConfig,
    mask_files: &[&Path],
) -> Vec<Result<MetricsReport, HarnessError>> {
    let baseline = EvalConfig {
        use_mask: false,
        mask_label: None,
        ..config.clone()
    };
    let mut reports = vec![run_eval(dataset, provider, &baseline)];
    for path in mask_files {
        let run = || {
            let masks = read_mask_file(path)?;
            let masked = dataset.with_masks(&masks)?;
            let config = EvalConfig {
                use_mask: true,
                mask_label: Some(path.display().to_string()),
                ..config.clone()
            };
            run_eval(&masked, provider, &config)
        };
        reports.push(run());
    }
    reports
}

/// One line of a decode-outputs file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DecodeOutput {
    pub id: String,
    pub output: String,
    #[serde(default)]
    pub gen_seconds: Option<f64>,
}

pub fn read_decode_outputs(path: &Path) -> Result<Vec<DecodeOutput>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::Outputs {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Accuracy of the full-decoding baseline: each output is mapped to a
/// candidate with [`extract_choice`]. `heads` overrides the default
/// `A, B, C, ...` labels.
pub fn run_decode_eval(
    dataset: &Dataset,
    outputs: &[DecodeOutput],
    heads: Option<&[String]>,
) -> Result<MetricsReport, HarnessError> {
    let mut by_id: HashMap<&str, &DecodeOutput> = HashMap::with_capacity(outputs.len());
    for out in outputs {
        if by_id.insert(out.id.as_str(), out).is_some() {
            return Err(HarnessError::DuplicateOutput(out.id.clone()));
        }
    }
    if let Some(extra) = outputs
        .iter()
        .find(|o| !dataset.instances.iter().any(|i| i.id == o.id))
    {
        return Err(HarnessError::UnknownOutput(extra.id.clone()));
    }
    let mut correct = 0usize;
    let mut gen_seconds = Vec::new();
    for inst in &dataset.instances {
        let out = by_id
            .get(inst.id.as_str())
            .ok_or_else(|| HarnessError::MissingOutput(inst.id.clone()))?;
        let scheme = match heads {
            Some(h) => HeadScheme::new(h.iter().take(inst.pool.len()).cloned().collect())?,
            None => HeadScheme::alphabetic(inst.pool.len())?,
        };
        scheme.check(&inst.pool)?;
        let choice = extract_choice(&out.output, &inst.pool, &scheme);
        if choice.is_some_and(|c| inst.gold.iter().any(|g| g == c)) {
            correct += 1;
        }
        if let Some(s) = out.gen_seconds {
            gen_seconds.push(s);
        }
    }
    let n = dataset.len();
    let timing = (gen_seconds.len() == n).then(|| {
        let mean = gen_seconds.iter().sum::<f64>() / n as f64;
        Timing {
            mean_elapsed_seconds: mean,
            mean_acquire_seconds: mean,
            mean_scoring_seconds: 0.0,
        }
    });
    Ok(MetricsReport {
        method: "decode".into(),
        metric: "accuracy".into(),
        value: correct as f64 / n as f64,
        instances: n,
        failed: 0,
        config: ReportConfig {
            provider: "decode-outputs".into(),
            step: 0,
            use_mask: false,
            mask: None,
            template: false,
            k: 1,
        },
        timing,
    })
}
