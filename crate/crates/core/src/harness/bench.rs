use std::time::Instant;

use serde::Serialize;

use super::metrics::mean_std;
use super::HarnessError;
use crate::provider::{FrameRequest, LogitProvider};
use crate::scoring::score_pool;
use crate::types::{CandidatePool, LogitFrame, Method};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub trials: usize,
    /// Sequential frame acquisitions in the simulated decode lap.
    pub decode_length: usize,
    pub use_mask: bool,
    pub prompt: String,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 5,
            decode_length: 50,
            use_mask: false,
            prompt: "bench".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStat {
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

impl TimingStat {
    fn of(samples: &[f64]) -> Self {
        let (mean_seconds, std_seconds) = mean_std(samples);
        Self {
            mean_seconds,
            std_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodTiming {
    pub method: String,
    pub scoring: TimingStat,
    /// Mean frame acquisition plus mean scoring.
    pub estimate_seconds: f64,
    /// Decode-lap mean over `estimate_seconds`.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub provider: String,
    pub pool_size: usize,
    pub trials: usize,
    pub decode_length: usize,
    pub acquire: TimingStat,
    pub decode_lap: TimingStat,
    pub methods: Vec<MethodTiming>,
}

fn argmax(frame: &LogitFrame) -> usize {
    frame
        .values()
        .iter()
        .enumerate()
        .fold((0, f32::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Times single-frame estimation against a simulated autoregressive lap.
///
/// Each trial acquires one frame (timed on its own), scores it with every
/// method, then runs the decode lap: `decode_length` sequential frame
/// acquisitions, each followed by a greedy argmax. Runs single-threaded
/// at the instance level; one untimed warm-up trial precedes the rest.
pub fn bench(
    provider: &dyn LogitProvider,
    pool: &CandidatePool,
    methods: &[Method],
    config: &BenchConfig,
) -> Result<BenchReport, HarnessError> {
    if config.trials < 3 {
        return Err(HarnessError::TooFewTrials(config.trials));
    }
    let mut acquire = Vec::with_capacity(config.trials);
    let mut scoring = vec![Vec::with_capacity(config.trials); methods.len()];
    let mut laps = Vec::with_capacity(config.trials);

    for trial in 0..=config.trials {
        let warmup = trial == 0;
        let request = FrameRequest::new(config.prompt.clone()).with_id(format!("{}-{trial}", config.prompt));

        let t0 = Instant::now();
        let frame = provider.get_frame(&request)?;
        let t_acquire = t0.elapsed().as_secs_f64();

        let mut t_methods = Vec::with_capacity(methods.len());
        for &method in methods {
            let t = Instant::now();
            let scores = score_pool(&frame, pool, method, config.use_mask)?;
            std::hint::black_box(&scores);
            t_methods.push(t.elapsed().as_secs_f64());
        }

        let t = Instant::now();
        for step in 0..config.decode_length {
            let frame = provider.get_frame(&request.clone().at_step(step as u32))?;
            std::hint::black_box(argmax(&frame));
        }
        let t_lap = t.elapsed().as_secs_f64();

        if !warmup {
            acquire.push(t_acquire);
            for (acc, t) in scoring.iter_mut().zip(t_methods) {
                acc.push(t);
            }
            laps.push(t_lap);
        }
    }

    let acquire = TimingStat::of(&acquire);
    let decode_lap = TimingStat::of(&laps);
    let methods = methods
        .iter()
        .zip(&scoring)
        .map(|(m, samples)| {
            let scoring = TimingStat::of(samples);
            let estimate_seconds = acquire.mean_seconds + scoring.mean_seconds;
            MethodTiming {
                method: m.to_string(),
                scoring,
                estimate_seconds,
                speedup: decode_lap.mean_seconds / estimate_seconds,
            }
        })
        .collect();
    Ok(BenchReport {
        provider: provider.describe(),
        pool_size: pool.len(),
        trials: config.trials,
        decode_length: config.decode_length,
        acquire,
        decode_lap,
        methods,
    })
}
