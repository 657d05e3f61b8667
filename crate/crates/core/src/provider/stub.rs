use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{FrameRequest, LogitProvider, ProviderError};
use crate::types::LogitFrame;

/// Deterministic pseudo-random frames with i.i.d. standard-normal logits.
///
/// The stream for a request is keyed by (seed, prompt id or prompt text,
/// step, template flag), so identical requests always yield bit-identical
/// frames on every platform.
#[derive(Debug, Clone)]
pub struct StubProvider {
    vocab_size: usize,
    seed: u64,
    max_step: Option<u32>,
}

impl StubProvider {
    pub fn new(vocab_size: usize, seed: u64) -> Self {
        assert!(vocab_size > 0, "stub vocabulary must be non-empty");
        Self {
            vocab_size,
            seed,
            max_step: None,
        }
    }

    /// Rejects requests beyond `max_step`, emulating a source that cannot
    /// generate arbitrarily long prefixes.
    pub fn with_max_step(mut self, max_step: u32) -> Self {
        self.max_step = Some(max_step);
        self
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn stream_seed(&self, request: &FrameRequest) -> [u8; 32] {
        let key = request.prompt_id.as_deref().unwrap_or(&request.prompt);
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(request.step.to_le_bytes());
        hasher.update([u8::from(request.template), u8::from(request.prompt_id.is_some())]);
        hasher.update(key.as_bytes());
        hasher.finalize().into()
    }
}

impl LogitProvider for StubProvider {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError> {
        if let Some(max) = self.max_step {
            if request.step > max {
                return Err(ProviderError::StepUnsupported {
                    requested: request.step,
                    max,
                });
            }
        }
        let mut rng = ChaCha8Rng::from_seed(self.stream_seed(request));
        let values = (0..self.vocab_size)
            .map(|_| rng.sample::<f32, _>(StandardNormal))
            .collect();
        Ok(LogitFrame::new(request.step, values)?.with_provenance(self.describe()))
    }

    fn describe(&self) -> String {
        format!("stub(seed={}, vocab={})", self.seed, self.vocab_size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_frame() {
        let stub = StubProvider::new(64, 7);
        let req = FrameRequest::new("q").with_id("q1");
        let a = stub.get_frame(&req).unwrap();
        let b = StubProvider::new(64, 7).get_frame(&req).unwrap();
        let bits = |f: &LogitFrame| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn distinct_ids_steps_and_seeds_differ() {
        let stub = StubProvider::new(64, 7);
        let a = stub.get_frame(&FrameRequest::new("q").with_id("q1")).unwrap();
        let b = stub.get_frame(&FrameRequest::new("q").with_id("q2")).unwrap();
        let c = stub.get_frame(&FrameRequest::new("q").with_id("q1").at_step(1)).unwrap();
        let d = StubProvider::new(64, 8).get_frame(&FrameRequest::new("q").with_id("q1")).unwrap();
        assert_ne!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert_ne!(a.values(), d.values());
        assert_eq!(c.step(), 1);
    }

    #[test]
    fn values_look_standard_normal() {
        let frame = StubProvider::new(50_000, 1).get_frame(&FrameRequest::new("x")).unwrap();
        let n = frame.vocab_size() as f64;
        let mean = frame.values().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
        let var = frame.values().iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn max_step_is_enforced() {
        let stub = StubProvider::new(8, 0).with_max_step(1);
        assert!(stub.get_frame(&FrameRequest::new("x").at_step(1)).is_ok());
        assert!(matches!(
            stub.get_frame(&FrameRequest::new("x").at_step(2)),
            Err(ProviderError::StepUnsupported { requested: 2, max: 1 })
        ));
    }
}
