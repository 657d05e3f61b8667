//! Decoding-free scoring: fold each candidate's token logits from a single
//! frame into one aggregate, normalize with a softmax and rank.

use rayon::prelude::*;
use thiserror::Error;

use crate::types::{Candidate, CandidatePool, LogitFrame, Method, RankedCandidate, Ranking, ScoreVector};

/// Pools at least this large are aggregated in parallel.
const PARALLEL_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("k-th token index {k} is out of range for an effective length of {len}")]
    KthOutOfRange { k: usize, len: usize },
    #[error("masked scoring requested but the candidate has no mask")]
    MissingMask,
    #[error("token id {token} is outside the frame vocabulary of size {vocab_size}")]
    TokenOutOfVocab { token: u32, vocab_size: usize },
    #[error("candidate `{id}`: {source}")]
    Candidate {
        id: String,
        #[source]
        source: Box<ScoreError>,
    },
    #[error("top-k cutoff must be at least 1")]
    ZeroK,
    #[error("score vector has {scores} entries but the pool has {pool}")]
    LengthMismatch { scores: usize, pool: usize },
}

impl ScoreError {
    fn for_candidate(self, id: &str) -> Self {
        ScoreError::Candidate {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}

/// Token ids a method sees for `candidate`: the masked positions when
/// `use_mask` is set, otherwise every token.
fn effective_tokens(candidate: &Candidate, use_mask: bool) -> Result<Vec<u32>, ScoreError> {
    if !use_mask {
        return Ok(candidate.tokens.clone());
    }
    let mask = candidate.mask.as_ref().ok_or(ScoreError::MissingMask)?;
    Ok(mask.iter().map(|&p| candidate.tokens[p as usize - 1]).collect())
}

/// Aggregate score of one candidate under `method`.
pub fn aggregate(
    frame: &LogitFrame,
    candidate: &Candidate,
    method: Method,
    use_mask: bool,
) -> Result<f64, ScoreError> {
    let tokens = effective_tokens(candidate, use_mask)?;
    if let Some(&token) = tokens.iter().find(|&&t| t as usize >= frame.vocab_size()) {
        return Err(ScoreError::TokenOutOfVocab {
            token,
            vocab_size: frame.vocab_size(),
        });
    }
    aggregate_tokens(frame, &tokens, method)
}

#[inline]
fn aggregate_tokens(frame: &LogitFrame, tokens: &[u32], method: Method) -> Result<f64, ScoreError> {
    debug_assert!(!tokens.is_empty());
    let value = match method {
        Method::First => frame.logit(tokens[0]),
        Method::Last => frame.logit(tokens[tokens.len() - 1]),
        Method::KthToken(k) => {
            if k == 0 || k > tokens.len() {
                return Err(ScoreError::KthOutOfRange {
                    k,
                    len: tokens.len(),
                });
            }
            frame.logit(tokens[k - 1])
        }
        Method::Sum => tokens.iter().map(|&t| frame.logit(t)).sum(),
        Method::Average => {
            tokens.iter().map(|&t| frame.logit(t)).sum::<f64>() / tokens.len() as f64
        }
        Method::SampleAverage => {
            // odd 1-based positions are the even 0-based indices
            let picked = tokens.iter().step_by(2);
            let count = tokens.len().div_ceil(2);
            picked.map(|&t| frame.logit(t)).sum::<f64>() / count as f64
        }
    };
    Ok(value)
}

/// Mask-aware aggregation over borrowed token storage, no allocation.
fn aggregate_fast(
    frame: &LogitFrame,
    candidate: &Candidate,
    method: Method,
    use_mask: bool,
) -> Result<f64, ScoreError> {
    let vocab = frame.vocab_size();
    let check = |t: u32| {
        if (t as usize) < vocab {
            Ok(t)
        } else {
            Err(ScoreError::TokenOutOfVocab {
                token: t,
                vocab_size: vocab,
            })
        }
    };
    if !use_mask {
        for &t in &candidate.tokens {
            check(t)?;
        }
        return aggregate_tokens(frame, &candidate.tokens, method);
    }
    let mask = candidate.mask.as_deref().ok_or(ScoreError::MissingMask)?;
    let at = |i: usize| check(candidate.tokens[mask[i] as usize - 1]);
    let len = mask.len();
    let value = match method {
        Method::First => frame.logit(at(0)?),
        Method::Last => frame.logit(at(len - 1)?),
        Method::KthToken(k) => {
            if k == 0 || k > len {
                return Err(ScoreError::KthOutOfRange { k, len });
            }
            frame.logit(at(k - 1)?)
        }
        Method::Sum | Method::Average => {
            let mut sum = 0.0;
            for i in 0..len {
                sum += frame.logit(at(i)?);
            }
            if method == Method::Average {
                sum / len as f64
            } else {
                sum
            }
        }
        Method::SampleAverage => {
            let mut sum = 0.0;
            for i in (0..len).step_by(2) {
                sum += frame.logit(at(i)?);
            }
            sum / len.div_ceil(2) as f64
        }
    };
    Ok(value)
}

/// Numerically stable softmax (max subtraction) in 64-bit precision.
pub fn softmax(aggregates: &[f64]) -> Vec<f64> {
    let max = aggregates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut exps: Vec<f64> = aggregates.iter().map(|&a| (a - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    for e in &mut exps {
        *e /= total;
    }
    exps
}

/// Scores every candidate in the pool and normalizes to a distribution.
///
/// Large pools are aggregated in parallel. Each candidate's own sum runs in
/// token order and the softmax reduction is sequential, so the result is
/// bit-identical whatever the thread schedule.
pub fn score_pool(
    frame: &LogitFrame,
    pool: &CandidatePool,
    method: Method,
    use_mask: bool,
) -> Result<ScoreVector, ScoreError> {
    let one = |c: &Candidate| aggregate_fast(frame, c, method, use_mask).map_err(|e| e.for_candidate(&c.id));
    let aggregates: Vec<f64> = if pool.len() >= PARALLEL_THRESHOLD {
        pool.candidates().par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        pool.candidates().iter().map(one).collect::<Result<_, _>>()?
    };
    let probabilities = softmax(&aggregates);
    Ok(ScoreVector {
        aggregates,
        probabilities,
    })
}

/// Reference path for [`score_pool`]: one candidate at a time through
/// [`aggregate`], then a textbook stable softmax.
pub fn score_pool_naive(
    frame: &LogitFrame,
    pool: &CandidatePool,
    method: Method,
    use_mask: bool,
) -> Result<ScoreVector, ScoreError> {
    let mut aggregates = Vec::new();
    for candidate in pool.candidates() {
        let a = aggregate(frame, candidate, method, use_mask).map_err(|e| e.for_candidate(&candidate.id))?;
        aggregates.push(a);
    }
    let mut max = f64::NEG_INFINITY;
    for &a in &aggregates {
        if a > max {
            max = a;
        }
    }
    let mut denominator = 0.0;
    for &a in &aggregates {
        denominator += (a - max).exp();
    }
    let mut probabilities = Vec::new();
    for &a in &aggregates {
        probabilities.push((a - max).exp() / denominator);
    }
    Ok(ScoreVector {
        aggregates,
        probabilities,
    })
}

/// Descending probability, ascending ordinal on exact ties.
#[inline]
fn rank_order(probabilities: &[f64], a: usize, b: usize) -> std::cmp::Ordering {
    probabilities[b]
        .total_cmp(&probabilities[a])
        .then_with(|| a.cmp(&b))
}

/// The `min(k, |pool|)` most probable candidates.
///
/// Uses a partial selection and sorts only the prefix; because the order is
/// total (the ordinal breaks every tie) the result equals the prefix of a
/// full stable descending sort.
pub fn top_k(scores: &ScoreVector, pool: &CandidatePool, k: usize) -> Result<Ranking, ScoreError> {
    if k == 0 {
        return Err(ScoreError::ZeroK);
    }
    let n = scores.probabilities.len();
    if n != pool.len() {
        return Err(ScoreError::LengthMismatch {
            scores: n,
            pool: pool.len(),
        });
    }
    let probs = &scores.probabilities;
    let take = k.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    if take < n {
        order.select_nth_unstable_by(take - 1, |&a, &b| rank_order(probs, a, b));
        order.truncate(take);
    }
    order.sort_unstable_by(|&a, &b| rank_order(probs, a, b));
    let entries = order
        .into_iter()
        .map(|ordinal| RankedCandidate {
            ordinal,
            id: pool.candidates()[ordinal].id.clone(),
            probability: probs[ordinal],
        })
        .collect();
    Ok(Ranking { k, entries })
}
