//! Shared domain vocabulary: logit frames, candidates, pools, estimation
//! methods and the score/ranking values produced from them.
//!
//! Everything here is immutable once validated and can be shared freely
//! across worker threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while validating a [`LogitFrame`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("vocab_size must be positive, got {0}")]
    EmptyVocabulary(i64),
    #[error("dimension mismatch: vocab_size is {vocab_size} but {len} values were supplied")]
    DimensionMismatch { vocab_size: usize, len: usize },
    #[error("non-finite logit {value} at index {index}")]
    NonFinite { index: usize, value: f32 },
    #[error("step must be non-negative, got {0}")]
    NegativeStep(i64),
}

/// Errors raised while validating candidates and pools.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("candidate `{id}` has an empty token sequence")]
    EmptyTokens { id: String },
    #[error("duplicate candidate id `{id}`")]
    DuplicateId { id: String },
    #[error("candidate `{id}`: token id {token} is outside the vocabulary of size {vocab_size}")]
    TokenOutOfRange {
        id: String,
        token: u32,
        vocab_size: usize,
    },
    #[error("candidate `{id}`: malformed mask: {reason}")]
    MalformedMask { id: String, reason: String },
    #[error("a pool needs at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("tokenizer fingerprint is empty")]
    MissingFingerprint,
}

/// Unvalidated frame contents as they arrive from a file or the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameParts {
    pub vocab_size: i64,
    pub step: i64,
    pub values: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// One decoding step's scores over the whole vocabulary.
///
/// Values are kept in 32-bit form (the wire precision); all arithmetic on
/// them widens to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitFrame {
    step: u32,
    values: Vec<f32>,
    provenance: Option<String>,
}

/// Checks every frame invariant and returns the validated frame.
pub fn validate_frame(parts: FrameParts) -> Result<LogitFrame, FrameError> {
    if parts.vocab_size <= 0 {
        return Err(FrameError::EmptyVocabulary(parts.vocab_size));
    }
    let vocab_size = parts.vocab_size as usize;
    if parts.values.len() != vocab_size {
        return Err(FrameError::DimensionMismatch {
            vocab_size,
            len: parts.values.len(),
        });
    }
    if parts.step < 0 {
        return Err(FrameError::NegativeStep(parts.step));
    }
    let step = u32::try_from(parts.step).map_err(|_| FrameError::NegativeStep(parts.step))?;
    if let Some((index, &value)) = parts.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(FrameError::NonFinite { index, value });
    }
    Ok(LogitFrame {
        step,
        values: parts.values,
        provenance: parts.provenance,
    })
}

impl LogitFrame {
    pub fn new(step: u32, values: Vec<f32>) -> Result<Self, FrameError> {
        validate_frame(FrameParts {
            vocab_size: values.len() as i64,
            step: i64::from(step),
            values,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    pub fn vocab_size(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// Logit of `token` widened to 64 bits.
    #[inline]
    pub fn logit(&self, token: u32) -> f64 {
        f64::from(self.values[token as usize])
    }

    pub fn into_parts(self) -> FrameParts {
        FrameParts {
            vocab_size: self.values.len() as i64,
            step: i64::from(self.step),
            values: self.values,
            provenance: self.provenance,
        }
    }
}

/// A tokenized answer option.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub text: String,
    pub tokens: Vec<u32>,
    /// 1-based positions into `tokens`, strictly ascending.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<u32>>,
}

impl Candidate {
    pub fn new(id: impl Into<String>, text: impl Into<String>, tokens: Vec<u32>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            tokens,
            mask: None,
        }
    }

    pub fn with_mask(mut self, mask: Vec<u32>) -> Self {
        self.mask = Some(mask);
        self
    }

    /// Structural checks that do not depend on the vocabulary.
    pub fn check(&self) -> Result<(), PoolError> {
        if self.tokens.is_empty() {
            return Err(PoolError::EmptyTokens {
                id: self.id.clone(),
            });
        }
        if let Some(mask) = &self.mask {
            check_mask(&self.id, mask, self.tokens.len())?;
        }
        Ok(())
    }
}

pub(crate) fn check_mask(id: &str, mask: &[u32], len: usize) -> Result<(), PoolError> {
    let malformed = |reason: String| PoolError::MalformedMask {
        id: id.to_string(),
        reason,
    };
    if mask.is_empty() {
        return Err(malformed("mask is empty".into()));
    }
    for (i, &pos) in mask.iter().enumerate() {
        if pos == 0 || pos as usize > len {
            return Err(malformed(format!(
                "position {pos} is outside 1..={len} (positions are 1-based)"
            )));
        }
        if i > 0 && mask[i - 1] >= pos {
            return Err(malformed(format!(
                "positions must be unique and ascending, found {} before {pos}",
                mask[i - 1]
            )));
        }
    }
    Ok(())
}

/// The closed set of answer options for one query (or a whole task).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    candidates: Vec<Candidate>,
    tokenizer_fingerprint: String,
    prepend_space: bool,
    by_id: HashMap<String, usize>,
}

/// Non-fatal findings from [`validate_pool`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolWarning {
    /// Distinct candidate ids sharing one token sequence.
    DuplicateTokens { ids: Vec<String> },
}

impl fmt::Display for PoolWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoolWarning::DuplicateTokens { ids } => {
                write!(f, "candidates share a token sequence: {}", ids.join(", "))
            }
        }
    }
}

impl CandidatePool {
    /// Builds a pool, checking every invariant that does not need the
    /// vocabulary size.
    pub fn new(
        candidates: Vec<Candidate>,
        tokenizer_fingerprint: impl Into<String>,
        prepend_space: bool,
    ) -> Result<Self, PoolError> {
        let tokenizer_fingerprint = tokenizer_fingerprint.into();
        if tokenizer_fingerprint.is_empty() {
            return Err(PoolError::MissingFingerprint);
        }
        let mut by_id = HashMap::with_capacity(candidates.len());
        for (ordinal, candidate) in candidates.iter().enumerate() {
            candidate.check()?;
            if by_id.insert(candidate.id.clone(), ordinal).is_some() {
                return Err(PoolError::DuplicateId {
                    id: candidate.id.clone(),
                });
            }
        }
        if candidates.len() < 2 {
            return Err(PoolError::TooFewCandidates(candidates.len()));
        }
        Ok(Self {
            candidates,
            tokenizer_fingerprint,
            prepend_space,
            by_id,
        })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> Option<&Candidate> {
        self.candidates.get(ordinal)
    }

    pub fn ordinal_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn tokenizer_fingerprint(&self) -> &str {
        &self.tokenizer_fingerprint
    }

    pub fn prepend_space(&self) -> bool {
        self.prepend_space
    }

    /// Largest token id in the pool.
    pub fn max_token(&self) -> u32 {
        self.candidates
            .iter()
            .flat_map(|c| c.tokens.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn into_candidates(self) -> Vec<Candidate> {
        self.candidates
    }
}

/// Validates a pool against a vocabulary size.
///
/// Duplicate token sequences under distinct ids are reported as warnings
/// (and logged) rather than rejected.
pub fn validate_pool(
    pool: CandidatePool,
    vocab_size: usize,
) -> Result<(CandidatePool, Vec<PoolWarning>), PoolError> {
    for candidate in &pool.candidates {
        if let Some(&token) = candidate.tokens.iter().find(|&&t| t as usize >= vocab_size) {
            return Err(PoolError::TokenOutOfRange {
                id: candidate.id.clone(),
                token,
                vocab_size,
            });
        }
    }

    let mut groups: HashMap<&[u32], Vec<&str>> = HashMap::new();
    for candidate in &pool.candidates {
        groups
            .entry(candidate.tokens.as_slice())
            .or_default()
            .push(candidate.id.as_str());
    }
    let mut seen = HashSet::new();
    let mut warnings = Vec::new();
    // walk in pool order so the warning list is deterministic
    for candidate in &pool.candidates {
        let ids = &groups[candidate.tokens.as_slice()];
        if ids.len() > 1 && seen.insert(candidate.tokens.as_slice()) {
            let warning = PoolWarning::DuplicateTokens {
                ids: ids.iter().map(|s| s.to_string()).collect(),
            };
            log::warn!("{warning}");
            warnings.push(warning);
        }
    }
    Ok((pool, warnings))
}

/// How a candidate's token logits are folded into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    First,
    Last,
    /// 1-based token index.
    KthToken(usize),
    Average,
    Sum,
    /// Mean over the odd 1-based positions (1, 3, 5, ...).
    SampleAverage,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodError {
    #[error("k-th token method needs k >= 1")]
    ZeroK,
    #[error("unknown method `{0}` (expected first, last, kth, average, sum or sample-average)")]
    Unknown(String),
    #[error("method `kth` requires a k value")]
    MissingK,
}

impl Method {
    pub const ALL_NAMES: [&'static str; 6] = ["first", "last", "kth", "average", "sum", "sample-average"];

    pub fn kth(k: usize) -> Result<Self, MethodError> {
        if k == 0 {
            Err(MethodError::ZeroK)
        } else {
            Ok(Method::KthToken(k))
        }
    }

    /// Parses a command-line method name; `kth` takes its index from `k`.
    pub fn from_name(name: &str, k: Option<usize>) -> Result<Self, MethodError> {
        match name {
            "first" => Ok(Method::First),
            "last" => Ok(Method::Last),
            "kth" => Method::kth(k.ok_or(MethodError::MissingK)?),
            "average" => Ok(Method::Average),
            "sum" => Ok(Method::Sum),
            "sample-average" => Ok(Method::SampleAverage),
            other => Err(MethodError::Unknown(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::First => "first",
            Method::Last => "last",
            Method::KthToken(_) => "kth",
            Method::Average => "average",
            Method::Sum => "sum",
            Method::SampleAverage => "sample-average",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::KthToken(k) => write!(f, "kth@{k}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Method {
    type Err = MethodError;

    /// Accepts the plain names plus `kth@K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('@') {
            Some(("kth", k)) => {
                let k = k.parse().map_err(|_| MethodError::Unknown(s.to_string()))?;
                Method::kth(k)
            }
            _ => Method::from_name(s, None),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-candidate aggregates and their softmax-normalized probabilities,
/// aligned with pool order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub aggregates: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.aggregates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aggregates.is_empty()
    }

    /// Ordinal of the highest probability, lowest ordinal on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &p) in self.probabilities.iter().enumerate() {
            match best {
                Some(b) if self.probabilities[b] >= p => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub ordinal: usize,
    pub id: String,
    pub probability: f64,
}

/// Top-k candidates in descending probability, ties by ascending ordinal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub k: usize,
    pub entries: Vec<RankedCandidate>,
}

impl Ranking {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    pub fn best(&self) -> Option<&RankedCandidate> {
        self.entries.first()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(vocab_size: i64, step: i64, values: Vec<f32>) -> FrameParts {
        FrameParts {
            vocab_size,
            step,
            values,
            provenance: None,
        }
    }

    #[test]
    fn zero_frame_is_valid() {
        let frame = validate_frame(parts(4, 0, vec![0.0; 4])).unwrap();
        assert_eq!(frame.vocab_size(), 4);
        assert_eq!(frame.step(), 0);
    }

    #[test]
    fn short_frame_is_dimension_mismatch() {
        let err = validate_frame(parts(4, 0, vec![0.0; 3])).unwrap_err();
        assert_eq!(
            err,
            FrameError::DimensionMismatch {
                vocab_size: 4,
                len: 3
            }
        );
    }

    #[test]
    fn nan_is_reported_with_index() {
        let err = validate_frame(parts(2, 0, vec![1.0, f32::NAN])).unwrap_err();
        assert!(matches!(err, FrameError::NonFinite { index: 1, .. }));
        let err = validate_frame(parts(3, 0, vec![1.0, 2.0, f32::NEG_INFINITY])).unwrap_err();
        assert!(matches!(err, FrameError::NonFinite { index: 2, .. }));
    }

    #[test]
    fn negative_step_and_empty_vocab() {
        assert_eq!(
            validate_frame(parts(1, -1, vec![0.0])).unwrap_err(),
            FrameError::NegativeStep(-1)
        );
        assert_eq!(
            validate_frame(parts(0, 0, vec![])).unwrap_err(),
            FrameError::EmptyVocabulary(0)
        );
    }

    fn pool_of(cands: Vec<Candidate>) -> Result<CandidatePool, PoolError> {
        CandidatePool::new(cands, "ref", true)
    }

    #[test]
    fn simple_pool_validates() {
        let pool = pool_of(vec![
            Candidate::new("a", "x", vec![3]),
            Candidate::new("b", "y", vec![5]),
        ])
        .unwrap();
        let (pool, warnings) = validate_pool(pool, 10).unwrap();
        assert_eq!(pool.len(), 2);
        assert!(warnings.is_empty());
        assert_eq!(pool.ordinal_of("b"), Some(1));
    }

    #[test]
    fn pool_errors() {
        let err = pool_of(vec![
            Candidate::new("a", "", vec![]),
            Candidate::new("b", "y", vec![5]),
        ])
        .unwrap_err();
        assert_eq!(err, PoolError::EmptyTokens { id: "a".into() });

        let err = pool_of(vec![
            Candidate::new("a", "x", vec![1]).with_mask(vec![0]),
            Candidate::new("b", "y", vec![5]),
        ])
        .unwrap_err();
        assert!(matches!(err, PoolError::MalformedMask { .. }));

        let err = pool_of(vec![
            Candidate::new("a", "x", vec![1]),
            Candidate::new("a", "y", vec![5]),
        ])
        .unwrap_err();
        assert_eq!(err, PoolError::DuplicateId { id: "a".into() });

        let err = pool_of(vec![Candidate::new("a", "x", vec![1])]).unwrap_err();
        assert_eq!(err, PoolError::TooFewCandidates(1));

        let pool = pool_of(vec![
            Candidate::new("a", "x", vec![1]),
            Candidate::new("b", "y", vec![10]),
        ])
        .unwrap();
        assert!(matches!(
            validate_pool(pool, 10).unwrap_err(),
            PoolError::TokenOutOfRange { token: 10, .. }
        ));
    }

    #[test]
    fn mask_must_be_unique_ascending_and_in_range() {
        let base = Candidate::new("a", "x y z", vec![1, 2, 3]);
        assert!(base.clone().with_mask(vec![1, 3]).check().is_ok());
        assert!(base.clone().with_mask(vec![3, 1]).check().is_err());
        assert!(base.clone().with_mask(vec![2, 2]).check().is_err());
        assert!(base.clone().with_mask(vec![4]).check().is_err());
        assert!(base.with_mask(vec![]).check().is_err());
    }

    #[test]
    fn duplicate_token_sequences_warn() {
        let pool = pool_of(vec![
            Candidate::new("a", "x", vec![1, 2]),
            Candidate::new("b", "x", vec![1, 2]),
            Candidate::new("c", "z", vec![3]),
        ])
        .unwrap();
        let (_, warnings) = validate_pool(pool, 10).unwrap();
        assert_eq!(
            warnings,
            vec![PoolWarning::DuplicateTokens {
                ids: vec!["a".into(), "b".into()]
            }]
        );
    }

    #[test]
    fn method_names_round_trip() {
        for name in Method::ALL_NAMES {
            let m = Method::from_name(name, Some(2)).unwrap();
            assert_eq!(m.name(), name);
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!(Method::kth(0), Err(MethodError::ZeroK));
        assert_eq!(Method::from_name("kth", None), Err(MethodError::MissingK));
        assert!(Method::from_name("median", None).is_err());
    }
}
