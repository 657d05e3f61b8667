//! Decoding-free candidate selection.
//!
//! Given one step of vocabulary logits from a language model, estimate
//! which candidate from a closed pool the model would pick, without
//! generating any text. The crate covers the whole path: candidate pools
//! and their tokenization, logit frame sources, the estimation methods,
//! answer extraction for a full-decoding baseline, and an evaluation
//! harness reporting accuracy, recall@k and timing.

pub mod decode_map;
pub mod harness;
pub mod pool;
pub mod provider;
pub mod scoring;
pub mod tokenizer;
pub mod types;

pub mod cli;

pub use scoring::{aggregate, score_pool, score_pool_naive, softmax, top_k, ScoreError};
pub use types::{
    validate_frame, validate_pool, Candidate, CandidatePool, FrameError, FrameParts, LogitFrame, Method,
    PoolError, PoolWarning, RankedCandidate, Ranking, ScoreVector,
};
