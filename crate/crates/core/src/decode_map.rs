//! Answer extraction for the full-decoding baseline: map a generated text
//! to the candidate it commits to.
//!
//! Two kinds of evidence are searched:
//!
//! * indication heads (`A`, `B`, ...) in the forms `Answer: X`,
//!   `answer is (X)`, `(X)`, `X,` / `X.` / `X)`, or a bare `X` closing the
//!   text;
//! * the verbatim candidate text, case-insensitively, on word boundaries.
//!
//! The match that begins earliest wins. At equal offsets a head beats
//! candidate text, and a longer candidate text beats a shorter one.

use std::sync::LazyLock;

use regex::{Regex, RegexBuilder};
use thiserror::Error;

use crate::types::CandidatePool;

static ANSWER_COLON: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\banswer\s*:\s*\(?").unwrap());
static ANSWER_IS_PAREN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\banswer\s+is\s*:?\s*\(").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("head labels must be unique and non-empty")]
    BadHeads,
    #[error("{heads} head labels for a pool of {pool} candidates")]
    Misaligned { heads: usize, pool: usize },
    #[error("alphabetic heads cover at most 26 candidates, pool has {0}")]
    TooManyCandidates(usize),
    #[error("{outputs} outputs for {instances} instances")]
    CountMismatch { outputs: usize, instances: usize },
}

/// Indication-head labels aligned with pool ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadScheme {
    heads: Vec<String>,
}

impl HeadScheme {
    pub fn new(heads: Vec<String>) -> Result<Self, DecodeError> {
        let mut seen = std::collections::HashSet::new();
        if heads.iter().any(|h| h.is_empty() || !seen.insert(h.as_str())) {
            return Err(DecodeError::BadHeads);
        }
        Ok(Self { heads })
    }

    /// `A`, `B`, `C`, ... for `n` candidates.
    pub fn alphabetic(n: usize) -> Result<Self, DecodeError> {
        if n > 26 {
            return Err(DecodeError::TooManyCandidates(n));
        }
        Ok(Self {
            heads: (b'A'..).take(n).map(|b| char::from(b).to_string()).collect(),
        })
    }

    pub fn heads(&self) -> &[String] {
        &self.heads
    }

    pub fn check(&self, pool: &CandidatePool) -> Result<(), DecodeError> {
        if self.heads.len() == pool.len() {
            Ok(())
        } else {
            Err(DecodeError::Misaligned {
                heads: self.heads.len(),
                pool: pool.len(),
            })
        }
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn boundary_before(text: &str, at: usize) -> bool {
    text[..at].chars().next_back().is_none_or(|c| !is_word(c))
}

fn boundary_after(text: &str, at: usize) -> bool {
    text[at..].chars().next().is_none_or(|c| !is_word(c))
}

/// Earliest offset at which head `label` is asserted in `text`.
fn earliest_head(text: &str, label: &str) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut note = |at: usize| {
        if best.is_none_or(|b| at < b) {
            best = Some(at);
        }
    };

    for m in ANSWER_COLON.find_iter(text) {
        let rest = &text[m.end()..];
        if rest.starts_with(label) && boundary_after(text, m.end() + label.len()) {
            note(m.start());
        }
    }
    for m in ANSWER_IS_PAREN.find_iter(text) {
        let rest = &text[m.end()..];
        if rest.starts_with(label) && rest[label.len()..].starts_with(')') {
            note(m.start());
        }
    }
    for (at, _) in text.match_indices(label) {
        let end = at + label.len();
        let after = text[end..].chars().next();
        if text[..at].ends_with('(') && after == Some(')') {
            note(at - 1);
        }
        if !boundary_before(text, at) || !boundary_after(text, end) {
            continue;
        }
        if matches!(after, Some(',' | '.' | ')')) || text[end..].trim().is_empty() {
            note(at);
        }
    }
    best
}

/// Earliest case-insensitive, word-bounded occurrence of `candidate`.
fn earliest_text(text: &str, candidate: &str) -> Option<usize> {
    let needle = candidate.trim();
    if needle.is_empty() {
        return None;
    }
    let re = RegexBuilder::new(&regex::escape(needle))
        .case_insensitive(true)
        .build()
        .ok()?;
    let starts_word = needle.chars().next().is_some_and(is_word);
    let ends_word = needle.chars().next_back().is_some_and(is_word);
    let mut from = 0;
    while let Some(m) = re.find_at(text, from) {
        let ok_before = !starts_word || boundary_before(text, m.start());
        let ok_after = !ends_word || boundary_after(text, m.end());
        if ok_before && ok_after {
            return Some(m.start());
        }
        from = m.start() + text[m.start()..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

/// Ordinal of the candidate `output` commits to, if any.
///
/// `texts` and `heads` are aligned by ordinal.
pub fn extract_ordinal(output: &str, texts: &[&str], heads: &[String]) -> Option<usize> {
    // (offset, kind, -length, ordinal): kind 0 = head, 1 = candidate text
    let mut best: Option<(usize, u8, isize, usize)> = None;
    let mut consider = |key: (usize, u8, isize, usize)| {
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    };
    for (ordinal, head) in heads.iter().enumerate().take(texts.len()) {
        if let Some(at) = earliest_head(output, head) {
            consider((at, 0, 0, ordinal));
        }
    }
    for (ordinal, text) in texts.iter().enumerate() {
        if let Some(at) = earliest_text(output, text) {
            consider((at, 1, -(text.len() as isize), ordinal));
        }
    }
    best.map(|(_, _, _, ordinal)| ordinal)
}

/// Candidate id chosen by a decoded `output`, or `None` when nothing in the
/// text points at a candidate.
pub fn extract_choice<'p>(output: &str, pool: &'p CandidatePool, scheme: &HeadScheme) -> Option<&'p str> {
    let texts: Vec<&str> = pool.candidates().iter().map(|c| c.text.as_str()).collect();
    extract_ordinal(output, &texts, scheme.heads()).map(|i| pool.candidates()[i].id.as_str())
}

/// A limited-pool question for the decoding baseline.
#[derive(Debug, Clone)]
pub struct DecodeItem {
    pub pool: CandidatePool,
    pub scheme: HeadScheme,
    pub gold: String,
}

/// Fraction of outputs whose extracted choice is the gold id; unmappable
/// outputs count as wrong.
pub fn decode_accuracy<S: AsRef<str>>(outputs: &[S], items: &[DecodeItem]) -> Result<f64, DecodeError> {
    if outputs.len() != items.len() || items.is_empty() {
        return Err(DecodeError::CountMismatch {
            outputs: outputs.len(),
            instances: items.len(),
        });
    }
    let correct = outputs
        .iter()
        .zip(items)
        .filter(|(out, item)| extract_choice(out.as_ref(), &item.pool, &item.scheme) == Some(item.gold.as_str()))
        .count();
    Ok(correct as f64 / items.len() as f64)
}
