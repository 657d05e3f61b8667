//! Building, persisting and masking tokenized candidate pools.
//!
//! Three line-delimited JSON formats live here:
//!
//! * candidate input: `{"id", "text", "mask"?}` per line;
//! * tokenized pool: a header
//!   `{"format":"lgsel-pool","version":1,"tokenizer":..,"prepend_space":..}`
//!   followed by `{"id","text","tokens","mask"?}` per candidate;
//! * mask file: `{"id", "positions"}` per line.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::tokenizer::{TokenizerAdapter, TokenizerError};
use crate::types::{check_mask, validate_pool, Candidate, CandidatePool, PoolError, PoolWarning};

pub const POOL_FORMAT: &str = "lgsel-pool";
pub const POOL_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum PoolFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported pool format version {0} (expected {POOL_VERSION})")]
    Version(u64),
    #[error("pool header has no tokenizer fingerprint")]
    MissingFingerprint,
    #[error("malformed pool header: {0}")]
    Header(String),
    #[error("malformed record `{id}`: {reason}")]
    MalformedRecord { id: String, reason: String },
    #[error("candidate `{id}`: {source}")]
    Tokenize {
        id: String,
        #[source]
        source: TokenizerError,
    },
    #[error("mask for unknown candidate `{0}`")]
    UnknownMaskId(String),
    #[error(transparent)]
    Pool(#[from] PoolError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PoolFileError + '_ {
    move |source| PoolFileError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: usize, text: &str) -> Result<T, PoolFileError> {
    serde_json::from_str(text).map_err(|e| PoolFileError::Parse {
        line,
        message: e.to_string(),
    })
}

/// One line of a candidate input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<u32>>,
}

/// One line of a mask file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub id: String,
    pub positions: Vec<u32>,
}

pub fn read_candidate_file(path: &Path) -> Result<Vec<CandidateRecord>, PoolFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    lines(&text).map(|(n, l)| parse_line(n, l)).collect()
}

/// Tokenizes candidate records into a validated pool.
///
/// With `prepend_space` each text is encoded as `" " + text`, since the
/// candidate continues a prompt mid-sequence. Texts are otherwise stored
/// verbatim.
pub fn tokenize_candidates(
    records: &[CandidateRecord],
    adapter: &dyn TokenizerAdapter,
    prepend_space: bool,
) -> Result<(CandidatePool, Vec<PoolWarning>), PoolFileError> {
    let mut candidates = Vec::with_capacity(records.len());
    for record in records {
        let tokens = if prepend_space {
            adapter.encode(&format!(" {}", record.text))
        } else {
            adapter.encode(&record.text)
        }
        .map_err(|source| PoolFileError::Tokenize {
            id: record.id.clone(),
            source,
        })?;
        candidates.push(Candidate {
            id: record.id.clone(),
            text: record.text.clone(),
            tokens,
            mask: record.mask.clone(),
        });
    }
    let pool = CandidatePool::new(candidates, adapter.fingerprint(), prepend_space)?;
    Ok(validate_pool(pool, adapter.vocab_size())?)
}

/// Reads a candidate input file and tokenizes it.
pub fn build_pool(
    candidate_file: &Path,
    adapter: &dyn TokenizerAdapter,
    prepend_space: bool,
) -> Result<(CandidatePool, Vec<PoolWarning>), PoolFileError> {
    let records = read_candidate_file(candidate_file)?;
    tokenize_candidates(&records, adapter, prepend_space)
}

#[derive(Serialize)]
struct Header<'a> {
    format: &'a str,
    version: u64,
    tokenizer: &'a str,
    prepend_space: bool,
}

pub fn write_pool<W: Write>(pool: &CandidatePool, mut out: W) -> std::io::Result<()> {
    let header = Header {
        format: POOL_FORMAT,
        version: POOL_VERSION,
        tokenizer: pool.tokenizer_fingerprint(),
        prepend_space: pool.prepend_space(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for candidate in pool.candidates() {
        serde_json::to_writer(&mut out, candidate)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_pool(pool: &CandidatePool, path: &Path) -> Result<(), PoolFileError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_pool(pool, BufWriter::new(file)).map_err(io_err(path))
}

pub fn parse_pool(text: &str) -> Result<CandidatePool, PoolFileError> {
    let mut it = lines(text);
    let (hline, htext) = it.next().ok_or_else(|| PoolFileError::Header("file is empty".into()))?;
    let header: Value = parse_line(hline, htext)?;
    if header.get("format").and_then(Value::as_str) != Some(POOL_FORMAT) {
        return Err(PoolFileError::Header(format!("format is not \"{POOL_FORMAT}\"")));
    }
    let version = header
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| PoolFileError::Header("missing version".into()))?;
    if version != POOL_VERSION {
        return Err(PoolFileError::Version(version));
    }
    let fingerprint = match header.get("tokenizer").and_then(Value::as_str) {
        Some(fp) if !fp.is_empty() => fp.to_string(),
        _ => return Err(PoolFileError::MissingFingerprint),
    };
    let prepend_space = header
        .get("prepend_space")
        .and_then(Value::as_bool)
        .ok_or_else(|| PoolFileError::Header("missing prepend_space".into()))?;

    let mut candidates = Vec::new();
    for (line, record) in it {
        let value: Value = parse_line(line, record)?;
        let id = value
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| PoolFileError::MalformedRecord {
                id: format!("<line {line}>"),
                reason: "missing \"id\"".into(),
            })?
            .to_string();
        for field in ["text", "tokens"] {
            if value.get(field).is_none() {
                return Err(PoolFileError::MalformedRecord {
                    id,
                    reason: format!("missing \"{field}\""),
                });
            }
        }
        let candidate: Candidate =
            serde_json::from_value(value).map_err(|e| PoolFileError::MalformedRecord {
                id: id.clone(),
                reason: e.to_string(),
            })?;
        candidates.push(candidate);
    }
    Ok(CandidatePool::new(candidates, fingerprint, prepend_space)?)
}

pub fn load_pool(path: &Path) -> Result<CandidatePool, PoolFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_pool(&text)
}

pub fn read_mask_file(path: &Path) -> Result<Vec<MaskRecord>, PoolFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    lines(&text).map(|(n, l)| parse_line(n, l)).collect()
}

/// Returns a copy of `pool` with the given keyword masks attached.
///
/// Positions are 1-based and may arrive in any order; they are stored
/// sorted. Candidates without a record keep whatever mask they had.
pub fn apply_masks(pool: &CandidatePool, masks: &[MaskRecord]) -> Result<CandidatePool, PoolFileError> {
    let mut by_ordinal: HashMap<usize, Vec<u32>> = HashMap::new();
    for record in masks {
        let ordinal = pool
            .ordinal_of(&record.id)
            .ok_or_else(|| PoolFileError::UnknownMaskId(record.id.clone()))?;
        let mut positions = record.positions.clone();
        positions.sort_unstable();
        check_mask(&record.id, &positions, pool.candidates()[ordinal].tokens.len())?;
        by_ordinal.insert(ordinal, positions);
    }
    let candidates = pool
        .candidates()
        .iter()
        .enumerate()
        .map(|(i, c)| match by_ordinal.remove(&i) {
            Some(mask) => c.clone().with_mask(mask),
            None => c.clone(),
        })
        .collect();
    Ok(CandidatePool::new(
        candidates,
        pool.tokenizer_fingerprint(),
        pool.prepend_space(),
    )?)
}

pub fn attach_masks(pool: &CandidatePool, mask_file: &Path) -> Result<CandidatePool, PoolFileError> {
    apply_masks(pool, &read_mask_file(mask_file)?)
}
