//! Tokenizer adapters: the boundary between candidate text and token ids.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("reading tokenizer definition {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed tokenizer definition: {0}")]
    Definition(String),
    #[error("cannot encode {0:?}: no vocabulary entry and no byte fallback")]
    Unencodable(char),
}

/// Text-to-ids encoder with a fingerprint that changes whenever its
/// behaviour does.
pub trait TokenizerAdapter: Send + Sync {
    fn fingerprint(&self) -> &str;

    /// Number of ids this tokenizer can emit.
    fn vocab_size(&self) -> usize;

    fn encode(&self, text: &str) -> Result<Vec<u32>, TokenizerError>;
}

const BYTE_IDS: u32 = 256;
const SPACE_MARKER: char = '\u{2581}';

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Dependency-free tokenizer for tests and synthetic pools.
///
/// Runs of alphanumeric characters become one word id each (FNV-1a hash
/// into `256..vocab_size`); a word that directly follows whitespace is
/// hashed with a leading `▁` so `" word"` and `"word"` differ. Whitespace
/// itself is dropped and every other character falls back to its UTF-8
/// bytes (ids `0..256`).
#[derive(Debug, Clone)]
pub struct ReferenceTokenizer {
    vocab_size: usize,
    fingerprint: String,
}

impl ReferenceTokenizer {
    pub const DEFAULT_VOCAB: usize = 32_000;

    pub fn new(vocab_size: usize) -> Self {
        assert!(
            vocab_size > BYTE_IDS as usize,
            "reference tokenizer needs more than {BYTE_IDS} ids"
        );
        Self {
            vocab_size,
            fingerprint: format!("reference-v1:{vocab_size}"),
        }
    }

    fn word_id(&self, word: &str, after_space: bool) -> u32 {
        let marker = if after_space { "\u{2581}" } else { "" };
        let hash = fnv1a(marker.bytes().chain(word.bytes()));
        let span = (self.vocab_size - BYTE_IDS as usize) as u64;
        BYTE_IDS + (hash % span) as u32
    }
}

impl Default for ReferenceTokenizer {
    fn default() -> Self {
        Self::new(Self::DEFAULT_VOCAB)
    }
}

impl TokenizerAdapter for ReferenceTokenizer {
    fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn encode(&self, text: &str) -> Result<Vec<u32>, TokenizerError> {
        let mut ids = Vec::new();
        let mut chars = text.char_indices().peekable();
        let mut after_space = false;
        while let Some((start, ch)) = chars.next() {
            if ch.is_whitespace() {
                after_space = true;
                continue;
            }
            if ch.is_alphanumeric() {
                let mut end = start + ch.len_utf8();
                while let Some(&(i, c)) = chars.peek() {
                    if !c.is_alphanumeric() {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                ids.push(self.word_id(&text[start..end], after_space));
            } else {
                let mut buf = [0u8; 4];
                ids.extend(ch.encode_utf8(&mut buf).bytes().map(u32::from));
            }
            after_space = false;
        }
        Ok(ids)
    }
}

#[derive(Deserialize)]
struct VocabDefinition {
    vocab: HashMap<String, u32>,
    #[serde(default)]
    byte_fallback: bool,
}

/// Greedy longest-match tokenizer over a vocabulary file.
///
/// The definition file is JSON: `{"vocab": {"piece": id, ...},
/// "byte_fallback": bool}`. Spaces are rewritten to `▁` before matching,
/// SentencePiece style. With `byte_fallback`, characters no piece covers
/// are emitted as `<0xNN>` byte pieces, which must be in the vocabulary.
/// The fingerprint is the SHA-256 of the file contents.
#[derive(Debug, Clone)]
pub struct VocabTokenizer {
    pieces: HashMap<String, u32>,
    max_piece_chars: usize,
    byte_fallback: bool,
    vocab_size: usize,
    fingerprint: String,
}

impl VocabTokenizer {
    pub fn from_file(path: &Path) -> Result<Self, TokenizerError> {
        let bytes = std::fs::read(path).map_err(|source| TokenizerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TokenizerError> {
        let def: VocabDefinition =
            serde_json::from_slice(bytes).map_err(|e| TokenizerError::Definition(e.to_string()))?;
        if def.vocab.is_empty() {
            return Err(TokenizerError::Definition("vocabulary is empty".into()));
        }
        if def.vocab.keys().any(String::is_empty) {
            return Err(TokenizerError::Definition("empty piece in vocabulary".into()));
        }
        let vocab_size = def.vocab.values().copied().max().unwrap_or(0) as usize + 1;
        let max_piece_chars = def.vocab.keys().map(|k| k.chars().count()).max().unwrap_or(1);
        Ok(Self {
            pieces: def.vocab,
            max_piece_chars,
            byte_fallback: def.byte_fallback,
            vocab_size,
            fingerprint: format!("sha256:{}", hex::encode(Sha256::digest(bytes))),
        })
    }
}

impl TokenizerAdapter for VocabTokenizer {
    fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn encode(&self, text: &str) -> Result<Vec<u32>, TokenizerError> {
        let normalized: String = text
            .chars()
            .map(|c| if c == ' ' { SPACE_MARKER } else { c })
            .collect();
        // byte offsets of every char boundary
        let bounds: Vec<usize> = normalized
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(normalized.len()))
            .collect();
        let mut ids = Vec::new();
        let mut at = 0;
        while at + 1 < bounds.len() {
            let longest = (1..=self.max_piece_chars.min(bounds.len() - 1 - at))
                .rev()
                .find_map(|n| {
                    self.pieces
                        .get(&normalized[bounds[at]..bounds[at + n]])
                        .map(|&id| (n, id))
                });
            match longest {
                Some((n, id)) => {
                    ids.push(id);
                    at += n;
                }
                None => {
                    let ch = normalized[bounds[at]..bounds[at + 1]].chars().next().unwrap_or(' ');
                    if !self.byte_fallback {
                        return Err(TokenizerError::Unencodable(ch));
                    }
                    let mut buf = [0u8; 4];
                    for b in ch.encode_utf8(&mut buf).bytes() {
                        let piece = format!("<0x{b:02X}>");
                        let id = self
                            .pieces
                            .get(&piece)
                            .ok_or(TokenizerError::Unencodable(ch))?;
                        ids.push(*id);
                    }
                    at += 1;
                }
            }
        }
        Ok(ids)
    }
}
