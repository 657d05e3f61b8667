//! Evaluation datasets: line-delimited
//! `{"id", "prompt"|"frame", "candidates"|"pool", "gold"}` records.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::HarnessError;
use crate::pool::{apply_masks, load_pool, tokenize_candidates, CandidateRecord, MaskRecord};
use crate::tokenizer::TokenizerAdapter;
use crate::types::CandidatePool;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineCandidate {
    id: String,
    text: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    #[serde(default)]
    prompt: Option<String>,
    #[serde(default)]
    frame: Option<PathBuf>,
    #[serde(default)]
    candidates: Option<Vec<InlineCandidate>>,
    #[serde(default)]
    pool: Option<PathBuf>,
    gold: Vec<String>,
}

/// Where an instance's logits come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameSource {
    /// Ask the configured provider.
    Prompt(String),
    /// Read a pre-exported frame file.
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct EvalInstance {
    pub id: String,
    pub source: FrameSource,
    pub pool: Arc<CandidatePool>,
    /// Whether the pool is shared across instances (massive-pool task).
    pub shared_pool: bool,
    pub gold: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub instances: Vec<EvalInstance>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl Dataset {
    /// Loads a dataset file. Inline candidates are tokenized with `adapter`;
    /// `pool` and `frame` paths resolve against the dataset's directory and
    /// each shared pool file is loaded once.
    pub fn load(path: &Path, adapter: &dyn TokenizerAdapter, prepend_space: bool) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base, adapter, prepend_space)
    }

    pub fn parse(
        text: &str,
        base: &Path,
        adapter: &dyn TokenizerAdapter,
        prepend_space: bool,
    ) -> Result<Self, HarnessError> {
        let mut shared: HashMap<PathBuf, Arc<CandidatePool>> = HashMap::new();
        let mut ids = HashSet::new();
        let mut instances = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| HarnessError::Dataset { line: line_no, message };
            let record: Record = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            if !ids.insert(record.id.clone()) {
                return Err(bad(format!("duplicate instance id `{}`", record.id)));
            }
            let source = match (record.prompt, record.frame) {
                (Some(prompt), None) => FrameSource::Prompt(prompt),
                (None, Some(frame)) => FrameSource::File(resolve(base, &frame)),
                _ => return Err(bad("exactly one of \"prompt\" and \"frame\" is required".into())),
            };
            let (pool, shared_pool) = match (record.candidates, record.pool) {
                (Some(candidates), None) => {
                    let records: Vec<CandidateRecord> = candidates
                        .into_iter()
                        .map(|c| CandidateRecord {
                            id: c.id,
                            text: c.text,
                            mask: None,
                        })
                        .collect();
                    let (pool, _) = tokenize_candidates(&records, adapter, prepend_space)
                        .map_err(|e| bad(format!("instance `{}`: {e}", record.id)))?;
                    (Arc::new(pool), false)
                }
                (None, Some(pool_path)) => {
                    let full = resolve(base, &pool_path);
                    let pool = match shared.get(&full) {
                        Some(p) => Arc::clone(p),
                        None => {
                            let p = Arc::new(load_pool(&full)?);
                            shared.insert(full, Arc::clone(&p));
                            p
                        }
                    };
                    (pool, true)
                }
                _ => return Err(bad("exactly one of \"candidates\" and \"pool\" is required".into())),
            };
            if record.gold.is_empty() {
                return Err(bad(format!("instance `{}` has an empty gold set", record.id)));
            }
            if !shared_pool && record.gold.len() != 1 {
                return Err(bad(format!(
                    "instance `{}`: limited-pool instances need exactly one gold id",
                    record.id
                )));
            }
            if let Some(g) = record.gold.iter().find(|g| pool.ordinal_of(g).is_none()) {
                return Err(bad(format!("instance `{}`: gold id `{g}` is not in the pool", record.id)));
            }
            instances.push(EvalInstance {
                id: record.id,
                source,
                pool,
                shared_pool,
                gold: record.gold,
            });
        }
        if instances.is_empty() {
            return Err(HarnessError::NoInstances);
        }
        Ok(Self { instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn all_single_gold(&self) -> bool {
        self.instances.iter().all(|i| i.gold.len() == 1)
    }

    /// Default cutoff: 1 for single-gold datasets, 20 otherwise.
    pub fn default_k(&self) -> usize {
        if self.all_single_gold() {
            1
        } else {
            20
        }
    }

    /// Copy of the dataset with `masks` attached to every pool. Each
    /// distinct shared pool is masked once.
    pub fn with_masks(&self, masks: &[MaskRecord]) -> Result<Self, HarnessError> {
        let mut done: HashMap<*const CandidatePool, Arc<CandidatePool>> = HashMap::new();
        let mut instances = Vec::with_capacity(self.instances.len());
        for inst in &self.instances {
            let key = Arc::as_ptr(&inst.pool);
            let pool = match done.get(&key) {
                Some(p) => Arc::clone(p),
                None => {
                    let p = Arc::new(apply_masks(&inst.pool, masks)?);
                    done.insert(key, Arc::clone(&p));
                    p
                }
            };
            instances.push(EvalInstance {
                pool,
                ..inst.clone()
            });
        }
        Ok(Self { instances })
    }
}
