//! Sources of logit frames: files, a remote inference endpoint, or a
//! seeded stub.
//!
//! Every provider hands back frames that already passed
//! [`validate_frame`](crate::types::validate_frame), and none of them ever
//! decodes text.

mod file;
mod http;
pub mod lgts;
mod stub;

pub use file::{read_frame, write_frame, write_readable_frame, FileProvider};
pub use http::{HttpProvider, LogitsRequest, LogitsResponse, ENDPOINT_ENV};
pub use stub::StubProvider;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{FrameError, LogitFrame};

/// What to ask a provider for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRequest {
    pub prompt: String,
    /// Stable id of a pre-registered prompt (dataset instance id).
    #[serde(default)]
    pub prompt_id: Option<String>,
    /// Output step: number of greedy tokens generated before the frame.
    pub step: u32,
    /// Whether the source applies the model's chat template.
    pub template: bool,
}

impl FrameRequest {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            prompt_id: None,
            step: 0,
            template: false,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.prompt_id = Some(id.into());
        self
    }

    pub fn at_step(mut self, step: u32) -> Self {
        self.step = step;
        self
    }

    pub fn with_template(mut self, template: bool) -> Self {
        self.template = template;
        self
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic {0:?} (expected \"LGTS\")")]
    BadMagic([u8; 4]),
    #[error("unsupported LGTS version {0}")]
    Version(u16),
    #[error("unsupported LGTS flags {0:#06x}")]
    Flags(u16),
    #[error("truncated frame: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} trailing bytes after the frame payload")]
    TrailingBytes(usize),
    #[error("malformed readable frame: {0}")]
    Readable(String),
    #[error("invalid frame: {0}")]
    Invalid(#[from] FrameError),
    #[error("request for prompt `{0}` needs a prompt id")]
    MissingPromptId(String),
    #[error("step {requested} is not supported (max {max})")]
    StepUnsupported { requested: u32, max: u32 },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("response schema violation: {0}")]
    Schema(String),
    #[error("requested step {requested} but the endpoint returned step {returned}")]
    StepMismatch { requested: u32, returned: u32 },
    #[error("no endpoint configured (pass one explicitly or set {ENDPOINT_ENV})")]
    NoEndpoint,
    #[error("no frame source for prompt instance `{0}` (pass --provider)")]
    NoSource(String),
}

impl ProviderError {
    /// True for failures of the remote source itself rather than of the
    /// data it was asked to read.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            ProviderError::Transport(_)
                | ProviderError::Status { .. }
                | ProviderError::Schema(_)
                | ProviderError::StepMismatch { .. }
                | ProviderError::NoEndpoint
                | ProviderError::StepUnsupported { .. }
        )
    }
}

/// A uniform source of logit frames. Implementations must tolerate
/// concurrent calls.
pub trait LogitProvider: Send + Sync {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError>;

    /// Short label for reports, e.g. `stub(seed=7)`.
    fn describe(&self) -> String;
}

impl<P: LogitProvider + ?Sized> LogitProvider for &P {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError> {
        (**self).get_frame(request)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<P: LogitProvider + ?Sized> LogitProvider for Box<P> {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError> {
        (**self).get_frame(request)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}
