use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::{FrameRequest, LogitProvider, ProviderError};
use crate::types::{validate_frame, FrameParts, LogitFrame};

/// Environment variable holding the default endpoint base URL.
pub const ENDPOINT_ENV: &str = "LGSEL_ENDPOINT";

const LOGITS_PATH: &str = "/v1/logits";

/// Body of `POST /v1/logits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogitsRequest {
    pub prompt: String,
    pub step: u32,
    pub template: bool,
}

/// Response envelope; `logits_b64` is base64 of `vocab_size` f32 LE values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsResponse {
    pub vocab_size: i64,
    pub step: i64,
    pub dtype: String,
    pub logits_b64: String,
}

impl LogitsResponse {
    pub fn from_frame(frame: &LogitFrame) -> Self {
        let bytes: Vec<u8> = frame.values().iter().flat_map(|v| v.to_le_bytes()).collect();
        Self {
            vocab_size: frame.vocab_size() as i64,
            step: i64::from(frame.step()),
            dtype: "f32le".into(),
            logits_b64: BASE64.encode(bytes),
        }
    }

    /// Decodes and validates the envelope.
    pub fn into_frame(self) -> Result<LogitFrame, ProviderError> {
        if self.dtype != "f32le" {
            return Err(ProviderError::Schema(format!("unsupported dtype `{}`", self.dtype)));
        }
        if self.vocab_size <= 0 {
            return Err(ProviderError::Schema(format!("vocab_size {} is not positive", self.vocab_size)));
        }
        let bytes = BASE64
            .decode(self.logits_b64.as_bytes())
            .map_err(|e| ProviderError::Schema(format!("logits_b64: {e}")))?;
        if bytes.len() != self.vocab_size as usize * 4 {
            return Err(ProviderError::Schema(format!(
                "vocab_size {} needs {} payload bytes, got {}",
                self.vocab_size,
                self.vocab_size * 4,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(validate_frame(FrameParts {
            vocab_size: self.vocab_size,
            step: self.step,
            values,
            provenance: None,
        })?)
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    released: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            released: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.released.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut free = self.0.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.0.released.notify_one();
    }
}

/// Fetches frames from a remote inference server.
pub struct HttpProvider {
    url: String,
    client: reqwest::blocking::Client,
    permits: Permits,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider").field("url", &self.url).finish()
    }
}

impl HttpProvider {
    /// `endpoint` is the server base URL; `/v1/logits` is appended unless
    /// already present.
    pub fn new(endpoint: &str, max_in_flight: usize) -> Result<Self, ProviderError> {
        let base = endpoint.trim_end_matches('/');
        let url = if base.ends_with(LOGITS_PATH) {
            base.to_string()
        } else {
            format!("{base}{LOGITS_PATH}")
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(Self {
            url,
            client,
            permits: Permits::new(max_in_flight),
        })
    }

    /// Uses `explicit` when given, else [`ENDPOINT_ENV`].
    pub fn from_env_or(explicit: Option<&str>, max_in_flight: usize) -> Result<Self, ProviderError> {
        let endpoint = match explicit {
            Some(e) => e.to_string(),
            None => std::env::var(ENDPOINT_ENV).map_err(|_| ProviderError::NoEndpoint)?,
        };
        Self::new(&endpoint, max_in_flight)
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl LogitProvider for HttpProvider {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError> {
        let body = serde_json::to_vec(&LogitsRequest {
            prompt: request.prompt.clone(),
            step: request.step,
            template: request.template,
        })
        .map_err(|e| ProviderError::Transport(e.to_string()))?;

        let _permit = self.permits.acquire();
        let response = self
            .client
            .post(&self.url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ProviderError::Status {
                status: status.as_u16(),
                body: text.chars().take(200).collect(),
            });
        }
        let envelope: LogitsResponse =
            serde_json::from_str(&text).map_err(|e| ProviderError::Schema(e.to_string()))?;
        let frame = envelope.into_frame().map_err(|e| match e {
            ProviderError::Invalid(inner) => ProviderError::Schema(inner.to_string()),
            other => other,
        })?;
        if frame.step() != request.step {
            return Err(ProviderError::StepMismatch {
                requested: request.step,
                returned: frame.step(),
            });
        }
        Ok(frame.with_provenance(self.url.clone()))
    }

    fn describe(&self) -> String {
        format!("http({})", self.url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trip() {
        let frame = LogitFrame::new(3, vec![0.25, -7.5, 1e-3]).unwrap();
        let decoded = LogitsResponse::from_frame(&frame).into_frame().unwrap();
        assert_eq!(decoded, frame);
    }

    #[test]
    fn envelope_schema_errors() {
        let frame = LogitFrame::new(0, vec![1.0; 4]).unwrap();
        let mut env = LogitsResponse::from_frame(&frame);
        env.vocab_size = 5;
        assert!(matches!(env.into_frame(), Err(ProviderError::Schema(_))));
        let mut env = LogitsResponse::from_frame(&frame);
        env.dtype = "f16".into();
        assert!(matches!(env.into_frame(), Err(ProviderError::Schema(_))));
        let mut env = LogitsResponse::from_frame(&frame);
        env.logits_b64 = "***".into();
        assert!(matches!(env.into_frame(), Err(ProviderError::Schema(_))));
    }

    #[test]
    fn endpoint_path_is_normalized() {
        assert_eq!(
            HttpProvider::new("http://localhost:9/", 1).unwrap().url(),
            "http://localhost:9/v1/logits"
        );
        assert_eq!(
            HttpProvider::new("http://localhost:9/v1/logits", 1).unwrap().url(),
            "http://localhost:9/v1/logits"
        );
    }
}
