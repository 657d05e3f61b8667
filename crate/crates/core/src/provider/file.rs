use std::fs;
use std::path::{Path, PathBuf};

use super::{lgts, FrameRequest, LogitProvider, ProviderError};
use crate::types::{validate_frame, FrameParts, LogitFrame};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ProviderError + '_ {
    move |source| ProviderError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a frame from disk: LGTS binary, or the readable JSON form
/// `{"vocab_size", "step", "values"}` when the first non-blank byte is `{`.
pub fn read_frame(path: &Path) -> Result<LogitFrame, ProviderError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let readable = bytes
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'{');
    let frame = if readable {
        let parts: FrameParts =
            serde_json::from_slice(&bytes).map_err(|e| ProviderError::Readable(e.to_string()))?;
        validate_frame(parts)?
    } else {
        lgts::decode(&bytes)?
    };
    Ok(match frame.provenance() {
        Some(_) => frame,
        None => frame.with_provenance(path.display().to_string()),
    })
}

pub fn write_frame(frame: &LogitFrame, path: &Path) -> Result<(), ProviderError> {
    fs::write(path, lgts::encode(frame)).map_err(io_err(path))
}

pub fn write_readable_frame(frame: &LogitFrame, path: &Path) -> Result<(), ProviderError> {
    let parts = frame.clone().into_parts();
    let text = serde_json::to_string(&parts).map_err(|e| ProviderError::Readable(e.to_string()))?;
    fs::write(path, text).map_err(io_err(path))
}

/// Serves pre-exported frames from a directory laid out as `<id>.lgts`.
#[derive(Debug, Clone)]
pub struct FileProvider {
    dir: PathBuf,
}

impl FileProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, prompt_id: &str) -> PathBuf {
        self.dir.join(format!("{prompt_id}.lgts"))
    }
}

impl LogitProvider for FileProvider {
    fn get_frame(&self, request: &FrameRequest) -> Result<LogitFrame, ProviderError> {
        let id = request
            .prompt_id
            .as_deref()
            .ok_or_else(|| ProviderError::MissingPromptId(request.prompt.clone()))?;
        let frame = read_frame(&self.path_for(id))?;
        if frame.step() != request.step {
            return Err(ProviderError::StepMismatch {
                requested: request.step,
                returned: frame.step(),
            });
        }
        Ok(frame)
    }

    fn describe(&self) -> String {
        format!("file({})", self.dir.display())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_and_readable_forms() {
        let dir = tempfile::tempdir().unwrap();
        let frame = LogitFrame::new(2, vec![0.5, -1.25, 3.0]).unwrap();
        let bin = dir.path().join("f.lgts");
        let txt = dir.path().join("f.json");
        write_frame(&frame, &bin).unwrap();
        write_readable_frame(&frame, &txt).unwrap();
        assert_eq!(read_frame(&bin).unwrap().values(), frame.values());
        assert_eq!(read_frame(&txt).unwrap().values(), frame.values());
        assert_eq!(read_frame(&txt).unwrap().step(), 2);
    }

    #[test]
    fn readable_dimension_mismatch_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(&p, r#"{"vocab_size": 4, "step": 0, "values": [0, 0, 0]}"#).unwrap();
        assert!(matches!(read_frame(&p), Err(ProviderError::Invalid(_))));
        fs::write(&p, r#"{"vocab_size": 1, "step": -2, "values": [0]}"#).unwrap();
        assert!(matches!(read_frame(&p), Err(ProviderError::Invalid(_))));
    }

    #[test]
    fn directory_provider_resolves_ids() {
        let dir = tempfile::tempdir().unwrap();
        let frame = LogitFrame::new(0, vec![1.0, 2.0]).unwrap();
        let provider = FileProvider::new(dir.path());
        write_frame(&frame, &provider.path_for("q1")).unwrap();
        let req = FrameRequest::new("ignored").with_id("q1");
        assert_eq!(provider.get_frame(&req).unwrap().values(), frame.values());
        assert_eq!(
            provider.get_frame(&req).unwrap(),
            provider.get_frame(&req).unwrap()
        );
        assert!(matches!(
            provider.get_frame(&req.clone().at_step(1)),
            Err(ProviderError::StepMismatch { .. })
        ));
        assert!(matches!(
            provider.get_frame(&FrameRequest::new("x")),
            Err(ProviderError::MissingPromptId(_))
        ));
    }
}
