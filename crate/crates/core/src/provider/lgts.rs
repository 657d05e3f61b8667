//! LGTS binary frame format.
//!
//! ```text
//! offset  size  field
//!  0      4     magic "LGTS"
//!  4      2     version, u16 LE (= 1)
//!  6      2     flags, u16 LE (= 0)
//!  8      4     vocab_size, u32 LE
//! 12      4     step, u32 LE
//! 16      4*V   logits, IEEE-754 binary32 LE
//! ```
//!
//! No trailing bytes are allowed.

use crate::provider::ProviderError;
use crate::types::{validate_frame, FrameParts, LogitFrame};

pub const MAGIC: [u8; 4] = *b"LGTS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encode(frame: &LogitFrame) -> Vec<u8> {
    let values = frame.values();
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    out.extend_from_slice(&frame.step().to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

pub fn decode(bytes: &[u8]) -> Result<LogitFrame, ProviderError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        let mut found = [0u8; 4];
        let n = bytes.len().min(4);
        found[..n].copy_from_slice(&bytes[..n]);
        return Err(ProviderError::BadMagic(found));
    }
    if bytes.len() < HEADER_LEN {
        return Err(ProviderError::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let version = u16_at(bytes, 4);
    if version != VERSION {
        return Err(ProviderError::Version(version));
    }
    let flags = u16_at(bytes, 6);
    if flags != 0 {
        return Err(ProviderError::Flags(flags));
    }
    let vocab_size = u32_at(bytes, 8) as usize;
    let step = u32_at(bytes, 12);
    let expected = HEADER_LEN + vocab_size * 4;
    if bytes.len() < expected {
        return Err(ProviderError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(ProviderError::TrailingBytes(bytes.len() - expected));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(validate_frame(FrameParts {
        vocab_size: vocab_size as i64,
        step: i64::from(step),
        values,
        provenance: None,
    })?)
}
