//! Write a frame in the binary LGTS format, inspect its header and read it
//! back bit for bit.
//!
//! cargo run --example lgts_wire

use lgsel::provider::{lgts, read_frame, write_frame, write_readable_frame};
use lgsel::LogitFrame;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frame = LogitFrame::new(3, vec![0.5, -1.25, 3.0, 0.001, 65504.0])?;
    let bytes = lgts::encode(&frame);
    let header = &bytes[..lgts::HEADER_LEN];
    println!("magic   {:?}", std::str::from_utf8(&header[0..4])?);
    println!("version {}", u16::from_le_bytes([header[4], header[5]]));
    println!("flags   {}", u16::from_le_bytes([header[6], header[7]]));
    println!("vocab   {}", u32::from_le_bytes(header[8..12].try_into()?));
    println!("step    {}", u32::from_le_bytes(header[12..16].try_into()?));
    println!("payload {} bytes", bytes.len() - lgts::HEADER_LEN);

    let dir = tempfile::tempdir()?;
    let bin = dir.path().join("frame.lgts");
    let json = dir.path().join("frame.json");
    write_frame(&frame, &bin)?;
    write_readable_frame(&frame, &json)?;
    let from_bin = read_frame(&bin)?;
    let from_json = read_frame(&json)?;
    assert_eq!(lgts::encode(&from_bin), bytes);
    assert_eq!(from_json.values(), frame.values());
    println!("round trip ok: {:?}", from_bin.values());

    let mut truncated = bytes.clone();
    truncated.pop();
    println!("truncated: {}", lgts::decode(&truncated).unwrap_err());
    Ok(())
}
