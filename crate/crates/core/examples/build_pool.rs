//! Tokenize a candidate file into a pool file, attach keyword masks and
//! load it back.
//!
//! cargo run --example build_pool

use lgsel::pool::{attach_masks, build_pool, load_pool, save_pool};
use lgsel::tokenizer::{ReferenceTokenizer, TokenizerAdapter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let candidates = dir.path().join("labels.jsonl");
    std::fs::write(
        &candidates,
        concat!(
            "{\"id\":\"L1\",\"text\":\"Solar energy storage\"}\n",
            "{\"id\":\"L2\",\"text\":\"Wind turbine maintenance\"}\n",
            "{\"id\":\"L3\",\"text\":\"Energy policy\"}\n",
        ),
    )?;
    let tokenizer = ReferenceTokenizer::default();
    let (pool, warnings) = build_pool(&candidates, &tokenizer, true)?;
    for w in &warnings {
        println!("warning: {w}");
    }
    let path = dir.path().join("pool.jsonl");
    save_pool(&pool, &path)?;
    println!("tokenizer {}", tokenizer.fingerprint());
    print!("{}", std::fs::read_to_string(&path)?);

    // keep only the keyword token of each label
    let masks = dir.path().join("masks.jsonl");
    std::fs::write(
        &masks,
        "{\"id\":\"L1\",\"positions\":[1]}\n{\"id\":\"L2\",\"positions\":[2]}\n{\"id\":\"L3\",\"positions\":[1]}\n",
    )?;
    let masked = attach_masks(&load_pool(&path)?, &masks)?;
    for c in masked.candidates() {
        println!("{} tokens {:?} mask {:?}", c.id, c.tokens, c.mask);
    }
    Ok(())
}
