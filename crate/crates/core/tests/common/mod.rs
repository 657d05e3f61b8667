#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lgsel::{Candidate, CandidatePool, LogitFrame};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Frame with logits uniform in [-scale, scale].
pub fn random_frame(rng: &mut impl Rng, vocab: usize, scale: f32) -> LogitFrame {
    let values = (0..vocab).map(|_| rng.random_range(-scale..=scale)).collect();
    LogitFrame::new(0, values).unwrap()
}

/// Pool of `n` candidates with 1..=max_tokens random tokens each.
pub fn random_pool(rng: &mut impl Rng, n: usize, max_tokens: usize, vocab: usize) -> CandidatePool {
    let candidates = (0..n)
        .map(|i| {
            let len = rng.random_range(1..=max_tokens);
            let tokens = (0..len).map(|_| rng.random_range(0..vocab as u32)).collect();
            Candidate::new(format!("c{i}"), format!("candidate {i}"), tokens)
        })
        .collect();
    CandidatePool::new(candidates, "synthetic", true).unwrap()
}

/// Pool where every candidate has exactly `len` tokens.
pub fn fixed_length_pool(rng: &mut impl Rng, n: usize, len: usize, vocab: usize) -> CandidatePool {
    let candidates = (0..n)
        .map(|i| {
            let tokens = (0..len).map(|_| rng.random_range(0..vocab as u32)).collect();
            Candidate::new(format!("c{i}"), format!("candidate {i}"), tokens)
        })
        .collect();
    CandidatePool::new(candidates, "synthetic", true).unwrap()
}

const WORDS: &[&str] = &[
    "river", "mountain", "library", "garden", "harbor", "desert", "forest", "market", "station", "castle",
    "bridge", "valley", "island", "temple", "meadow", "canyon", "village", "tower", "lagoon", "prairie",
];

/// Single-gold multiple-choice dataset with inline candidates, one prompt
/// per instance and a uniformly drawn gold option.
pub fn synthetic_mcqa(n: usize, options: usize, seed: u64) -> String {
    let mut rng = rng(seed);
    let mut out = String::new();
    for i in 0..n {
        let mut words = WORDS.to_vec();
        words.shuffle(&mut rng);
        let cands: Vec<String> = (0..options)
            .map(|j| {
                format!(
                    "{{\"id\":\"{}\",\"text\":\"{} {}\"}}",
                    (b'A' + j as u8) as char,
                    words[2 * j],
                    words[2 * j + 1]
                )
            })
            .collect();
        let gold = (b'A' + rng.random_range(0..options) as u8) as char;
        writeln!(
            out,
            "{{\"id\":\"q{i:05}\",\"prompt\":\"synthetic question {i}\",\"candidates\":[{}],\"gold\":[\"{gold}\"]}}",
            cands.join(",")
        )
        .unwrap();
    }
    out
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}
