//! Evaluate every method on synthetic multiple-choice sets scored by the
//! seeded stub provider. Accuracy should sit at chance: 1 / options.
//!
//! cargo run --release --example random_baseline

use std::fmt::Write as _;
use std::path::Path;

use lgsel::harness::{render_table, run_eval, Dataset, EvalConfig};
use lgsel::provider::StubProvider;
use lgsel::tokenizer::ReferenceTokenizer;
use lgsel::Method;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(n: usize, options: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let cands: Vec<String> = (0..options)
            .map(|j| format!("{{\"id\":\"{}\",\"text\":\"option {i} {j}\"}}", (b'A' + j as u8) as char))
            .collect();
        let gold = (b'A' + rng.random_range(0..options) as u8) as char;
        writeln!(
            out,
            "{{\"id\":\"q{i}\",\"prompt\":\"question {i}\",\"candidates\":[{}],\"gold\":[\"{gold}\"]}}",
            cands.join(",")
        )
        .unwrap();
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tokenizer = ReferenceTokenizer::new(4096);
    let stub = StubProvider::new(4096, 42);
    for options in [5, 4, 3] {
        let dataset = Dataset::parse(&synthetic(2000, options, options as u64), Path::new("."), &tokenizer, true)?;
        let mut reports = Vec::new();
        for method in [Method::First, Method::Last, Method::Average, Method::Sum, Method::SampleAverage] {
            let mut config = EvalConfig::new(method);
            config.workers = 8;
            reports.push(run_eval(&dataset, &stub, &config)?);
        }
        println!("{options} options (chance {:.4})", 1.0 / options as f64);
        println!("{}", render_table(&reports));
    }
    Ok(())
}
