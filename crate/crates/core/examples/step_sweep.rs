//! Evaluate one dataset at several output steps. The stub provider draws an
//! independent frame per step, so each step is its own random baseline.
//!
//! cargo run --example step_sweep

use std::path::Path;

use lgsel::harness::{render_table, sweep_steps, Dataset, EvalConfig};
use lgsel::provider::StubProvider;
use lgsel::tokenizer::ReferenceTokenizer;
use lgsel::Method;

const DATA: &str = r#"{"id":"q1","prompt":"Which gas do plants absorb?","candidates":[{"id":"A","text":"oxygen"},{"id":"B","text":"carbon dioxide"},{"id":"C","text":"nitrogen"}],"gold":["B"]}
{"id":"q2","prompt":"Largest planet?","candidates":[{"id":"A","text":"Mars"},{"id":"B","text":"Venus"},{"id":"C","text":"Jupiter"}],"gold":["C"]}
{"id":"q3","prompt":"Boiling point of water at sea level?","candidates":[{"id":"A","text":"100 degrees"},{"id":"B","text":"50 degrees"},{"id":"C","text":"0 degrees"}],"gold":["A"]}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dataset = Dataset::parse(DATA, Path::new("."), &ReferenceTokenizer::default(), true)?;
    let stub = StubProvider::new(ReferenceTokenizer::DEFAULT_VOCAB, 7).with_max_step(3);
    let config = EvalConfig::new(Method::Average);
    let mut reports = Vec::new();
    for (step, result) in (0..6).zip(sweep_steps(&dataset, &stub, &config, &[0, 1, 2, 3, 4, 5])) {
        match result {
            Ok(r) => reports.push(r.without_timing()),
            Err(e) => println!("step {step}: {e}"),
        }
    }
    println!("{}", render_table(&reports));
    Ok(())
}
