//! Rank a large shared label pool for several documents from pre-exported
//! frames and report recall@k.
//!
//! cargo run --release --example massive_pool

use lgsel::harness::{render_table, run_eval, Dataset, EvalConfig};
use lgsel::pool::save_pool;
use lgsel::provider::{write_frame, StubProvider};
use lgsel::tokenizer::ReferenceTokenizer;
use lgsel::{Candidate, CandidatePool, LogitFrame, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocab = 8_000u32;
    let labels = 20_000;
    let dir = tempfile::tempdir()?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    let pool = CandidatePool::new(
        (0..labels)
            .map(|i| {
                let len = rng.random_range(1..=5);
                Candidate::new(format!("L{i}"), format!("label {i}"), (0..len).map(|_| rng.random_range(0..vocab)).collect())
            })
            .collect(),
        "example",
        true,
    )?;
    save_pool(&pool, &dir.path().join("labels.jsonl"))?;

    // Each document's frame favours the tokens of its gold labels.
    let mut data = String::new();
    for doc in 0..50 {
        let gold: Vec<usize> = (0..rng.random_range(1..=5)).map(|_| rng.random_range(0..labels)).collect();
        let mut values: Vec<f32> = (0..vocab).map(|_| rng.random_range(-2.0..2.0)).collect();
        for &g in &gold {
            for &t in &pool.get(g).unwrap().tokens {
                values[t as usize] += 3.0;
            }
        }
        write_frame(&LogitFrame::new(0, values)?, &dir.path().join(format!("d{doc}.lgts")))?;
        let ids: Vec<String> = gold.iter().map(|g| format!("\"L{g}\"")).collect();
        data.push_str(&format!(
            "{{\"id\":\"d{doc}\",\"frame\":\"d{doc}.lgts\",\"pool\":\"labels.jsonl\",\"gold\":[{}]}}\n",
            ids.join(",")
        ));
    }
    let path = dir.path().join("docs.jsonl");
    std::fs::write(&path, data)?;

    let dataset = Dataset::load(&path, &ReferenceTokenizer::default(), true)?;
    // frame instances never consult the provider
    let unused = StubProvider::new(vocab as usize, 0);
    let mut reports = Vec::new();
    for method in [Method::First, Method::Average, Method::Sum] {
        for k in [1, 5, 20] {
            let mut config = EvalConfig::new(method);
            config.k = Some(k);
            reports.push(run_eval(&dataset, &unused, &config)?.without_timing());
        }
    }
    println!("{}", render_table(&reports));
    Ok(())
}
