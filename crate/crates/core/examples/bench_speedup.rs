//! Time single-frame estimation against a simulated 50-step decode lap.
//!
//! cargo run --release --example bench_speedup

use lgsel::harness::{bench, BenchConfig};
use lgsel::provider::StubProvider;
use lgsel::{Candidate, CandidatePool, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocab = 32_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pool = CandidatePool::new(
        (0..10_000)
            .map(|i| {
                let len = rng.random_range(1..=6);
                Candidate::new(format!("c{i}"), "", (0..len).map(|_| rng.random_range(0..vocab)).collect())
            })
            .collect(),
        "example",
        true,
    )?;
    let stub = StubProvider::new(vocab as usize, 9);
    let report = bench(
        &stub,
        &pool,
        &[Method::First, Method::Last, Method::Average, Method::Sum, Method::SampleAverage],
        &BenchConfig::default(),
    )?;
    println!(
        "pool {}  acquire {:.3} ms  decode lap (L={}) {:.3} ms",
        report.pool_size,
        report.acquire.mean_seconds * 1e3,
        report.decode_length,
        report.decode_lap.mean_seconds * 1e3
    );
    for m in &report.methods {
        println!(
            "{:<16} scoring {:.3} ms  estimate {:.3} ms  speedup {:.1}x",
            m.method,
            m.scoring.mean_seconds * 1e3,
            m.estimate_seconds * 1e3,
            m.speedup
        );
    }
    Ok(())
}
