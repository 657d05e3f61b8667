//! Map free-form generations back to candidates and score a decoding
//! baseline.
//!
//! cargo run --example decode_mapping

use lgsel::decode_map::{decode_accuracy, extract_choice, DecodeItem, HeadScheme};
use lgsel::{Candidate, CandidatePool};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let texts = ["oxygen", "carbon dioxide", "nitrogen", "hydrogen"];
    let pool = CandidatePool::new(
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Candidate::new(((b'A' + i as u8) as char).to_string(), *t, vec![i as u32]))
            .collect(),
        "example",
        true,
    )?;
    let scheme = HeadScheme::alphabetic(pool.len())?;

    let outputs = [
        "Answer: B",
        "The answer is (B) carbon dioxide.",
        "Plants take in carbon dioxide during photosynthesis.",
        "B",
        "I think (A), oxygen.",
        "Photosynthesis is a process that occurs in plants.",
    ];
    for out in outputs {
        println!("{:<55} -> {:?}", out, extract_choice(out, &pool, &scheme));
    }

    let items: Vec<DecodeItem> = outputs
        .iter()
        .map(|_| DecodeItem {
            pool: pool.clone(),
            scheme: scheme.clone(),
            gold: "B".into(),
        })
        .collect();
    println!("accuracy {:.3}", decode_accuracy(&outputs, &items)?);
    Ok(())
}
