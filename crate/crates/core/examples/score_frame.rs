//! Score one logit frame against a small candidate pool with every
//! estimation method.
//!
//! cargo run --example score_frame

use lgsel::pool::{tokenize_candidates, CandidateRecord};
use lgsel::tokenizer::{ReferenceTokenizer, TokenizerAdapter};
use lgsel::{score_pool, top_k, LogitFrame, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tokenizer = ReferenceTokenizer::new(4096);
    let records: Vec<CandidateRecord> = ["race track", "populated areas", "the desert", "apartment", "roadblock"]
        .iter()
        .enumerate()
        .map(|(i, text)| CandidateRecord {
            id: ((b'A' + i as u8) as char).to_string(),
            text: text.to_string(),
            mask: None,
        })
        .collect();
    let (pool, _) = tokenize_candidates(&records, &tokenizer, true)?;

    // A frame that likes the first token of "populated" and, less so, "areas".
    let mut values = vec![0.0f32; tokenizer.vocab_size()];
    let b = &pool.get(1).unwrap().tokens;
    values[b[0] as usize] = 4.0;
    values[b[1] as usize] = 1.5;
    values[pool.get(0).unwrap().tokens[1] as usize] = 3.0;
    let frame = LogitFrame::new(0, values)?;

    for method in [
        Method::First,
        Method::Last,
        Method::KthToken(1),
        Method::Average,
        Method::Sum,
        Method::SampleAverage,
    ] {
        let scores = score_pool(&frame, &pool, method, false)?;
        let ranking = top_k(&scores, &pool, 3)?;
        let top: Vec<String> = ranking
            .entries
            .iter()
            .map(|e| format!("{}={:.3}", e.id, e.probability))
            .collect();
        println!("{:<16} {}", method.to_string(), top.join("  "));
    }
    Ok(())
}
