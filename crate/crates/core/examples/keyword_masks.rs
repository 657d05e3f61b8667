//! Compare unmasked scoring against keyword masks that keep only some
//! token positions of each candidate.
//!
//! cargo run --example keyword_masks

use std::path::Path;

use lgsel::harness::{render_table, sweep_masks, Dataset, EvalConfig};
use lgsel::provider::StubProvider;
use lgsel::tokenizer::ReferenceTokenizer;
use lgsel::Method;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut data = String::new();
    for i in 0..300 {
        data.push_str(&format!(
            "{{\"id\":\"q{i}\",\"prompt\":\"q {i}\",\"candidates\":[{{\"id\":\"A\",\"text\":\"the river\"}},{{\"id\":\"B\",\"text\":\"a mountain\"}},{{\"id\":\"C\",\"text\":\"the forest\"}}],\"gold\":[\"{}\"]}}\n",
            ["A", "B", "C"][i % 3]
        ));
    }
    let dataset = Dataset::parse(&data, Path::new("."), &ReferenceTokenizer::default(), true)?;

    // drop the article, keep the noun
    let keyword = dir.path().join("keyword.jsonl");
    std::fs::write(
        &keyword,
        "{\"id\":\"A\",\"positions\":[2]}\n{\"id\":\"B\",\"positions\":[2]}\n{\"id\":\"C\",\"positions\":[2]}\n",
    )?;
    let article = dir.path().join("article.jsonl");
    std::fs::write(
        &article,
        "{\"id\":\"A\",\"positions\":[1]}\n{\"id\":\"B\",\"positions\":[1]}\n{\"id\":\"C\",\"positions\":[1]}\n",
    )?;

    let stub = StubProvider::new(ReferenceTokenizer::DEFAULT_VOCAB, 3);
    let results = sweep_masks(&dataset, &stub, &EvalConfig::new(Method::Average), &[&keyword, &article]);
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    println!("{}", render_table(&reports));
    Ok(())
}
