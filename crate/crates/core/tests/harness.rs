mod common;

use std::path::Path;

use lgsel::harness::metrics::{recall_at_k, top1_correct};
use lgsel::harness::{
    bench, read_decode_outputs, run_decode_eval, run_eval, sweep_masks, sweep_steps, BenchConfig, Dataset, EvalConfig,
    HarnessError,
};
use lgsel::provider::{write_frame, FileProvider, StubProvider};
use lgsel::tokenizer::ReferenceTokenizer;
use lgsel::{Method, RankedCandidate, Ranking};

use common::*;

const VOCAB: usize = 4096;

fn dataset(n: usize, options: usize, seed: u64) -> Dataset {
    Dataset::parse(&synthetic_mcqa(n, options, seed), Path::new("."), &ReferenceTokenizer::new(VOCAB), true).unwrap()
}

#[test]
fn single_step_sweep_matches_eval() {
    let ds = dataset(200, 4, 1);
    let stub = StubProvider::new(VOCAB, 7);
    let config = EvalConfig::new(Method::Average);
    let direct = run_eval(&ds, &stub, &config).unwrap().without_timing();
    let swept: Vec<_> = sweep_steps(&ds, &stub, &config, &[0])
        .into_iter()
        .map(|r| r.unwrap().without_timing())
        .collect();
    assert_eq!(swept, vec![direct]);
}

#[test]
fn step_sweep_distinguishes_steps() {
    let ds = dataset(300, 5, 2);
    let stub = StubProvider::new(VOCAB, 7);
    let config = EvalConfig::new(Method::First);
    let r: Vec<_> = sweep_steps(&ds, &stub, &config, &[0, 1, 2])
        .into_iter()
        .map(|r| r.unwrap().without_timing())
        .collect();
    assert_eq!(r.len(), 3);
    for (i, report) in r.iter().enumerate() {
        assert_eq!(report.config.step, i as u32);
    }
    assert!(r[0].value != r[1].value || r[1].value != r[2].value);

    let same: Vec<_> = sweep_steps(&ds, &stub, &config, &[0, 0])
        .into_iter()
        .map(|r| r.unwrap().without_timing())
        .collect();
    assert_eq!(same[0], same[1]);
}

#[test]
fn unsupported_step_fails_only_its_slot() {
    let ds = dataset(20, 3, 3);
    let stub = StubProvider::new(VOCAB, 7).with_max_step(1);
    let r = sweep_steps(&ds, &stub, &EvalConfig::new(Method::Last), &[0, 1, 2]);
    assert!(r[0].is_ok() && r[1].is_ok());
    let err = r[2].as_ref().unwrap_err();
    assert!(err.is_transport(), "{err}");
}

#[test]
fn worker_count_does_not_change_reports() {
    let ds = dataset(300, 4, 4);
    let stub = StubProvider::new(VOCAB, 11);
    let mut config = EvalConfig::new(Method::SampleAverage);
    let one = run_eval(&ds, &stub, &config).unwrap().without_timing();
    config.workers = 6;
    let many = run_eval(&ds, &stub, &config).unwrap().without_timing();
    assert_eq!(one, many);
}

#[test]
fn mask_sweep() {
    let dir = tempfile::tempdir().unwrap();
    // two-word candidates tokenize to two tokens each
    let full = write_file(
        dir.path(),
        "full.jsonl",
        &("ABCD".chars().map(|c| format!("{{\"id\":\"{c}\",\"positions\":[1,2]}}\n")).collect::<String>()),
    );
    let first = write_file(
        dir.path(),
        "first.jsonl",
        &("ABCD".chars().map(|c| format!("{{\"id\":\"{c}\",\"positions\":[1]}}\n")).collect::<String>()),
    );
    let last = write_file(
        dir.path(),
        "last.jsonl",
        &("ABCD".chars().map(|c| format!("{{\"id\":\"{c}\",\"positions\":[2]}}\n")).collect::<String>()),
    );
    let ds = dataset(400, 4, 5);
    assert!(ds.instances.iter().all(|i| i.pool.candidates().iter().all(|c| c.tokens.len() == 2)));
    let stub = StubProvider::new(VOCAB, 13);
    let config = EvalConfig::new(Method::Average);
    let reports: Vec<_> = sweep_masks(&ds, &stub, &config, &[full.as_path(), first.as_path(), last.as_path()])
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    assert_eq!(reports.len(), 4);
    assert!(!reports[0].config.use_mask && reports[0].config.mask.is_none());
    assert!(reports[1..].iter().all(|r| r.config.use_mask && r.config.mask.is_some()));
    assert_eq!(reports[1].value, reports[0].value);

    let first_unmasked = run_eval(&ds, &stub, &EvalConfig::new(Method::First)).unwrap();
    assert_eq!(reports[2].value, first_unmasked.value);
    let last_unmasked = run_eval(&ds, &stub, &EvalConfig::new(Method::Last)).unwrap();
    assert_eq!(reports[3].value, last_unmasked.value);
}

#[test]
fn mask_for_unknown_candidate_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_file(dir.path(), "bad.jsonl", "{\"id\":\"Z\",\"positions\":[1]}\n");
    let ds = dataset(10, 3, 6);
    let stub = StubProvider::new(VOCAB, 13);
    let r = sweep_masks(&ds, &stub, &EvalConfig::new(Method::Average), &[bad.as_path()]);
    assert!(r[0].is_ok());
    assert!(r[1].is_err());
}

fn frame_dataset(dir: &Path, n: usize, missing: usize) -> Dataset {
    let mut rng = rng(9);
    let mut body = String::new();
    for i in 0..n {
        let name = format!("f{i}.lgts");
        if i >= missing {
            write_frame(&random_frame(&mut rng, 32_000, 5.0), &dir.join(&name)).unwrap();
        }
        body.push_str(&format!(
            "{{\"id\":\"q{i}\",\"frame\":\"{name}\",\"candidates\":[{{\"id\":\"A\",\"text\":\"red apple\"}},{{\"id\":\"B\",\"text\":\"green pear\"}}],\"gold\":[\"A\"]}}\n"
        ));
    }
    let path = write_file(dir, "ds.jsonl", &body);
    Dataset::load(&path, &ReferenceTokenizer::default(), true).unwrap()
}

#[test]
fn failures_within_cap_are_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let ds = frame_dataset(dir.path(), 20, 2);
    let stub = StubProvider::new(VOCAB, 1);
    let report = run_eval(&ds, &stub, &EvalConfig::new(Method::First)).unwrap();
    assert_eq!(report.failed, 2);
    assert_eq!(report.instances, 18);
}

#[test]
fn failures_over_cap_abort() {
    let dir = tempfile::tempdir().unwrap();
    let ds = frame_dataset(dir.path(), 20, 3);
    let stub = StubProvider::new(VOCAB, 1);
    match run_eval(&ds, &stub, &EvalConfig::new(Method::First)) {
        Err(HarnessError::TooManyFailures { failed, total, first }) => {
            assert_eq!((failed, total), (3, 20));
            assert_eq!(first.id, "q0");
        }
        other => panic!("expected abort, got {other:?}"),
    }
}

#[test]
fn file_provider_serves_prompt_ids() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dataset(30, 3, 8);
    let mut rng = rng(3);
    for inst in &ds.instances {
        write_frame(&random_frame(&mut rng, 32_000, 4.0), &dir.path().join(format!("{}.lgts", inst.id))).unwrap();
    }
    let provider = FileProvider::new(dir.path());
    let a = run_eval(&ds, &provider, &EvalConfig::new(Method::Average)).unwrap();
    let b = run_eval(&ds, &provider, &EvalConfig::new(Method::Average)).unwrap();
    assert_eq!(a.failed, 0);
    assert_eq!(a.without_timing(), b.without_timing());
}

#[test]
fn kth_beyond_short_candidates_fails_instances() {
    let ds = dataset(20, 3, 10);
    let stub = StubProvider::new(VOCAB, 1);
    let err = run_eval(&ds, &stub, &EvalConfig::new(Method::KthToken(9))).unwrap_err();
    assert!(matches!(err, HarnessError::TooManyFailures { failed: 20, .. }));
    assert!(!err.is_transport());
}

#[test]
fn decode_mini_corpus() {
    let ds = Dataset::load(&fixture("decode_mini_dataset.jsonl"), &ReferenceTokenizer::default(), true).unwrap();
    let outputs = read_decode_outputs(&fixture("decode_mini_outputs.jsonl")).unwrap();
    let report = run_decode_eval(&ds, &outputs, None).unwrap();
    assert!((report.value - 0.7).abs() < 1e-12, "{}", report.value);
    assert_eq!(report.instances, 10);
    assert!(report.timing.is_some());

    let missing = &outputs[1..];
    assert!(matches!(run_decode_eval(&ds, missing, None), Err(HarnessError::MissingOutput(id)) if id == "q01"));
    let mut dup = outputs.clone();
    dup.push(outputs[0].clone());
    assert!(matches!(run_decode_eval(&ds, &dup, None), Err(HarnessError::DuplicateOutput(_))));
}

#[test]
fn bench_orders_methods() {
    let mut rng = rng(17);
    let pool = random_pool(&mut rng, 10_000, 12, 32_000);
    let stub = StubProvider::new(32_000, 2);
    let config = BenchConfig {
        trials: 5,
        ..BenchConfig::default()
    };
    let report = bench(&stub, &pool, &[Method::First, Method::Average], &config).unwrap();
    let first = &report.methods[0];
    let average = &report.methods[1];
    assert!(first.scoring.mean_seconds <= average.scoring.mean_seconds);
    assert!(report.methods.iter().all(|m| m.speedup >= 10.0), "{report:?}");

    let too_few = BenchConfig {
        trials: 2,
        ..BenchConfig::default()
    };
    assert!(matches!(bench(&stub, &pool, &[Method::First], &too_few), Err(HarnessError::TooFewTrials(2))));
}

fn ranking(ids: &[&str]) -> Ranking {
    Ranking {
        k: ids.len(),
        entries: ids
            .iter()
            .enumerate()
            .map(|(i, id)| RankedCandidate {
                ordinal: i,
                id: id.to_string(),
                probability: 1.0 / (i + 1) as f64,
            })
            .collect(),
    }
}

#[test]
fn recall_examples() {
    let r = ranking(&["a", "b", "c", "d"]);
    let gold = vec!["b".to_string(), "d".to_string()];
    assert_eq!(recall_at_k(&r, &gold, 1), 0.0);
    assert_eq!(recall_at_k(&r, &gold, 2), 0.5);
    assert_eq!(recall_at_k(&r, &gold, 4), 1.0);
    assert_eq!(top1_correct(&r, "a"), 1.0);
    assert_eq!(top1_correct(&r, "b"), 0.0);
    assert_eq!(recall_at_k(&r, &["a".to_string()], 1), top1_correct(&r, "a"));
}
