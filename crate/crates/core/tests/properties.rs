use lgsel::decode_map::{extract_choice, HeadScheme};
use lgsel::pool::{parse_pool, write_pool};
use lgsel::provider::{lgts, read_frame, write_readable_frame};
use lgsel::{score_pool, top_k, Candidate, CandidatePool, LogitFrame, Method};
use proptest::prelude::*;

const VOCAB: usize = 64;

fn method() -> impl Strategy<Value = Method> {
    prop_oneof![
        Just(Method::First),
        Just(Method::Last),
        Just(Method::KthToken(1)),
        Just(Method::Average),
        Just(Method::Sum),
        Just(Method::SampleAverage),
    ]
}

fn frame() -> impl Strategy<Value = LogitFrame> {
    (prop::collection::vec(-30.0f32..30.0, VOCAB), 0u32..8).prop_map(|(v, step)| LogitFrame::new(step, v).unwrap())
}

fn tokens() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..VOCAB as u32, 1..6)
}

fn pool() -> impl Strategy<Value = CandidatePool> {
    prop::collection::vec((tokens(), "[a-z ]{0,12}", any::<bool>()), 2..24).prop_map(|items| {
        let cands = items
            .into_iter()
            .enumerate()
            .map(|(i, (toks, text, masked))| {
                let c = Candidate::new(format!("id{i}"), text, toks.clone());
                if masked {
                    c.with_mask(vec![toks.len() as u32])
                } else {
                    c
                }
            })
            .collect();
        CandidatePool::new(cands, "prop-tok", true).unwrap()
    })
}

proptest! {
    #[test]
    fn probabilities_form_a_distribution(f in frame(), p in pool(), m in method()) {
        let s = score_pool(&f, &p, m, false).unwrap();
        let total: f64 = s.probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(s.probabilities.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert_eq!(s.probabilities.len(), p.len());
    }

    #[test]
    fn permuting_the_pool_permutes_the_scores(f in frame(), p in pool(), m in method(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = CandidatePool::new(order.iter().map(|&i| p.candidates()[i].clone()).collect(), "prop-tok", true).unwrap();
        let a = score_pool(&f, &p, m, false).unwrap();
        let b = score_pool(&f, &shuffled, m, false).unwrap();
        for (new, &old) in order.iter().enumerate() {
            prop_assert_eq!(a.aggregates[old], b.aggregates[new]);
            prop_assert!((a.probabilities[old] - b.probabilities[new]).abs() < 1e-12);
        }
    }

    #[test]
    fn top_k_is_sorted_and_bounded(f in frame(), p in pool(), m in method(), k in 1usize..40) {
        let s = score_pool(&f, &p, m, false).unwrap();
        let r = top_k(&s, &p, k).unwrap();
        prop_assert_eq!(r.entries.len(), k.min(p.len()));
        for w in r.entries.windows(2) {
            prop_assert!(w[0].probability > w[1].probability
                || (w[0].probability == w[1].probability && w[0].ordinal < w[1].ordinal));
        }
        prop_assert_eq!(Some(r.entries[0].ordinal), s.argmax());
    }

    #[test]
    fn masked_scoring_uses_only_masked_positions(f in frame(), p in pool()) {
        // every mask here selects the last token
        let masked = score_pool(&f, &p, Method::Average, true);
        let all_masked = p.candidates().iter().all(|c| c.mask.is_some());
        if all_masked {
            let last = score_pool(&f, &p, Method::Last, false).unwrap();
            prop_assert_eq!(masked.unwrap().aggregates, last.aggregates);
        } else {
            prop_assert!(masked.is_err());
        }
    }

    #[test]
    fn pool_file_round_trip(p in pool()) {
        let mut bytes = Vec::new();
        write_pool(&p, &mut bytes).unwrap();
        let back = parse_pool(std::str::from_utf8(&bytes).unwrap()).unwrap();
        prop_assert_eq!(&back, &p);
        let mut again = Vec::new();
        write_pool(&back, &mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn lgts_round_trip(values in prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 1..300), step in any::<u32>()) {
        let f = LogitFrame::new(step, values).unwrap();
        let bytes = lgts::encode(&f);
        let back = lgts::decode(&bytes).unwrap();
        prop_assert_eq!(back.values(), f.values());
        prop_assert_eq!(back.step(), step);
        prop_assert_eq!(lgts::encode(&back), bytes);
    }

    #[test]
    fn readable_frame_round_trip(f in frame()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        write_readable_frame(&f, &path).unwrap();
        let back = read_frame(&path).unwrap();
        prop_assert_eq!(back.values(), f.values());
        prop_assert_eq!(back.step(), f.step());
    }

    #[test]
    fn method_names_round_trip(m in method(), k in 1usize..100) {
        for m in [m, Method::KthToken(k)] {
            prop_assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn explicit_answer_head_is_extracted(n in 2usize..8, pick in 0usize..8, filler in "[a-z]{3,10}") {
        let pick = pick % n;
        let cands = (0..n)
            .map(|i| Candidate::new(((b'A' + i as u8) as char).to_string(), format!("{filler}{i}"), vec![i as u32]))
            .collect();
        let p = CandidatePool::new(cands, "t", true).unwrap();
        let scheme = HeadScheme::alphabetic(n).unwrap();
        let head = ((b'A' + pick as u8) as char).to_string();
        let output = format!("Let me think. Answer: ({head})");
        prop_assert_eq!(extract_choice(&output, &p, &scheme), Some(head.as_str()));
    }
}
