use std::collections::HashSet;

use crate::types::Ranking;

/// `|top-k ∩ gold| / |gold|` over the first `k` ranking entries.
///
/// When `|gold| > k` the value can never reach 1; it is deliberately not
/// re-normalized.
pub fn recall_at_k(ranking: &Ranking, gold: &[String], k: usize) -> f64 {
    if gold.is_empty() {
        return 0.0;
    }
    let gold: HashSet<&str> = gold.iter().map(String::as_str).collect();
    let hits = ranking.ids().take(k).filter(|id| gold.contains(id)).count();
    hits as f64 / gold.len() as f64
}

/// 1.0 when the top-ranked candidate is the single gold answer.
pub fn top1_correct(ranking: &Ranking, gold: &str) -> f64 {
    match ranking.best() {
        Some(best) if best.id == gold => 1.0,
        _ => 0.0,
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RankedCandidate;

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

    fn gold(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn partial_and_full_recall() {
        let r = ranking(&["a", "x", "y"]);
        assert_eq!(recall_at_k(&r, &gold(&["a", "b"]), 20), 0.5);
        assert_eq!(recall_at_k(&r, &gold(&["a", "y"]), 20), 1.0);
        assert_eq!(recall_at_k(&r, &gold(&["a", "y"]), 1), 0.5);
        assert_eq!(top1_correct(&r, "a"), 1.0);
        assert_eq!(top1_correct(&r, "x"), 0.0);
    }

    #[test]
    fn mean_and_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }
}
