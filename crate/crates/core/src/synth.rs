//! Deterministic synthetic corpora for tests and simulations.
//!
//! Sentences are random walks over a first-order Markov chain whose
//! transition structure is fixed by a *style seed*: each word type gets a
//! small set of admissible successors drawn with a Zipf-like preference for
//! frequent words. Two chains built from different style seeds — or a chain
//! [`MarkovDomain::related`] to another with part of its transition table
//! resampled — behave like two text domains: same token inventory, different
//! statistics. All sampling is driven by explicit seeds and is
//! bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A synthetic text domain: a Markov chain over a closed word inventory.
#[derive(Debug, Clone)]
pub struct MarkovDomain {
    words: Vec<String>,
    successors: Vec<Vec<usize>>,
    start_cumulative: Vec<f64>,
}

/// Samples an index from cumulative weights (`cumulative` is the running sum
/// of the per-index weights).
fn draw_cumulative(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let total = *cumulative.last().expect("non-empty weights");
    let u = rng.random::<f64>() * total;
    cumulative
        .partition_point(|&c| c <= u)
        .min(cumulative.len() - 1)
}

fn zipf_cumulative(n: usize) -> Vec<f64> {
    let mut cumulative = Vec::with_capacity(n);
    let mut total = 0.0;
    for rank in 0..n {
        total += 1.0 / (rank as f64 + 1.0);
        cumulative.push(total);
    }
    cumulative
}

fn draw_successor_set(rng: &mut ChaCha8Rng, cumulative: &[f64], branching: usize) -> Vec<usize> {
    let mut set = Vec::with_capacity(branching);
    // Zipf-preferenced draws, deduplicated; bounded retries keep this total.
    let mut attempts = 0;
    while set.len() < branching && attempts < branching * 50 {
        let pick = draw_cumulative(rng, cumulative);
        if !set.contains(&pick) {
            set.push(pick);
        }
        attempts += 1;
    }
    let mut fallback = 0;
    while set.len() < branching {
        if !set.contains(&fallback) {
            set.push(fallback);
        }
        fallback += 1;
    }
    set
}

impl MarkovDomain {
    /// Builds a domain with `vocab_size` word types (`w000`, `w001`, …), each
    /// allowing `branching` successors. `style_seed` fixes the transition
    /// structure.
    pub fn build(vocab_size: usize, branching: usize, style_seed: u64) -> MarkovDomain {
        assert!(vocab_size >= 2, "need at least two word types");
        assert!(branching >= 1 && branching <= vocab_size);
        let mut rng = ChaCha8Rng::seed_from_u64(style_seed);
        let words = (0..vocab_size).map(|i| format!("w{i:03}")).collect();
        let start_cumulative = zipf_cumulative(vocab_size);
        let successors = (0..vocab_size)
            .map(|_| draw_successor_set(&mut rng, &start_cumulative, branching))
            .collect();
        MarkovDomain {
            words,
            successors,
            start_cumulative,
        }
    }

    /// Derives a related domain: the same word inventory, but each word's
    /// successor set is independently resampled with probability
    /// `resample_fraction`. At 0.0 the domains are identical; at 1.0 the
    /// transition structure is redrawn wholesale.
    pub fn related(&self, style_seed: u64, resample_fraction: f64) -> MarkovDomain {
        assert!((0.0..=1.0).contains(&resample_fraction));
        let mut rng = ChaCha8Rng::seed_from_u64(style_seed);
        let branching = self.successors[0].len();
        let mut out = self.clone();
        for set in &mut out.successors {
            if rng.random::<f64>() < resample_fraction {
                *set = draw_successor_set(&mut rng, &self.start_cumulative, branching);
            }
        }
        out
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    /// Samples `n` sentences of `min_len..=max_len` tokens each.
    pub fn sample(&self, n: usize, min_len: usize, max_len: usize, seed: u64) -> Vec<String> {
        assert!(min_len >= 1 && min_len <= max_len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sentences = Vec::with_capacity(n);
        for _ in 0..n {
            let len = rng.random_range(min_len..=max_len);
            let mut ids = Vec::with_capacity(len);
            let mut current = draw_cumulative(&mut rng, &self.start_cumulative);
            ids.push(current);
            for _ in 1..len {
                let set = &self.successors[current];
                current = set[rng.random_range(0..set.len())];
                ids.push(current);
            }
            let sentence: Vec<&str> = ids.iter().map(|&i| self.words[i].as_str()).collect();
            sentences.push(sentence.join(" "));
        }
        sentences
    }

    /// Samples sentences until the corpus holds at least `min_tokens` tokens.
    pub fn sample_tokens(
        &self,
        min_tokens: usize,
        min_len: usize,
        max_len: usize,
        seed: u64,
    ) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sentences = Vec::new();
        let mut tokens = 0;
        while tokens < min_tokens {
            let len = rng.random_range(min_len..=max_len);
            let mut ids = Vec::with_capacity(len);
            let mut current = draw_cumulative(&mut rng, &self.start_cumulative);
            ids.push(current);
            for _ in 1..len {
                let set = &self.successors[current];
                current = set[rng.random_range(0..set.len())];
                ids.push(current);
            }
            tokens += len;
            let sentence: Vec<&str> = ids.iter().map(|&i| self.words[i].as_str()).collect();
            sentences.push(sentence.join(" "));
        }
        sentences
    }
}

/// Total whitespace tokens in a corpus.
pub fn token_count<S: AsRef<str>>(sentences: &[S]) -> usize {
    sentences
        .iter()
        .map(|s| s.as_ref().split_whitespace().count())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sampling_is_deterministic() {
        let domain = MarkovDomain::build(100, 8, 1);
        assert_eq!(domain.sample(20, 8, 20, 7), domain.sample(20, 8, 20, 7));
        assert_ne!(domain.sample(20, 8, 20, 7), domain.sample(20, 8, 20, 8));
    }

    #[test]
    fn sentences_respect_length_bounds_and_vocabulary() {
        let domain = MarkovDomain::build(50, 5, 2);
        for sentence in domain.sample(200, 3, 9, 11) {
            let tokens: Vec<&str> = sentence.split_whitespace().collect();
            assert!((3..=9).contains(&tokens.len()));
            for t in tokens {
                let id: usize = t[1..].parse().unwrap();
                assert!(t.starts_with('w') && id < 50);
            }
        }
    }

    #[test]
    fn transitions_follow_successor_sets() {
        let domain = MarkovDomain::build(60, 4, 3);
        for sentence in domain.sample(100, 8, 16, 5) {
            let ids: Vec<usize> = sentence
                .split_whitespace()
                .map(|t| t[1..].parse().unwrap())
                .collect();
            for pair in ids.windows(2) {
                assert!(domain.successors[pair[0]].contains(&pair[1]));
            }
        }
    }

    #[test]
    fn related_domains_share_part_of_the_structure() {
        let base = MarkovDomain::build(200, 6, 10);
        let same = base.related(77, 0.0);
        assert_eq!(base.successors, same.successors);
        let half = base.related(77, 0.5);
        let changed = base
            .successors
            .iter()
            .zip(&half.successors)
            .filter(|(a, b)| a != b)
            .count();
        assert!(changed > 50 && changed < 150, "changed {changed} of 200");
        let full = base.related(77, 1.0);
        let kept = base
            .successors
            .iter()
            .zip(&full.successors)
            .filter(|(a, b)| a == b)
            .count();
        assert!(kept < 10, "kept {kept} of 200");
    }

    #[test]
    fn unigram_distribution_is_skewed() {
        let domain = MarkovDomain::build(300, 10, 4);
        let corpus = domain.sample(2000, 8, 20, 6);
        let mut counts = vec![0usize; 300];
        for sentence in &corpus {
            for t in sentence.split_whitespace() {
                counts[t[1..].parse::<usize>().unwrap()] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let mut sorted = counts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let top30: usize = sorted[..30].iter().sum();
        assert!(
            top30 as f64 > 0.4 * total as f64,
            "top-30 share {:.3}",
            top30 as f64 / total as f64
        );
    }

    #[test]
    fn sample_tokens_reaches_target() {
        let domain = MarkovDomain::build(80, 6, 9);
        let corpus = domain.sample_tokens(5000, 8, 20, 1);
        let n = token_count(&corpus);
        assert!((5000..5020).contains(&n), "tokens {n}");
    }

    #[test]
    fn different_styles_differ() {
        let a = MarkovDomain::build(150, 6, 100);
        let b = MarkovDomain::build(150, 6, 101);
        let pairs = |d: &MarkovDomain| -> HashSet<(usize, usize)> {
            d.successors
                .iter()
                .enumerate()
                .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
                .collect()
        };
        let pa = pairs(&a);
        let pb = pairs(&b);
        let shared = pa.intersection(&pb).count();
        assert!(shared < pa.len() / 2, "shared {shared} of {}", pa.len());
    }
}
