//! Corpus-level BLEU: geometric mean of clipped n-gram precisions (orders
//! 1..=4) times a brevity penalty, with multi-reference clipping and additive
//! per-sentence statistics.

use std::collections::HashMap;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};

/// Highest n-gram order entering the score.
pub const MAX_ORDER: usize = 4;

/// Clipped n-gram match counts and length statistics. Additive: summing the
/// stats of two corpora gives the stats of their concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BleuStats {
    /// Per order 1..=4: clipped matches against the references.
    pub matches: [u64; MAX_ORDER],
    /// Per order 1..=4: total candidate n-grams.
    pub totals: [u64; MAX_ORDER],
    /// Total candidate length in tokens.
    pub candidate_len: u64,
    /// Effective reference length: per sentence, the reference length closest
    /// to the candidate's (ties broken towards the shorter reference).
    pub reference_len: u64,
}

impl Add for BleuStats {
    type Output = BleuStats;
    fn add(mut self, rhs: BleuStats) -> BleuStats {
        self += rhs;
        self
    }
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.totals[n] += rhs.totals[n];
        }
        self.candidate_len += rhs.candidate_len;
        self.reference_len += rhs.reference_len;
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

impl BleuStats {
    /// Statistics of one candidate sentence against its reference set.
    /// Clipping takes, per n-gram, the maximum count over all references.
    pub fn from_sentence<S: AsRef<str>, R: AsRef<str>>(
        candidate: &[S],
        references: &[Vec<R>],
    ) -> BleuStats {
        let mut stats = BleuStats {
            candidate_len: candidate.len() as u64,
            ..BleuStats::default()
        };

        let c = candidate.len() as i64;
        let mut best: Option<(i64, u64)> = None; // (|len − c|, len)
        for reference in references {
            let len = reference.len() as u64;
            let diff = (len as i64 - c).abs();
            best = match best {
                None => Some((diff, len)),
                Some((bd, bl)) if diff < bd || (diff == bd && len < bl) => Some((diff, len)),
                keep => keep,
            };
        }
        stats.reference_len = best.map_or(0, |(_, len)| len);

        for n in 1..=MAX_ORDER {
            let cand_counts = ngram_counts(candidate, n);
            if cand_counts.is_empty() {
                continue;
            }
            let mut max_ref_counts: HashMap<Vec<&str>, u64> = HashMap::new();
            for reference in references {
                for (gram, count) in ngram_counts(reference, n) {
                    let entry = max_ref_counts.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, &count) in &cand_counts {
                stats.totals[n - 1] += count;
                if let Some(&ref_count) = max_ref_counts.get(gram) {
                    stats.matches[n - 1] += count.min(ref_count);
                }
            }
        }
        stats
    }
}

/// A scored BLEU result with its components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuReport {
    /// BLEU in [0, 1].
    pub score: f64,
    /// Clipped precisions per order 1..=4.
    pub precisions: [f64; MAX_ORDER],
    /// Brevity penalty exp(min(0, 1 − r/c)).
    pub brevity_penalty: f64,
    pub candidate_len: u64,
    pub reference_len: u64,
}

impl BleuReport {
    /// Tab-separated report: BLEU, per-order precisions, BP, lengths.
    pub fn to_tsv(&self) -> String {
        format!(
            "bleu\tp1\tp2\tp3\tp4\tbp\tcand_len\tref_len\n{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\n",
            self.score,
            self.precisions[0],
            self.precisions[1],
            self.precisions[2],
            self.precisions[3],
            self.brevity_penalty,
            self.candidate_len,
            self.reference_len,
        )
    }
}

/// Scores accumulated statistics. Unsmoothed by default (any zero match count
/// gives BLEU 0); `smoothed` applies add-one smoothing to orders ≥ 2 for
/// sentence-level diagnostics.
pub fn score_from_stats(stats: &BleuStats, smoothed: bool) -> BleuReport {
    let mut precisions = [0.0f64; MAX_ORDER];
    for (n, p) in precisions.iter_mut().enumerate() {
        let (m, t) = (stats.matches[n], stats.totals[n]);
        *p = if smoothed && n >= 1 {
            (m + 1) as f64 / (t + 1) as f64
        } else if t > 0 {
            m as f64 / t as f64
        } else {
            0.0
        };
    }
    let brevity_penalty = if stats.candidate_len == 0 {
        0.0
    } else {
        let ratio = stats.reference_len as f64 / stats.candidate_len as f64;
        (1.0 - ratio).min(0.0).exp()
    };
    let score = if precisions.iter().any(|&p| p <= 0.0) {
        0.0
    } else {
        let mean_log: f64 = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        brevity_penalty * mean_log.exp()
    };
    BleuReport {
        score,
        precisions,
        brevity_penalty,
        candidate_len: stats.candidate_len,
        reference_len: stats.reference_len,
    }
}

/// Accumulates corpus statistics for aligned candidate/reference corpora.
/// Every sentence needs at least one reference.
pub fn corpus_stats<S: AsRef<str>, R: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<Vec<R>>],
) -> Result<BleuStats> {
    if candidates.len() != references.len() {
        return Err(Error::BleuLengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(Error::EmptyBleuCorpus);
    }
    let mut stats = BleuStats::default();
    for (i, (candidate, refs)) in candidates.iter().zip(references).enumerate() {
        if refs.is_empty() {
            return Err(Error::MissingReference(i));
        }
        stats += BleuStats::from_sentence(candidate, refs);
    }
    Ok(stats)
}

/// Corpus BLEU of candidates against one or more references per sentence.
pub fn bleu<S: AsRef<str>, R: AsRef<str>>(
    candidates: &[Vec<S>],
    references: &[Vec<Vec<R>>],
    smoothed: bool,
) -> Result<(BleuReport, BleuStats)> {
    let stats = corpus_stats(candidates, references)?;
    Ok((score_from_stats(&stats, smoothed), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identical_corpus_scores_one() {
        let cands = vec![
            toks("the quick brown fox jumps"),
            toks("hello world here now"),
        ];
        let refs: Vec<Vec<Vec<String>>> = cands.iter().map(|c| vec![c.clone()]).collect();
        let (report, _) = bleu(&cands, &refs, false).unwrap();
        assert_eq!(report.score, 1.0);
        assert_eq!(report.brevity_penalty, 1.0);
        assert_eq!(report.precisions, [1.0; 4]);
    }

    #[test]
    fn cat_sat_hand_case() {
        let cands = vec![toks("the cat sat on the mat")];
        let refs = vec![vec![toks("the cat is on the mat")]];
        let (report, stats) = bleu(&cands, &refs, false).unwrap();
        assert_eq!(stats.matches, [5, 3, 1, 0]);
        assert_eq!(stats.totals, [6, 5, 4, 3]);
        assert!((report.precisions[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((report.precisions[1] - 3.0 / 5.0).abs() < 1e-12);
        assert!((report.precisions[2] - 1.0 / 4.0).abs() < 1e-12);
        assert_eq!(report.precisions[3], 0.0);
        assert_eq!(report.score, 0.0, "zero 4-gram matches → unsmoothed BLEU 0");
    }

    #[test]
    fn smoothing_rescues_zero_higher_orders() {
        let cands = vec![toks("the cat sat on the mat")];
        let refs = vec![vec![toks("the cat is on the mat")]];
        let (report, _) = bleu(&cands, &refs, true).unwrap();
        assert!(report.score > 0.0);
        // Order 1 stays unsmoothed.
        assert!((report.precisions[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((report.precisions[3] - 1.0 / 4.0).abs() < 1e-12); // (0+1)/(3+1)
    }

    #[test]
    fn brevity_penalty_half_length() {
        // Candidate = first half of the reference: perfect precisions,
        // BP = exp(1 − 2) = e⁻¹.
        let reference = toks("a b c d e f g h");
        let candidate = toks("a b c d");
        let (report, _) = bleu(&[candidate], &[vec![reference]], false).unwrap();
        assert!((report.brevity_penalty - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(report.precisions, [1.0; 4]);
        assert!((report.score - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn multi_reference_clipping_takes_max() {
        let cands = vec![toks("the the the")];
        let refs = vec![vec![toks("the cat"), toks("the the")]];
        let (report, stats) = bleu(&cands, &refs, false).unwrap();
        assert_eq!(stats.matches[0], 2);
        assert_eq!(stats.totals[0], 3);
        assert!((report.precisions[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn effective_reference_length_ties_go_shorter() {
        let cands = vec![toks("a b c")];
        let refs = vec![vec![toks("a b"), toks("a b c d")]];
        let (_, stats) = bleu(&cands, &refs, false).unwrap();
        assert_eq!(stats.reference_len, 2);
    }

    #[test]
    fn stats_are_additive_over_random_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let words = ["a", "b", "c", "d", "e"];
        let sentence = |rng: &mut ChaCha8Rng| -> Vec<String> {
            (0..rng.random_range(1..10))
                .map(|_| words[rng.random_range(0..words.len())].to_string())
                .collect()
        };
        for _ in 0..20 {
            let n = rng.random_range(2..12);
            let cands: Vec<Vec<String>> = (0..n).map(|_| sentence(&mut rng)).collect();
            let refs: Vec<Vec<Vec<String>>> = (0..n)
                .map(|_| vec![sentence(&mut rng), sentence(&mut rng)])
                .collect();
            let whole = corpus_stats(&cands, &refs).unwrap();
            let split = rng.random_range(1..n);
            let left = corpus_stats(&cands[..split], &refs[..split]).unwrap();
            let right = corpus_stats(&cands[split..], &refs[split..]).unwrap();
            assert_eq!(whole, left + right);
            assert_eq!(
                score_from_stats(&whole, false),
                score_from_stats(&(left + right), false)
            );
        }
    }

    #[test]
    fn error_cases() {
        let cands = vec![toks("a b")];
        assert!(matches!(
            bleu(&cands, &Vec::<Vec<Vec<String>>>::new(), false),
            Err(Error::BleuLengthMismatch { .. })
        ));
        assert!(matches!(
            bleu(
                &Vec::<Vec<String>>::new(),
                &Vec::<Vec<Vec<String>>>::new(),
                false
            ),
            Err(Error::EmptyBleuCorpus)
        ));
        let no_refs: Vec<Vec<Vec<String>>> = vec![vec![]];
        assert!(matches!(
            bleu(&cands, &no_refs, false),
            Err(Error::MissingReference(0))
        ));
    }

    #[test]
    fn score_is_bounded() {
        let cands = vec![toks("x y z w"), toks("a a a a a")];
        let refs = vec![vec![toks("x y z w")], vec![toks("b b b")]];
        let (report, _) = bleu(&cands, &refs, false).unwrap();
        assert!((0.0..=1.0).contains(&report.score));
        let (smoothed, _) = bleu(&cands, &refs, true).unwrap();
        assert!((0.0..=1.0).contains(&smoothed.score));
    }
}
