//! N-best-list rescoring: parsing Moses-style lists, appending a neural LM
//! score as an extra feature, log-linear reranking, and coordinate-ascent
//! weight tuning against corpus BLEU.

pub mod bleu;

pub use bleu::{bleu as corpus_bleu, corpus_stats, score_from_stats, BleuReport, BleuStats};

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nnlm::Model;
use crate::vocab::{extract_ngrams, Vocabulary};

/// Hard cap on hypotheses per source sentence.
pub const MAX_HYPOTHESES_PER_SOURCE: usize = 1000;

/// One translation hypothesis from an n-best list.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// 0-based source sentence id (first field of the line).
    pub source_id: usize,
    /// Target tokens; may be empty.
    pub tokens: Vec<String>,
    /// Flattened feature values, in first-appearance order of feature names.
    pub features: Vec<f64>,
    /// Decoder score from the optional fourth field.
    pub score: Option<f64>,
}

/// All hypotheses for one source sentence, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct NBestGroup {
    pub source_id: usize,
    pub hypotheses: Vec<Hypothesis>,
}

/// A parsed n-best list: one group per source sentence, ids non-decreasing
/// in the file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NBestList {
    pub groups: Vec<NBestGroup>,
}

fn parse_features(field: &str, line: usize) -> Result<Vec<f64>> {
    // Values may be interleaved with `name:` labels; the flattened order is
    // first appearance of each name, with unlabeled leading values forming an
    // anonymous first block.
    let mut blocks: Vec<(String, Vec<f64>)> = Vec::new();
    let mut current: Option<usize> = None;
    for raw in field.split_whitespace() {
        if raw.ends_with(':') && raw.len() > 1 && raw.parse::<f64>().is_err() {
            let name = &raw[..raw.len() - 1];
            current = Some(match blocks.iter().position(|(n, _)| n == name) {
                Some(idx) => idx,
                None => {
                    blocks.push((name.to_string(), Vec::new()));
                    blocks.len() - 1
                }
            });
        } else {
            let value: f64 = raw.parse().map_err(|_| Error::NBestParse {
                line,
                msg: format!("invalid feature value `{raw}`"),
            })?;
            let idx = match current {
                Some(idx) => idx,
                None => {
                    blocks.insert(0, (String::new(), Vec::new()));
                    current = Some(0);
                    0
                }
            };
            blocks[idx].1.push(value);
        }
    }
    Ok(blocks.into_iter().flat_map(|(_, vs)| vs).collect())
}

impl NBestList {
    /// Parses ` ||| `-separated n-best text. Empty input gives an empty list.
    pub fn parse(text: &str) -> Result<NBestList> {
        let mut list = NBestList::default();
        let mut feature_dim: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = raw.split(" ||| ").collect();
            if parts.len() != 3 && parts.len() != 4 {
                return Err(Error::NBestParse {
                    line,
                    msg: format!(
                        "expected 3 or 4 ` ||| `-separated fields, found {}",
                        parts.len()
                    ),
                });
            }
            let source_id: usize = parts[0].trim().parse().map_err(|_| Error::NBestParse {
                line,
                msg: format!("invalid source id `{}`", parts[0].trim()),
            })?;
            let tokens: Vec<String> = parts[1].split_whitespace().map(str::to_string).collect();
            let features = parse_features(parts[2], line)?;
            match feature_dim {
                None => feature_dim = Some(features.len()),
                Some(dim) if dim != features.len() => {
                    return Err(Error::NBestParse {
                        line,
                        msg: format!(
                            "feature count {} disagrees with earlier count {dim}",
                            features.len()
                        ),
                    });
                }
                _ => {}
            }
            let score = match parts.get(3) {
                Some(s) => Some(s.trim().parse::<f64>().map_err(|_| Error::NBestParse {
                    line,
                    msg: format!("invalid score `{}`", s.trim()),
                })?),
                None => None,
            };
            let hyp = Hypothesis {
                source_id,
                tokens,
                features,
                score,
            };
            match list.groups.last_mut() {
                Some(group) if group.source_id == source_id => {
                    if group.hypotheses.len() >= MAX_HYPOTHESES_PER_SOURCE {
                        return Err(Error::NBestParse {
                            line,
                            msg: format!(
                                "more than {MAX_HYPOTHESES_PER_SOURCE} hypotheses for source {source_id}"
                            ),
                        });
                    }
                    group.hypotheses.push(hyp);
                }
                Some(group) if group.source_id > source_id => {
                    return Err(Error::NBestParse {
                        line,
                        msg: format!(
                            "source id {source_id} after {}: ids must be non-decreasing",
                            group.source_id
                        ),
                    });
                }
                _ => list.groups.push(NBestGroup {
                    source_id,
                    hypotheses: vec![hyp],
                }),
            }
        }
        Ok(list)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<NBestList> {
        NBestList::parse(&fs::read_to_string(path)?)
    }

    /// Feature dimensionality, or `None` for an empty list.
    pub fn num_features(&self) -> Option<usize> {
        self.groups
            .first()
            .and_then(|g| g.hypotheses.first())
            .map(|h| h.features.len())
    }

    /// Total hypothesis count across all groups.
    pub fn num_hypotheses(&self) -> usize {
        self.groups.iter().map(|g| g.hypotheses.len()).sum()
    }

    /// Serializes back to n-best text (features unlabeled, in flattened order).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for group in &self.groups {
            for hyp in &group.hypotheses {
                let feats: Vec<String> = hyp.features.iter().map(|v| format!("{v}")).collect();
                out.push_str(&format!(
                    "{} ||| {} ||| {}",
                    hyp.source_id,
                    hyp.tokens.join(" "),
                    feats.join(" ")
                ));
                if let Some(score) = hyp.score {
                    out.push_str(&format!(" ||| {score}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Total model log-probability of a token sequence: the sum of per-position
/// log-probabilities over all positions including the end-of-sentence one.
/// Out-of-short-list targets are scored through the `<oos>` unit, so every
/// hypothesis gets a finite score.
pub fn sentence_logprob(model: &Model, vocab: &Vocabulary, tokens: &[String]) -> Result<f64> {
    let ids = vocab.map_tokens(tokens);
    let examples = extract_ngrams(&ids, model.order(), vocab.shortlist_size());
    let probs = model.forward_examples(&examples)?;
    let mut total = 0.0;
    for (row, example) in probs.rows().into_iter().zip(&examples) {
        total += row[example.target as usize].max(f64::MIN_POSITIVE).ln();
    }
    Ok(total)
}

fn check_model_vocab(model: &Model, vocab: &Vocabulary) -> Result<()> {
    if vocab.len() != model.config.vocab_size || vocab.shortlist_size() != model.shortlist_size() {
        return Err(Error::DimensionMismatch(format!(
            "vocabulary ({} tokens, short list {}) does not match model ({} tokens, short list {})",
            vocab.len(),
            vocab.shortlist_size(),
            model.config.vocab_size,
            model.shortlist_size()
        )));
    }
    Ok(())
}

/// Returns a copy of the list with the model's sentence log-probability
/// appended as one extra feature on every hypothesis.
pub fn add_model_feature(list: &NBestList, model: &Model, vocab: &Vocabulary) -> Result<NBestList> {
    check_model_vocab(model, vocab)?;
    let mut out = list.clone();
    for group in &mut out.groups {
        for hyp in &mut group.hypotheses {
            let lp = sentence_logprob(model, vocab, &hyp.tokens)?;
            hyp.features.push(lp);
        }
    }
    Ok(out)
}

/// Log-linear feature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWeights(pub Vec<f64>);

impl FeatureWeights {
    /// Validates: non-empty, all finite, not all zero.
    pub fn new(weights: Vec<f64>) -> Result<FeatureWeights> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("non-finite weight {w}")));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        Ok(FeatureWeights(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses one weight per line; blank lines ignored.
    pub fn parse(text: &str) -> Result<FeatureWeights> {
        let mut weights = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            weights.push(line.parse::<f64>().map_err(|_| Error::NBestParse {
                line: idx + 1,
                msg: format!("invalid weight `{line}`"),
            })?);
        }
        FeatureWeights::new(weights)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<FeatureWeights> {
        FeatureWeights::parse(&fs::read_to_string(path)?)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for w in &self.0 {
            out.push_str(&format!("{w}\n"));
        }
        out
    }

    fn dot(&self, features: &[f64]) -> f64 {
        self.0.iter().zip(features).map(|(w, f)| w * f).sum()
    }
}

/// Selects, per group, the hypothesis with the highest weighted feature sum.
/// Ties keep the earliest hypothesis in file order.
pub fn rerank<'a>(list: &'a NBestList, weights: &FeatureWeights) -> Result<Vec<&'a Hypothesis>> {
    if let Some(dim) = list.num_features() {
        if dim != weights.len() {
            return Err(Error::WeightDimensionMismatch {
                expected: dim,
                got: weights.len(),
            });
        }
    }
    let mut selected = Vec::with_capacity(list.groups.len());
    for group in &list.groups {
        let mut best = &group.hypotheses[0];
        let mut best_score = weights.dot(&best.features);
        for hyp in &group.hypotheses[1..] {
            let score = weights.dot(&hyp.features);
            if score > best_score {
                best = hyp;
                best_score = score;
            }
        }
        selected.push(best);
    }
    Ok(selected)
}

/// Result of weight tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedWeights {
    pub weights: FeatureWeights,
    /// Corpus BLEU of the reranked dev output under `weights`.
    pub dev_bleu: f64,
}

const TUNE_GRID: [f64; 9] = [-2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0];
const MAX_SWEEPS: usize = 20;

/// Coordinate-ascent weight tuning on a development n-best list.
///
/// Deterministic in `seed`. Restart 0 starts from the all-ones baseline;
/// each further restart draws a start uniformly from [−1, 1]^M. Each restart
/// sweeps the coordinates in order, trying every grid value for one weight
/// while the others stay fixed, until a full sweep makes no improvement.
/// The result is never worse than the all-ones baseline on the dev set.
pub fn tune_weights(
    list: &NBestList,
    references: &[Vec<Vec<String>>],
    seed: u64,
    restarts: usize,
) -> Result<TunedWeights> {
    if list.groups.is_empty() {
        return Err(Error::EmptyDevSet);
    }
    if references.len() != list.groups.len() {
        return Err(Error::BleuLengthMismatch {
            candidates: list.groups.len(),
            references: references.len(),
        });
    }
    let dim = list.num_features().unwrap_or(0);
    if dim == 0 {
        return Err(Error::InvalidWeights("hypotheses carry no features".into()));
    }

    let evaluate = |weights: &FeatureWeights| -> Result<f64> {
        let selected = rerank(list, weights)?;
        let candidates: Vec<Vec<String>> = selected.iter().map(|h| h.tokens.clone()).collect();
        let stats = corpus_stats(&candidates, references)?;
        Ok(score_from_stats(&stats, false).score)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let baseline = vec![1.0; dim];
    let mut best_weights = baseline.clone();
    let mut best_score = evaluate(&FeatureWeights(baseline.clone()))?;

    for restart in 0..=restarts {
        let mut current = if restart == 0 {
            baseline.clone()
        } else {
            loop {
                let draw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                if draw.iter().any(|&w| w != 0.0) {
                    break draw;
                }
            }
        };
        let mut current_score = evaluate(&FeatureWeights(current.clone()))?;

        for _ in 0..MAX_SWEEPS {
            let mut improved = false;
            for m in 0..dim {
                let original = current[m];
                let mut best_value = original;
                let mut best_axis_score = current_score;
                for &value in &TUNE_GRID {
                    if value == original {
                        continue;
                    }
                    current[m] = value;
                    if current.iter().all(|&w| w == 0.0) {
                        continue;
                    }
                    let score = evaluate(&FeatureWeights(current.clone()))?;
                    if score > best_axis_score {
                        best_axis_score = score;
                        best_value = value;
                    }
                }
                current[m] = best_value;
                if best_value != original {
                    current_score = best_axis_score;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }

        if current_score > best_score {
            best_score = current_score;
            best_weights = current;
        }
    }

    Ok(TunedWeights {
        weights: FeatureWeights::new(best_weights)?,
        dev_bleu: best_score,
    })
}
