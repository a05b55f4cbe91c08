//! Vocabulary and short-list construction, token mapping, and n-gram
//! training-example extraction.
//!
//! A [`Vocabulary`] is a frequency-ranked token table with four special tokens
//! reserved at fixed indices 0..4 (`<s>`, `</s>`, `<unk>`, `<oos>`) followed by
//! corpus tokens in descending frequency (ties broken lexicographically
//! ascending). The short-list is the first `shortlist_size` ids, specials
//! included; targets outside it are mapped to the `<oos>` unit when extracting
//! training examples.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Id of the begin-of-sentence token `<s>`.
pub const BOS_ID: u32 = 0;
/// Id of the end-of-sentence token `</s>`.
pub const EOS_ID: u32 = 1;
/// Id of the unknown-word token `<unk>`.
pub const UNK_ID: u32 = 2;
/// Id of the out-of-shortlist token `<oos>`.
pub const OOS_ID: u32 = 3;
/// Number of reserved special tokens.
pub const NUM_SPECIALS: usize = 4;
/// The special token strings, in id order.
pub const SPECIAL_TOKENS: [&str; NUM_SPECIALS] = ["<s>", "</s>", "<unk>", "<oos>"];

/// Frequency-ranked token table with a short-list boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    freqs: Vec<u64>,
    index: HashMap<String, u32>,
    shortlist_size: usize,
}

/// One n-gram training example: n−1 context ids predicting one target id.
///
/// Context ids range over the full vocabulary; the target is always inside the
/// short-list (out-of-shortlist targets are replaced by [`OOS_ID`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramExample {
    pub context: Vec<u32>,
    pub target: u32,
}

/// Corpus-level statistics relative to a vocabulary's short-list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub sentences: u64,
    pub tokens: u64,
    /// Fraction of running tokens whose literal type is in the short-list.
    pub coverage: f64,
}

impl Vocabulary {
    /// Builds a vocabulary from tokenized sentences (one sentence per item,
    /// tokens separated by whitespace).
    ///
    /// `max_vocab` caps the total vocabulary size and `shortlist_size` sets the
    /// short-list boundary; both counts include the four specials. A
    /// `shortlist_size` larger than the final vocabulary is clamped down to it.
    pub fn build<I, S>(sentences: I, max_vocab: usize, shortlist_size: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if shortlist_size < NUM_SPECIALS {
            return Err(Error::ShortlistTooSmall(shortlist_size));
        }
        if max_vocab < NUM_SPECIALS {
            return Err(Error::MaxVocabTooSmall(max_vocab));
        }
        if shortlist_size > max_vocab {
            return Err(Error::ShortlistExceedsMax {
                shortlist: shortlist_size,
                max_vocab,
            });
        }

        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total_tokens = 0u64;
        for sentence in sentences {
            for token in sentence.as_ref().split_whitespace() {
                total_tokens += 1;
                *counts.entry(token.to_owned()).or_insert(0) += 1;
            }
        }
        if total_tokens == 0 {
            return Err(Error::EmptyCorpus);
        }

        // Tokens spelled like a special map to the special id; they never enter
        // the ranked tail, which keeps the token->id mapping a bijection.
        let mut ranked: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(t, _)| !SPECIAL_TOKENS.contains(&t.as_str()))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_vocab - NUM_SPECIALS);

        let mut tokens: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        let mut freqs: Vec<u64> = vec![0; NUM_SPECIALS];
        for (token, freq) in ranked {
            tokens.push(token);
            freqs.push(freq);
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let shortlist_size = shortlist_size.min(tokens.len());
        Ok(Self {
            tokens,
            freqs,
            index,
            shortlist_size,
        })
    }

    /// Total number of stored tokens, specials included.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the four specials are always present
    }

    /// Short-list size K: ids `0..K` are handled by the softmax output layer.
    pub fn shortlist_size(&self) -> usize {
        self.shortlist_size
    }

    /// Id of a token string, if stored.
    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Token string for an id, if in range.
    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(|s| s.as_str())
    }

    /// Corpus frequency recorded for an id (0 for specials).
    pub fn frequency(&self, id: u32) -> Option<u64> {
        self.freqs.get(id as usize).copied()
    }

    /// Whether an id falls inside the short-list.
    pub fn in_shortlist(&self, id: u32) -> bool {
        (id as usize) < self.shortlist_size
    }

    /// Maps token strings to ids; unknown types map to `<unk>`. Total function.
    pub fn map_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| self.id(t.as_ref()).unwrap_or(UNK_ID))
            .collect()
    }

    /// Maps one whitespace-tokenized sentence to ids.
    pub fn map_line(&self, line: &str) -> Vec<u32> {
        line.split_whitespace()
            .map(|t| self.id(t).unwrap_or(UNK_ID))
            .collect()
    }

    /// Computes sentence/token counts and short-list coverage of a corpus.
    ///
    /// Coverage counts literal corpus tokens only: a token is covered iff its
    /// type is stored with an id inside the short-list. Unknown types are not
    /// covered (even though they map to `<unk>`), and the implicit `</s>`
    /// target is not a running token.
    pub fn coverage<I, S>(&self, sentences: I) -> Result<CorpusStats>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut stats = CorpusStats {
            sentences: 0,
            tokens: 0,
            coverage: 0.0,
        };
        let mut covered = 0u64;
        for sentence in sentences {
            stats.sentences += 1;
            for token in sentence.as_ref().split_whitespace() {
                stats.tokens += 1;
                if self.id(token).is_some_and(|id| self.in_shortlist(id)) {
                    covered += 1;
                }
            }
        }
        if stats.tokens == 0 {
            return Err(Error::EmptyCorpus);
        }
        stats.coverage = covered as f64 / stats.tokens as f64;
        Ok(stats)
    }

    /// Serializes as one line per token: `<rank> <token> <frequency>`,
    /// specials first with frequency 0.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, (token, freq)) in self.tokens.iter().zip(&self.freqs).enumerate() {
            let _ = writeln!(out, "{i} {token} {freq}");
        }
        out
    }

    /// Writes the vocabulary file format (see [`Vocabulary::to_file_string`]).
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    /// Parses the vocabulary file format. The file does not carry the
    /// short-list boundary, so it is supplied by the caller (clamped to the
    /// vocabulary size, as in [`Vocabulary::build`]).
    pub fn from_file_string(contents: &str, shortlist_size: usize) -> Result<Self> {
        if shortlist_size < NUM_SPECIALS {
            return Err(Error::ShortlistTooSmall(shortlist_size));
        }
        let mut tokens = Vec::new();
        let mut freqs = Vec::new();
        for (lineno, line) in contents.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (rank, token, freq) = match (parts.next(), parts.next(), parts.next(), parts.next())
            {
                (Some(r), Some(t), Some(f), None) => (r, t, f),
                _ => {
                    return Err(Error::VocabParse {
                        line: lineno + 1,
                        msg: "expected `<rank> <token> <frequency>`".into(),
                    })
                }
            };
            let rank: usize = rank.parse().map_err(|_| Error::VocabParse {
                line: lineno + 1,
                msg: format!("bad rank {rank:?}"),
            })?;
            if rank != tokens.len() {
                return Err(Error::VocabParse {
                    line: lineno + 1,
                    msg: format!("rank {rank} out of order, expected {}", tokens.len()),
                });
            }
            let freq: u64 = freq.parse().map_err(|_| Error::VocabParse {
                line: lineno + 1,
                msg: format!("bad frequency {freq:?}"),
            })?;
            tokens.push(token.to_string());
            freqs.push(freq);
        }
        if tokens.len() < NUM_SPECIALS || tokens[..NUM_SPECIALS] != SPECIAL_TOKENS.map(String::from)
        {
            return Err(Error::VocabParse {
                line: 1,
                msg: "file must begin with the four special tokens".into(),
            });
        }
        for w in freqs[NUM_SPECIALS..].windows(2) {
            if w[0] < w[1] {
                return Err(Error::VocabParse {
                    line: 1,
                    msg: "frequencies must be non-increasing".into(),
                });
            }
        }
        let index: HashMap<String, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if index.len() != tokens.len() {
            return Err(Error::VocabParse {
                line: 1,
                msg: "duplicate token".into(),
            });
        }
        let shortlist_size = shortlist_size.min(tokens.len());
        Ok(Self {
            tokens,
            freqs,
            index,
            shortlist_size,
        })
    }

    /// Reads a vocabulary file written by [`Vocabulary::save`].
    pub fn load(path: &Path, shortlist_size: usize) -> Result<Self> {
        let contents = std::fs::read_to_string(path)?;
        Self::from_file_string(&contents, shortlist_size)
    }
}

/// Extracts the n-gram training examples of one sentence.
///
/// For a sentence of T token ids this yields exactly T+1 examples: one per
/// position predicting `ids[t]`, plus a final example predicting `</s>`.
/// Contexts are left-padded with repeated `<s>`; targets outside the
/// short-list are replaced by `<oos>`.
pub fn extract_ngrams(ids: &[u32], order: usize, shortlist_size: usize) -> Vec<NGramExample> {
    assert!(order >= 2, "n-gram order must be at least 2");
    let n_ctx = order - 1;
    let k = shortlist_size as u32;
    let mut examples = Vec::with_capacity(ids.len() + 1);
    for t in 0..=ids.len() {
        let mut context = Vec::with_capacity(n_ctx);
        for j in 0..n_ctx {
            // Position of the context word that is n_ctx - j steps before t.
            let steps_back = n_ctx - j;
            if t >= steps_back {
                context.push(ids[t - steps_back]);
            } else {
                context.push(BOS_ID);
            }
        }
        let raw_target = if t < ids.len() { ids[t] } else { EOS_ID };
        let target = if raw_target < k { raw_target } else { OOS_ID };
        examples.push(NGramExample { context, target });
    }
    examples
}

/// Maps a whole corpus (one tokenized sentence per item) to training examples.
pub fn corpus_to_examples<I, S>(sentences: I, vocab: &Vocabulary, order: usize) -> Vec<NGramExample>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut examples = Vec::new();
    for sentence in sentences {
        let ids = vocab.map_line(sentence.as_ref());
        if ids.is_empty() {
            continue;
        }
        examples.extend(extract_ngrams(&ids, order, vocab.shortlist_size()));
    }
    examples
}
