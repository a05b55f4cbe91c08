//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// All library errors. Variants are grouped by subsystem; model-file loading
/// deliberately distinguishes four failure classes (format/version, truncation,
/// dimension inconsistency, checksum) so callers can react to each.
#[derive(Debug, Error)]
pub enum Error {
    // --- corpus / vocabulary ---
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("shortlist size {0} is too small: the four special tokens must fit")]
    ShortlistTooSmall(usize),
    #[error("shortlist size {shortlist} exceeds max vocabulary size {max_vocab}")]
    ShortlistExceedsMax { shortlist: usize, max_vocab: usize },
    #[error("max vocabulary size {0} is too small: the four special tokens must fit")]
    MaxVocabTooSmall(usize),
    #[error("malformed vocabulary file at line {line}: {msg}")]
    VocabParse { line: usize, msg: String },

    // --- network configuration / shapes ---
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("target id {target} is outside the shortlist range 0..{shortlist}")]
    TargetOutOfRange { target: u32, shortlist: u32 },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("example stream is empty")]
    EmptyExamples,
    #[error("learning rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("invalid learning-rate schedule: {0}")]
    InvalidSchedule(String),
    #[error("every example's target is out-of-shortlist; perplexity is undefined")]
    AllTargetsOos,

    // --- model file format ---
    #[error("not a model file or unsupported version: {0}")]
    FormatVersion(String),
    #[error("model file is truncated: {0}")]
    Truncated(String),
    #[error("model file dimensions are inconsistent: {0}")]
    InvalidDimensions(String),
    #[error("model file checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    // --- adaptation ---
    #[error("adaptation share must lie strictly between 0 and 1, got {0}")]
    InvalidShare(f64),
    #[error("adaptation example set is empty")]
    EmptyAdaptationSet,
    #[error("generic example pool is empty")]
    EmptyGenericPool,
    #[error("day schedule needs at least one day")]
    NoDays,
    #[error("day {0} has an empty corpus")]
    EmptyDay(usize),
    #[error("adaptation layer insertion point {position} is not square: expected width {expected}, got {got}")]
    NonSquareInsertion {
        position: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid adaptation layer position {position}: model has {layers} insertion points")]
    InvalidLayerPosition { position: usize, layers: usize },
    #[error("adaptation layer activation must be linear or tanh")]
    InvalidAdaptActivation,

    // --- rescoring ---
    #[error("malformed n-best line {line}: {msg}")]
    NBestParse { line: usize, msg: String },
    #[error("feature weight vector has {got} entries but hypotheses carry {expected} features")]
    WeightDimensionMismatch { expected: usize, got: usize },
    #[error("feature weights are invalid: {0}")]
    InvalidWeights(String),
    #[error("candidate and reference corpora differ in length: {candidates} vs {references}")]
    BleuLengthMismatch {
        candidates: usize,
        references: usize,
    },
    #[error("BLEU needs a non-empty candidate corpus")]
    EmptyBleuCorpus,
    #[error("sentence {0} has no reference")]
    MissingReference(usize),
    #[error("tuning needs a non-empty development list")]
    EmptyDevSet,

    // --- io ---
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
