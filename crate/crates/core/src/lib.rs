//! Continuous-space language modeling toolkit.
//!
//! This crate implements a feedforward n-gram neural language model with a
//! short-list softmax, together with the surrounding machinery needed to use
//! one in a translation pipeline:
//!
//! - [`vocab`]: frequency-ranked vocabulary construction, short-list
//!   membership, coverage statistics, and n-gram training-example extraction;
//! - [`nnlm`]: the network itself — embedding projection, stacked hidden
//!   layers, softmax output — with SGD training, exponential learning-rate
//!   decay, perplexity evaluation, finite-difference gradient checking, and a
//!   checksummed binary model format;
//! - [`adapt`]: fast domain adaptation of a trained model, either by
//!   continued training on a resampled mixture of in-domain and generic data
//!   or by inserting an identity-initialized adaptation layer and updating
//!   only that layer, plus an incremental day-by-day adaptation driver;
//! - [`rescore`]: n-best-list parsing, appending the model's sentence
//!   log-probability as a rescoring feature, log-linear reranking, corpus
//!   BLEU, and coordinate-ascent weight tuning;
//! - [`synth`]: deterministic synthetic two-domain corpora used by the test
//!   suite and the day-by-day simulation command.
//!
//! All randomness flows from explicit seeds; training, sampling, and tuning
//! are bit-reproducible for a fixed seed on any platform with IEEE-754
//! doubles. Models are computed in `f64` and stored as little-endian `f32`.

pub mod adapt;
pub mod error;
pub mod nnlm;
pub mod rescore;
pub mod synth;
pub mod vocab;

pub use adapt::{
    build_day_schedule, build_resample_plan, continued_training, insert_adaptation_layer,
    sample_epoch, simulate_days, AdaptLayerSpec, AdaptMethod, AdaptReport, DayMode, DayOutcome,
    DaySchedule, EvalSets, LayerPosition, ResamplePlan,
};
pub use error::{Error, Result};
pub use nnlm::{
    init_network, load_model, max_gradient_rel_error, perplexity, save_model, train, Activation,
    EpochStats, Layer, LrSchedule, Model, NetworkConfig, PplStats, TrainStats,
};
pub use rescore::{
    add_model_feature, corpus_bleu, rerank, sentence_logprob, tune_weights, BleuReport, BleuStats,
    FeatureWeights, Hypothesis, NBestList, TunedWeights,
};
pub use vocab::{
    corpus_to_examples, extract_ngrams, CorpusStats, NGramExample, Vocabulary, BOS_ID, EOS_ID,
    NUM_SPECIALS, OOS_ID, SPECIAL_TOKENS, UNK_ID,
};
