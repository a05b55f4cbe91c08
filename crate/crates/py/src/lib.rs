//! Python bindings for the cslm toolkit.
//!
//! The module mirrors the library's sentence-level workflow: build a
//! [`Vocabulary`] from tokenized sentences, train a [`Model`], adapt it with
//! continued training or an inserted adaptation layer, evaluate perplexity,
//! and rescore n-best lists with BLEU and tuned log-linear weights. Sentences
//! are plain whitespace-tokenized strings throughout.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use cslm_core::adapt::{
    adapt_with_layer, build_resample_plan, continued_training, AdaptLayerSpec, AdaptReport,
    EvalSets, LayerPosition,
};
use cslm_core::nnlm::{
    init_network, load_model, perplexity, save_model, train, Activation, LrSchedule, NetworkConfig,
};
use cslm_core::rescore::bleu::bleu as core_bleu;
use cslm_core::rescore::{
    add_model_feature, rerank, sentence_logprob, tune_weights as core_tune_weights, FeatureWeights,
    NBestList as CoreNBestList,
};
use cslm_core::vocab::corpus_to_examples;

fn err(e: cslm_core::Error) -> PyErr {
    match e {
        cslm_core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_position(position: &str) -> PyResult<LayerPosition> {
    position
        .parse::<LayerPosition>()
        .map_err(PyValueError::new_err)
}

fn parse_activation(activation: &str) -> PyResult<Activation> {
    match activation {
        "linear" => Ok(Activation::Linear),
        "tanh" => Ok(Activation::Tanh),
        other => Err(PyValueError::new_err(format!(
            "activation must be `linear` or `tanh`, got {other:?}"
        ))),
    }
}

fn tokenize(sentence: &str) -> Vec<String> {
    sentence.split_whitespace().map(str::to_owned).collect()
}

/// Per-epoch `(epoch, epoch_size, realized_share, train_nll)` rows.
type AdaptRows = Vec<(u64, usize, f64, f64)>;

fn report_rows(report: &AdaptReport) -> AdaptRows {
    report
        .rows
        .iter()
        .map(|r| (r.epoch, r.epoch_size, r.realized_share, r.train_nll))
        .collect()
}

/// Word inventory with a frequency-ranked short list.
#[pyclass(module = "cslm", frozen)]
struct Vocabulary {
    inner: cslm_core::Vocabulary,
}

#[pymethods]
impl Vocabulary {
    /// Builds a vocabulary from tokenized sentences. `max_vocab` and
    /// `shortlist` of 0 mean "unlimited" / "everything in the short list".
    #[staticmethod]
    #[pyo3(signature = (sentences, max_vocab = 0, shortlist = 0))]
    fn build(sentences: Vec<String>, max_vocab: usize, shortlist: usize) -> PyResult<Self> {
        let max_vocab = if max_vocab == 0 {
            usize::MAX
        } else {
            max_vocab
        };
        let shortlist = if shortlist == 0 {
            usize::MAX
        } else {
            shortlist
        };
        Ok(Self {
            inner: cslm_core::Vocabulary::build(sentences.iter(), max_vocab, shortlist)
                .map_err(err)?,
        })
    }

    /// Loads a `build-vocab` file; `shortlist` bounds the short list as in `build`.
    #[staticmethod]
    #[pyo3(signature = (path, shortlist = 0))]
    fn load(path: &str, shortlist: usize) -> PyResult<Self> {
        let shortlist = if shortlist == 0 {
            usize::MAX
        } else {
            shortlist
        };
        Ok(Self {
            inner: cslm_core::Vocabulary::load(path.as_ref(), shortlist).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path.as_ref()).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn shortlist_size(&self) -> usize {
        self.inner.shortlist_size()
    }

    /// Id of a token, or None if unknown.
    fn id(&self, token: &str) -> Option<u32> {
        self.inner.id(token)
    }

    /// Token with a given id, or None if out of range.
    fn token(&self, id: u32) -> Option<String> {
        self.inner.token(id).map(str::to_owned)
    }

    /// Maps a sentence to word ids (unknown tokens become `<unk>`).
    fn map_line(&self, line: &str) -> Vec<u32> {
        self.inner.map_line(line)
    }

    /// (coverage, tokens, sentences) of a corpus under this short list.
    fn coverage(&self, sentences: Vec<String>) -> PyResult<(f64, u64, u64)> {
        let stats = self.inner.coverage(sentences.iter()).map_err(err)?;
        Ok((stats.coverage, stats.tokens, stats.sentences))
    }

    fn __repr__(&self) -> String {
        format!(
            "Vocabulary(len={}, shortlist={})",
            self.inner.len(),
            self.inner.shortlist_size()
        )
    }
}

/// Perplexity statistics: OOS targets are excluded from the mean and
/// reported as a fraction.
#[pyclass(module = "cslm", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PplStats {
    #[pyo3(get)]
    ppl: f64,
    #[pyo3(get)]
    oos_fraction: f64,
    #[pyo3(get)]
    total: usize,
    #[pyo3(get)]
    scored: usize,
}

#[pymethods]
impl PplStats {
    fn __repr__(&self) -> String {
        format!(
            "PplStats(ppl={:.4}, oos_fraction={:.4}, total={}, scored={})",
            self.ppl, self.oos_fraction, self.total, self.scored
        )
    }
}

/// A continuous-space n-gram language model.
#[pyclass(module = "cslm")]
struct Model {
    inner: cslm_core::Model,
}

#[pymethods]
impl Model {
    /// Initializes an untrained network matched to `vocab`.
    #[staticmethod]
    #[pyo3(signature = (vocab, order, projection, hidden, seed = 42, batch_size = 128))]
    fn init(
        vocab: &Vocabulary,
        order: usize,
        projection: usize,
        hidden: Vec<usize>,
        seed: u64,
        batch_size: usize,
    ) -> PyResult<Self> {
        let mut config = NetworkConfig::new(
            order,
            projection,
            hidden,
            vocab.inner.shortlist_size(),
            vocab.inner.len(),
        );
        config.seed = seed;
        config.batch_size = batch_size;
        Ok(Self {
            inner: init_network(config).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_model(path.as_ref()).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_model(&self.inner, path.as_ref()).map_err(err)
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn shortlist_size(&self) -> usize {
        self.inner.shortlist_size()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.config.vocab_size
    }

    /// Cumulative epochs trained so far.
    #[getter]
    fn epoch(&self) -> u64 {
        self.inner.epoch
    }

    /// Hidden layer widths (the softmax output layer excluded).
    #[getter]
    fn hidden_sizes(&self) -> Vec<usize> {
        self.inner.config.hidden_sizes.clone()
    }

    /// Trains with SGD at rate `lr * decay**epoch` per (run-local) epoch.
    /// Returns one (cumulative_epoch, mean_nll, rate) row per epoch.
    #[pyo3(signature = (vocab, sentences, epochs, lr, decay = 1.0))]
    fn train(
        &mut self,
        vocab: &Vocabulary,
        sentences: Vec<String>,
        epochs: usize,
        lr: f64,
        decay: f64,
    ) -> PyResult<Vec<(u64, f64, f64)>> {
        let examples = corpus_to_examples(sentences.iter(), &vocab.inner, self.inner.order());
        let schedule = LrSchedule::new(lr, decay).map_err(err)?;
        let stats = train(&mut self.inner, &examples, &schedule, epochs).map_err(err)?;
        Ok(stats
            .epochs
            .iter()
            .map(|e| (e.epoch, e.mean_nll, e.rate))
            .collect())
    }

    /// Perplexity of tokenized sentences.
    fn perplexity(&self, vocab: &Vocabulary, sentences: Vec<String>) -> PyResult<PplStats> {
        let examples = corpus_to_examples(sentences.iter(), &vocab.inner, self.inner.order());
        let stats = perplexity(&self.inner, &examples).map_err(err)?;
        Ok(PplStats {
            ppl: stats.ppl,
            oos_fraction: stats.oos_fraction,
            total: stats.total,
            scored: stats.scored,
        })
    }

    /// Natural-log probability of one sentence (OOS targets scored through
    /// the `<oos>` unit).
    fn logprob(&self, vocab: &Vocabulary, sentence: &str) -> PyResult<f64> {
        sentence_logprob(&self.inner, &vocab.inner, &tokenize(sentence)).map_err(err)
    }

    /// Continued training on the adaptation corpus mixed with data resampled
    /// from the generic corpus at the given adaptation share. Returns one
    /// (cumulative_epoch, epoch_size, realized_share, train_nll) row per epoch.
    #[pyo3(signature = (vocab, adaptation, generic, share, epochs, lr, decay = 1.0, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn adapt_continued(
        &mut self,
        vocab: &Vocabulary,
        adaptation: Vec<String>,
        generic: Vec<String>,
        share: f64,
        epochs: usize,
        lr: f64,
        decay: f64,
        seed: u64,
    ) -> PyResult<AdaptRows> {
        let order = self.inner.order();
        let plan = build_resample_plan(
            corpus_to_examples(adaptation.iter(), &vocab.inner, order),
            corpus_to_examples(generic.iter(), &vocab.inner, order),
            share,
            seed,
        )
        .map_err(err)?;
        let schedule = LrSchedule::new(lr, decay).map_err(err)?;
        let report = continued_training(
            &mut self.inner,
            &plan,
            epochs,
            &schedule,
            EvalSets::default(),
        )
        .map_err(err)?;
        Ok(report_rows(&report))
    }

    /// Inserts an identity-initialized adaptation layer and trains only that
    /// layer on the resampled mixture; the receiver stays untouched. Returns
    /// the adapted model and the per-epoch rows of `adapt_continued`.
    #[pyo3(signature = (vocab, adaptation, generic, share, epochs, lr, decay = 1.0, seed = 0,
                        position = "last", activation = "tanh"))]
    #[allow(clippy::too_many_arguments)]
    fn adapt_with_layer(
        &self,
        vocab: &Vocabulary,
        adaptation: Vec<String>,
        generic: Vec<String>,
        share: f64,
        epochs: usize,
        lr: f64,
        decay: f64,
        seed: u64,
        position: &str,
        activation: &str,
    ) -> PyResult<(Model, AdaptRows)> {
        let order = self.inner.order();
        let plan = build_resample_plan(
            corpus_to_examples(adaptation.iter(), &vocab.inner, order),
            corpus_to_examples(generic.iter(), &vocab.inner, order),
            share,
            seed,
        )
        .map_err(err)?;
        let spec = AdaptLayerSpec::for_model(
            &self.inner,
            parse_position(position)?,
            parse_activation(activation)?,
        )
        .map_err(err)?;
        let schedule = LrSchedule::new(lr, decay).map_err(err)?;
        let (adapted, report) = adapt_with_layer(
            &self.inner,
            &spec,
            &plan,
            epochs,
            &schedule,
            EvalSets::default(),
        )
        .map_err(err)?;
        Ok((Model { inner: adapted }, report_rows(&report)))
    }

    /// Returns a copy with an untrained identity adaptation layer inserted.
    /// With `activation="linear"` the copy's probabilities equal the
    /// original's.
    #[pyo3(signature = (position = "last", activation = "linear"))]
    fn with_identity_layer(&self, position: &str, activation: &str) -> PyResult<Model> {
        let spec = AdaptLayerSpec::for_model(
            &self.inner,
            parse_position(position)?,
            parse_activation(activation)?,
        )
        .map_err(err)?;
        let inserted =
            cslm_core::adapt::insert_adaptation_layer(&self.inner, &spec).map_err(err)?;
        Ok(Model { inner: inserted })
    }

    fn __repr__(&self) -> String {
        let cfg = &self.inner.config;
        format!(
            "Model(order={}, projection={}, hidden={:?}, shortlist={}, vocab={}, epoch={})",
            cfg.order,
            cfg.projection_dim,
            cfg.hidden_sizes,
            cfg.shortlist_size,
            cfg.vocab_size,
            self.inner.epoch
        )
    }
}

/// Corpus BLEU report.
#[pyclass(module = "cslm", frozen, name = "BleuReport", skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyBleuReport {
    #[pyo3(get)]
    score: f64,
    #[pyo3(get)]
    precisions: [f64; 4],
    #[pyo3(get)]
    brevity_penalty: f64,
    #[pyo3(get)]
    candidate_len: u64,
    #[pyo3(get)]
    reference_len: u64,
}

#[pymethods]
impl PyBleuReport {
    fn __repr__(&self) -> String {
        format!(
            "BleuReport(score={:.6}, precisions={:?}, brevity_penalty={:.6})",
            self.score, self.precisions, self.brevity_penalty
        )
    }
}

/// Corpus BLEU of candidate sentences against per-sentence reference lists.
/// Unsmoothed by default (any zero n-gram match count gives 0); `smoothed`
/// applies add-one smoothing to orders >= 2.
#[pyfunction]
#[pyo3(signature = (candidates, references, smoothed = false))]
fn bleu(
    candidates: Vec<String>,
    references: Vec<Vec<String>>,
    smoothed: bool,
) -> PyResult<PyBleuReport> {
    let candidates: Vec<Vec<String>> = candidates.iter().map(|s| tokenize(s)).collect();
    let references: Vec<Vec<Vec<String>>> = references
        .iter()
        .map(|refs| refs.iter().map(|s| tokenize(s)).collect())
        .collect();
    let (report, _) = core_bleu(&candidates, &references, smoothed).map_err(err)?;
    Ok(PyBleuReport {
        score: report.score,
        precisions: report.precisions,
        brevity_penalty: report.brevity_penalty,
        candidate_len: report.candidate_len,
        reference_len: report.reference_len,
    })
}

/// A decoder n-best list (` ||| `-separated fields).
#[pyclass(module = "cslm")]
struct NBestList {
    inner: CoreNBestList,
}

#[pymethods]
impl NBestList {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreNBestList::parse(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreNBestList::load(path).map_err(err)?,
        })
    }

    /// Number of source sentences (groups).
    fn __len__(&self) -> usize {
        self.inner.groups.len()
    }

    #[getter]
    fn num_hypotheses(&self) -> usize {
        self.inner.num_hypotheses()
    }

    /// Features per hypothesis, or None for an empty list.
    #[getter]
    fn num_features(&self) -> Option<usize> {
        self.inner.num_features()
    }

    /// Returns a copy with the model's sentence log-probability appended as
    /// one extra feature on every hypothesis.
    fn add_model_feature(&self, model: &Model, vocab: &Vocabulary) -> PyResult<NBestList> {
        Ok(NBestList {
            inner: add_model_feature(&self.inner, &model.inner, &vocab.inner).map_err(err)?,
        })
    }

    /// Log-linear 1-best per source sentence under the given weights.
    fn rerank(&self, weights: Vec<f64>) -> PyResult<Vec<String>> {
        let weights = FeatureWeights::new(weights).map_err(err)?;
        let picked = rerank(&self.inner, &weights).map_err(err)?;
        Ok(picked.iter().map(|h| h.tokens.join(" ")).collect())
    }

    /// The list in its file format.
    fn to_text(&self) -> String {
        self.inner.to_file_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "NBestList(groups={}, hypotheses={}, features={:?})",
            self.inner.groups.len(),
            self.inner.num_hypotheses(),
            self.inner.num_features()
        )
    }
}

/// Seeded coordinate-ascent tuning of log-linear weights against corpus BLEU
/// on a development n-best list. `references` holds one list of reference
/// sentences per source sentence. Returns (weights, dev_bleu).
#[pyfunction]
#[pyo3(signature = (list, references, seed = 42, restarts = 8))]
fn tune_weights(
    list: &NBestList,
    references: Vec<Vec<String>>,
    seed: u64,
    restarts: usize,
) -> PyResult<(Vec<f64>, f64)> {
    let references: Vec<Vec<Vec<String>>> = references
        .iter()
        .map(|refs| refs.iter().map(|s| tokenize(s)).collect())
        .collect();
    let tuned = core_tune_weights(&list.inner, &references, seed, restarts).map_err(err)?;
    Ok((tuned.weights.0.clone(), tuned.dev_bleu))
}

/// Continuous-space language model toolkit: vocabulary building, CSLM
/// training, fast domain adaptation, perplexity, n-best rescoring and BLEU.
#[pymodule]
fn cslm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Vocabulary>()?;
    m.add_class::<Model>()?;
    m.add_class::<PplStats>()?;
    m.add_class::<PyBleuReport>()?;
    m.add_class::<NBestList>()?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    m.add_function(wrap_pyfunction!(tune_weights, m)?)?;
    m.add("OOS_ID", cslm_core::vocab::OOS_ID)?;
    m.add("BOS_ID", cslm_core::vocab::BOS_ID)?;
    m.add("EOS_ID", cslm_core::vocab::EOS_ID)?;
    m.add("UNK_ID", cslm_core::vocab::UNK_ID)?;
    Ok(())
}
