//! The continuous-space language model: embedding projection, stacked dense
//! layers, short-list softmax, SGD training with an exponentially decaying
//! learning rate, perplexity evaluation and gradient checking.
//!
//! All in-memory parameters and arithmetic are f64 so that finite-difference
//! gradient checks at h=1e-4 are meaningful; the on-disk format (see [`io`])
//! stores f32.

pub mod io;

pub use io::{load_model, model_from_bytes, model_to_bytes, save_model};

use std::borrow::Borrow;
use std::time::Instant;

use ndarray::{s, Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vocab::{NGramExample, OOS_ID};

/// Layer activation. `Softmax` is only legal as the final layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Tanh,
    Softmax,
}

impl Activation {
    pub(crate) fn tag(self) -> u32 {
        match self {
            Activation::Linear => 0,
            Activation::Tanh => 1,
            Activation::Softmax => 2,
        }
    }

    pub(crate) fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Activation::Linear),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Softmax),
            _ => None,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "softmax" => Ok(Activation::Softmax),
            other => Err(format!("unknown activation {other:?}")),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Softmax => "softmax",
        })
    }
}

/// One dense layer: `out = act(W · in + b)` with `W` stored as out×in.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
    pub trainable: bool,
}

impl Layer {
    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }
}

/// Architecture and training hyper-parameters of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// N-gram order n; the context is n−1 words.
    pub order: usize,
    /// Word embedding dimension d_p.
    pub projection_dim: usize,
    /// Hidden layer widths, input to output.
    pub hidden_sizes: Vec<usize>,
    /// Per-hidden-layer activation (linear or tanh), same length as `hidden_sizes`.
    pub hidden_activations: Vec<Activation>,
    /// Output layer width K (short-list size, specials included).
    pub shortlist_size: usize,
    /// Input vocabulary size V (context ids range over `0..V`).
    pub vocab_size: usize,
    /// Mini-batch size for SGD and batched evaluation.
    pub batch_size: usize,
    /// Seed for initialization and epoch shuffling.
    pub seed: u64,
}

impl NetworkConfig {
    /// Config with all-tanh hidden layers, batch size 128 and seed 42.
    pub fn new(
        order: usize,
        projection_dim: usize,
        hidden_sizes: Vec<usize>,
        shortlist_size: usize,
        vocab_size: usize,
    ) -> Self {
        let hidden_activations = vec![Activation::Tanh; hidden_sizes.len()];
        Self {
            order,
            projection_dim,
            hidden_sizes,
            hidden_activations,
            shortlist_size,
            vocab_size,
            batch_size: 128,
            seed: 42,
        }
    }

    /// Width of the concatenated projection output, (n−1)·d_p.
    pub fn context_width(&self) -> usize {
        (self.order - 1) * self.projection_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidConfig(format!(
                "order must be at least 2, got {}",
                self.order
            )));
        }
        if self.projection_dim == 0
            || self.shortlist_size == 0
            || self.vocab_size == 0
            || self.batch_size == 0
            || self.hidden_sizes.contains(&0)
        {
            return Err(Error::InvalidConfig(
                "all dimensions must be at least 1".into(),
            ));
        }
        if self.shortlist_size > self.vocab_size {
            return Err(Error::InvalidConfig(format!(
                "shortlist size {} exceeds vocabulary size {}",
                self.shortlist_size, self.vocab_size
            )));
        }
        if self.shortlist_size < crate::vocab::NUM_SPECIALS {
            return Err(Error::InvalidConfig(format!(
                "shortlist size {} cannot hold the {} special tokens",
                self.shortlist_size,
                crate::vocab::NUM_SPECIALS
            )));
        }
        if self.hidden_activations.len() != self.hidden_sizes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} hidden activations for {} hidden layers",
                self.hidden_activations.len(),
                self.hidden_sizes.len()
            )));
        }
        if self.hidden_activations.contains(&Activation::Softmax) {
            return Err(Error::InvalidConfig(
                "softmax is only legal as the final layer".into(),
            ));
        }
        Ok(())
    }
}

/// Exponentially decaying learning-rate schedule: rate at epoch e is λ₀·γᵉ.
///
/// The epoch index is local to each training run; a model's cumulative epoch
/// counter never feeds back into the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub initial: f64,
    pub decay: f64,
}

impl LrSchedule {
    pub fn new(initial: f64, decay: f64) -> Result<Self> {
        if initial <= 0.0 || initial.is_nan() {
            return Err(Error::InvalidSchedule(format!(
                "initial rate must be positive, got {initial}"
            )));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "decay must lie in (0, 1], got {decay}"
            )));
        }
        Ok(Self { initial, decay })
    }

    /// Effective learning rate at (run-local) epoch index `epoch`.
    pub fn rate(&self, epoch: usize) -> f64 {
        self.initial * self.decay.powi(epoch as i32)
    }
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// Model's cumulative epoch counter after this epoch.
    pub epoch: u64,
    /// Mean per-example negative log-likelihood (natural log).
    pub mean_nll: f64,
    /// Number of examples seen this epoch.
    pub examples: usize,
    /// Learning rate used this epoch.
    pub rate: f64,
    /// Wall-clock seconds spent in this epoch.
    pub wall_secs: f64,
}

/// Statistics for a whole training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainStats {
    pub epochs: Vec<EpochStats>,
}

/// Perplexity evaluation result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PplStats {
    /// exp(mean −log p) over scored (non-OOS) examples.
    pub ppl: f64,
    /// Fraction of examples whose target was `<oos>` (excluded from the mean).
    pub oos_fraction: f64,
    /// Total examples, OOS included.
    pub total: usize,
    /// Examples entering the perplexity mean.
    pub scored: usize,
}

/// The network: embedding table plus dense layers ending in a softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    /// V×d_p word embedding table; rows are word vectors.
    pub embedding: Array2<f64>,
    /// Whether SGD may update the embedding table.
    pub embedding_trainable: bool,
    /// Dense layers; layer 0 consumes the (n−1)·d_p concatenation, the final
    /// layer has K outputs and softmax activation.
    pub layers: Vec<Layer>,
    /// Architecture snapshot.
    pub config: NetworkConfig,
    /// Cumulative number of training epochs this model has seen.
    pub epoch: u64,
}

/// Gradients of the mean batch cross-entropy with respect to every parameter.
///
/// The embedding gradient is kept in its scattered form (`d_x0` holds the
/// gradient at the projection output); [`Gradients::embedding_dense`]
/// materializes the dense V×d_p gradient for gradient checking.
#[derive(Debug, Clone)]
pub struct Gradients {
    /// Per layer: (dL/dW, dL/db).
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
    /// dL/dx₀, the gradient at the concatenated projection output (B×(n−1)d_p).
    pub d_x0: Array2<f64>,
}

impl Gradients {
    /// Accumulates `d_x0` back into a dense V×d_p embedding gradient.
    pub fn embedding_dense<B: Borrow<NGramExample>>(
        &self,
        batch: &[B],
        vocab_size: usize,
        projection_dim: usize,
    ) -> Array2<f64> {
        let mut grad = Array2::zeros((vocab_size, projection_dim));
        for (b, ex) in batch.iter().enumerate() {
            for (j, &word) in ex.borrow().context.iter().enumerate() {
                let src = self
                    .d_x0
                    .slice(s![b, j * projection_dim..(j + 1) * projection_dim]);
                let mut dst = grad.row_mut(word as usize);
                dst += &src;
            }
        }
        grad
    }
}

struct ForwardCache {
    /// Concatenated projection output, B×(n−1)d_p.
    x0: Array2<f64>,
    /// Post-activation output of every layer; the last entry is the
    /// probability matrix.
    outs: Vec<Array2<f64>>,
}

/// Initializes a network from a config: weights uniform in
/// ±sqrt(6/(fan_in+fan_out)), biases zero, everything trainable.
/// Deterministic given the config seed.
pub fn init_network(config: NetworkConfig) -> Result<Model> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |rows: usize, cols: usize, fan_in: usize, fan_out: usize| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut m = Array2::zeros((rows, cols));
        for i in 0..rows {
            for j in 0..cols {
                m[[i, j]] = (2.0 * rng.random::<f64>() - 1.0) * limit;
            }
        }
        m
    };

    let embedding = draw(
        config.vocab_size,
        config.projection_dim,
        config.vocab_size,
        config.projection_dim,
    );

    let mut dims = Vec::with_capacity(config.hidden_sizes.len() + 2);
    dims.push(config.context_width());
    dims.extend_from_slice(&config.hidden_sizes);
    dims.push(config.shortlist_size);
    let mut activations: Vec<Activation> = config.hidden_activations.clone();
    activations.push(Activation::Softmax);

    let mut layers = Vec::with_capacity(activations.len());
    for (l, &activation) in activations.iter().enumerate() {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        layers.push(Layer {
            weight: draw(fan_out, fan_in, fan_in, fan_out),
            bias: Array1::zeros(fan_out),
            activation,
            trainable: true,
        });
    }

    Ok(Model {
        embedding,
        embedding_trainable: true,
        layers,
        config,
        epoch: 0,
    })
}

fn softmax_inplace(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

impl Model {
    pub fn order(&self) -> usize {
        self.config.order
    }

    pub fn shortlist_size(&self) -> usize {
        self.config.shortlist_size
    }

    fn check_context(&self, context: &[u32]) -> Result<()> {
        if context.len() != self.config.order - 1 {
            return Err(Error::DimensionMismatch(format!(
                "context has {} words, model order {} needs {}",
                context.len(),
                self.config.order,
                self.config.order - 1
            )));
        }
        if let Some(&bad) = context
            .iter()
            .find(|&&id| id as usize >= self.config.vocab_size)
        {
            return Err(Error::DimensionMismatch(format!(
                "context id {bad} outside vocabulary of size {}",
                self.config.vocab_size
            )));
        }
        Ok(())
    }

    fn embed<B: Borrow<NGramExample>>(&self, batch: &[B]) -> Result<Array2<f64>> {
        let d_p = self.config.projection_dim;
        let mut x0 = Array2::zeros((batch.len(), self.config.context_width()));
        for (b, ex) in batch.iter().enumerate() {
            let ex = ex.borrow();
            self.check_context(&ex.context)?;
            for (j, &word) in ex.context.iter().enumerate() {
                x0.slice_mut(s![b, j * d_p..(j + 1) * d_p])
                    .assign(&self.embedding.row(word as usize));
            }
        }
        Ok(x0)
    }

    fn forward_cache<B: Borrow<NGramExample>>(&self, batch: &[B]) -> Result<ForwardCache> {
        let x0 = self.embed(batch)?;
        let mut outs = Vec::with_capacity(self.layers.len());
        let mut input = x0.clone();
        for layer in &self.layers {
            let mut z = input.dot(&layer.weight.t());
            z += &layer.bias;
            match layer.activation {
                Activation::Linear => {}
                Activation::Tanh => z.mapv_inplace(f64::tanh),
                Activation::Softmax => softmax_inplace(&mut z),
            }
            outs.push(z.clone());
            input = z;
        }
        Ok(ForwardCache { x0, outs })
    }

    /// Next-word probability distribution for a batch of contexts (B×K).
    /// Every row sums to 1 within 1e−6 and all entries lie in (0, 1).
    pub fn forward<C: Borrow<[u32]>>(&self, contexts: &[C]) -> Result<Array2<f64>> {
        let batch: Vec<NGramExample> = contexts
            .iter()
            .map(|c| NGramExample {
                context: c.borrow().to_vec(),
                target: 0,
            })
            .collect();
        let mut cache = self.forward_cache(&batch)?;
        Ok(cache.outs.pop().expect("network has at least one layer"))
    }

    /// Probabilities for a batch of examples (targets are ignored).
    pub fn forward_examples<B: Borrow<NGramExample>>(&self, batch: &[B]) -> Result<Array2<f64>> {
        let mut cache = self.forward_cache(batch)?;
        Ok(cache.outs.pop().expect("network has at least one layer"))
    }

    /// Natural-log probability of `target` after `context`.
    pub fn logprob(&self, context: &[u32], target: u32) -> Result<f64> {
        if target as usize >= self.config.shortlist_size {
            return Err(Error::TargetOutOfRange {
                target,
                shortlist: self.config.shortlist_size as u32,
            });
        }
        let probs = self.forward(&[context])?;
        Ok(probs[[0, target as usize]].max(f64::MIN_POSITIVE).ln())
    }

    /// Mean negative log-likelihood of a batch (natural log), no update.
    pub fn loss<B: Borrow<NGramExample>>(&self, batch: &[B]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let cache = self.forward_cache(batch)?;
        let probs = cache.outs.last().expect("network has layers");
        Ok(batch_nll(probs, batch) / batch.len() as f64)
    }

    /// Gradients of the mean batch cross-entropy, plus the batch mean NLL.
    /// Gradients are computed for every parameter regardless of trainable
    /// flags; flags only gate the update in [`Model::backward_sgd_step`].
    pub fn backward<B: Borrow<NGramExample>>(&self, batch: &[B]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let k = self.config.shortlist_size;
        for ex in batch {
            let t = ex.borrow().target;
            if t as usize >= k {
                return Err(Error::TargetOutOfRange {
                    target: t,
                    shortlist: k as u32,
                });
            }
        }

        let cache = self.forward_cache(batch)?;
        let probs = cache.outs.last().expect("network has layers");
        let nll = batch_nll(probs, batch) / batch.len() as f64;

        // Softmax + cross-entropy: δ = (P − Y) / B.
        let inv_b = 1.0 / batch.len() as f64;
        let mut delta = probs.clone();
        for (b, ex) in batch.iter().enumerate() {
            delta[[b, ex.borrow().target as usize]] -= 1.0;
        }
        delta.mapv_inplace(|v| v * inv_b);

        let mut layer_grads = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); self.layers.len()];
        for l in (0..self.layers.len()).rev() {
            let input = if l == 0 {
                &cache.x0
            } else {
                &cache.outs[l - 1]
            };
            let dw = delta.t().dot(input);
            let db = delta.sum_axis(Axis(0));
            let mut d_input = delta.dot(&self.layers[l].weight);
            if l > 0 {
                // Chain through the previous layer's activation.
                match self.layers[l - 1].activation {
                    Activation::Linear => {}
                    Activation::Tanh => {
                        let a = &cache.outs[l - 1];
                        d_input.zip_mut_with(a, |d, &a| *d *= 1.0 - a * a);
                    }
                    Activation::Softmax => unreachable!("softmax only as final layer"),
                }
            }
            layer_grads[l] = (dw, db);
            delta = d_input;
        }

        Ok((
            nll,
            Gradients {
                layers: layer_grads,
                d_x0: delta,
            },
        ))
    }

    /// One SGD step on a batch: computes gradients and updates every layer
    /// whose trainable flag is set (and the embedding if its flag is set).
    /// Returns the batch mean NLL measured before the update.
    pub fn backward_sgd_step<B: Borrow<NGramExample>>(
        &mut self,
        batch: &[B],
        rate: f64,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if rate <= 0.0 || rate.is_nan() {
            return Err(Error::NonPositiveRate(rate));
        }
        let (nll, grads) = self.backward(batch)?;
        self.apply_gradients(&grads, batch, rate);
        Ok(nll)
    }

    fn apply_gradients<B: Borrow<NGramExample>>(
        &mut self,
        grads: &Gradients,
        batch: &[B],
        rate: f64,
    ) {
        for (layer, (dw, db)) in self.layers.iter_mut().zip(&grads.layers) {
            if layer.trainable {
                layer.weight.scaled_add(-rate, dw);
                layer.bias.scaled_add(-rate, db);
            }
        }
        if self.embedding_trainable {
            let d_p = self.config.projection_dim;
            // Sequential scatter in batch order keeps updates deterministic
            // even when a word repeats within the batch.
            for (b, ex) in batch.iter().enumerate() {
                for (j, &word) in ex.borrow().context.iter().enumerate() {
                    let src = grads.d_x0.slice(s![b, j * d_p..(j + 1) * d_p]);
                    let mut dst = self.embedding.row_mut(word as usize);
                    dst.scaled_add(-rate, &src);
                }
            }
        }
    }

    /// Sets every trainable flag (layers and embedding) to `trainable`.
    pub fn set_all_trainable(&mut self, trainable: bool) {
        self.embedding_trainable = trainable;
        for layer in &mut self.layers {
            layer.trainable = trainable;
        }
    }
}

fn batch_nll<B: Borrow<NGramExample>>(probs: &Array2<f64>, batch: &[B]) -> f64 {
    let mut sum = 0.0;
    for (b, ex) in batch.iter().enumerate() {
        let p = probs[[b, ex.borrow().target as usize]].max(f64::MIN_POSITIVE);
        sum -= p.ln();
    }
    sum
}

/// RNG for epoch `epoch`'s shuffle, derived from the config seed.
fn shuffle_rng(seed: u64, epoch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch.wrapping_add(0x5358_4653)); // distinct from sampling streams
    rng
}

/// Trains `model` on a fixed example set for `epochs` epochs.
///
/// Epoch e (run-local) uses rate λ₀·γᵉ; examples are reshuffled every epoch
/// with a stream derived from the config seed and the model's cumulative epoch
/// counter, so training is fully determined by (seed, data, config).
pub fn train(
    model: &mut Model,
    examples: &[NGramExample],
    schedule: &LrSchedule,
    epochs: usize,
) -> Result<TrainStats> {
    if examples.is_empty() {
        return Err(Error::EmptyExamples);
    }
    if epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be at least 1".into()));
    }
    let mut stats = TrainStats::default();
    for e in 0..epochs {
        let rate = schedule.rate(e);
        let row = train_one_epoch(model, examples, rate)?;
        stats.epochs.push(row);
    }
    Ok(stats)
}

/// Runs exactly one epoch at a fixed rate: shuffle, then SGD over mini-batches.
/// Increments the model's cumulative epoch counter.
pub fn train_one_epoch(
    model: &mut Model,
    examples: &[NGramExample],
    rate: f64,
) -> Result<EpochStats> {
    if examples.is_empty() {
        return Err(Error::EmptyExamples);
    }
    let start = Instant::now();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut shuffle_rng(model.config.seed, model.epoch));

    let batch_size = model.config.batch_size;
    let mut nll_sum = 0.0;
    let mut batch: Vec<&NGramExample> = Vec::with_capacity(batch_size);
    for chunk in order.chunks(batch_size) {
        batch.clear();
        batch.extend(chunk.iter().map(|&i| &examples[i]));
        let nll = model.backward_sgd_step(&batch, rate)?;
        nll_sum += nll * batch.len() as f64;
    }
    model.epoch += 1;
    Ok(EpochStats {
        epoch: model.epoch,
        mean_nll: nll_sum / examples.len() as f64,
        examples: examples.len(),
        rate,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

/// Perplexity over an example set: exp of the mean −log p of every example
/// whose target is not `<oos>`; OOS examples are excluded from the mean and
/// reported as a fraction.
pub fn perplexity(model: &Model, examples: &[NGramExample]) -> Result<PplStats> {
    if examples.is_empty() {
        return Err(Error::EmptyExamples);
    }
    let mut nll_sum = 0.0f64;
    let mut scored = 0usize;
    let mut oos = 0usize;
    for chunk in examples.chunks(model.config.batch_size) {
        let cache = model.forward_cache(chunk)?;
        let probs = cache.outs.last().expect("network has layers");
        for (b, ex) in chunk.iter().enumerate() {
            if ex.target == OOS_ID {
                oos += 1;
            } else {
                let p = probs[[b, ex.target as usize]].max(f64::MIN_POSITIVE);
                nll_sum -= p.ln();
                scored += 1;
            }
        }
    }
    if scored == 0 {
        return Err(Error::AllTargetsOos);
    }
    Ok(PplStats {
        ppl: (nll_sum / scored as f64).exp(),
        oos_fraction: oos as f64 / examples.len() as f64,
        total: examples.len(),
        scored,
    })
}

/// Worst relative error between analytic gradients and central finite
/// differences with step `h`, over every parameter of the model.
///
/// The relative error of analytic value a vs numerical value n is
/// |a−n| / max(|a|+|n|, 1e−4); the floor keeps near-zero pairs stable.
pub fn max_gradient_rel_error(model: &Model, batch: &[NGramExample], h: f64) -> Result<f64> {
    let (_, grads) = model.backward(batch)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;

    let mut check = |probe: &mut Model, analytic: f64, get_set: &mut dyn FnMut(&mut Model, f64)| {
        // Central difference: (L(θ+h) − L(θ−h)) / 2h.
        get_set(probe, h);
        let up = probe.loss(batch).expect("loss at θ+h");
        get_set(probe, -2.0 * h);
        let down = probe.loss(batch).expect("loss at θ−h");
        get_set(probe, h); // restore
        let numeric = (up - down) / (2.0 * h);
        let denom = (analytic.abs() + numeric.abs()).max(1e-4);
        worst = worst.max((analytic - numeric).abs() / denom);
    };

    let emb_grad =
        grads.embedding_dense(batch, model.config.vocab_size, model.config.projection_dim);
    for i in 0..model.config.vocab_size {
        for j in 0..model.config.projection_dim {
            check(&mut probe, emb_grad[[i, j]], &mut |m, dv| {
                m.embedding[[i, j]] += dv;
            });
        }
    }
    for l in 0..model.layers.len() {
        let (dw, db) = &grads.layers[l];
        for i in 0..dw.nrows() {
            for j in 0..dw.ncols() {
                check(&mut probe, dw[[i, j]], &mut |m, dv| {
                    m.layers[l].weight[[i, j]] += dv;
                });
            }
        }
        for i in 0..db.len() {
            check(&mut probe, db[i], &mut |m, dv| {
                m.layers[l].bias[i] += dv;
            });
        }
    }
    Ok(worst)
}
