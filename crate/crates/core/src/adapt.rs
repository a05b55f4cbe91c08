//! Fast domain adaptation of a trained model.
//!
//! Two strategies are provided:
//!
//! * **Continued training** ([`continued_training`]): resume SGD on a mixture
//!   of the adaptation set (used in full every epoch) and a per-epoch random
//!   sample of the generic pool, sized so the adaptation data makes up a target
//!   share of each epoch ([`ResamplePlan`]).
//! * **Adaptation-layer insertion** ([`adapt_with_layer`]): insert a square
//!   layer initialized to the identity at a chosen position and train only
//!   that layer — every pre-existing parameter stays bit-identical.
//!
//! [`DaySchedule`] extends both to the incremental multi-day setting where
//! each day's adaptation pool contains all preceding days.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::nnlm::{perplexity, train_one_epoch, Activation, Layer, LrSchedule, Model};
use crate::vocab::NGramExample;

/// An adaptation corpus plus a stochastic sampling rule over a generic pool.
///
/// Every epoch includes all of `adaptation` and each `generic` example
/// independently with probability `q = |A|·(1−p)/(p·|G|)` (clamped to 1), so
/// the expected epoch size is `|A|/p` and the expected adaptation share is `p`.
#[derive(Debug, Clone)]
pub struct ResamplePlan {
    /// Adaptation example set A, included in full every epoch.
    pub adaptation: Vec<NGramExample>,
    /// Generic example pool G.
    pub generic: Vec<NGramExample>,
    /// Target adaptation share p.
    pub share: f64,
    /// Per-example inclusion probability for G.
    pub q: f64,
    /// Whether `q` had to be clamped to 1 (pool too small for the share).
    pub clamped: bool,
    /// Seed of the per-epoch sampling streams.
    pub seed: u64,
    /// Draw exactly round(q·|G|) generic examples instead of Bernoulli
    /// sampling (deterministic epoch sizes).
    pub fixed_size: bool,
}

impl ResamplePlan {
    /// Expected number of examples per epoch, |A| + q·|G|.
    pub fn expected_epoch_size(&self) -> f64 {
        self.adaptation.len() as f64 + self.q * self.generic.len() as f64
    }
}

/// Builds a resampling plan targeting adaptation share `share` ∈ (0, 1).
pub fn build_resample_plan(
    adaptation: Vec<NGramExample>,
    generic: Vec<NGramExample>,
    share: f64,
    seed: u64,
) -> Result<ResamplePlan> {
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::InvalidShare(share));
    }
    if adaptation.is_empty() {
        return Err(Error::EmptyAdaptationSet);
    }
    if generic.is_empty() {
        return Err(Error::EmptyGenericPool);
    }
    let raw_q = adaptation.len() as f64 * (1.0 - share) / (share * generic.len() as f64);
    let clamped = raw_q > 1.0;
    Ok(ResamplePlan {
        adaptation,
        generic,
        share,
        q: raw_q.min(1.0),
        clamped,
        seed,
        fixed_size: false,
    })
}

/// Draws one epoch's example stream: all of A plus a seeded random subset of
/// G, shuffled. Distinct `epoch` indices use independent RNG streams, so every
/// epoch is reproducible in isolation.
pub fn sample_epoch(plan: &ResamplePlan, epoch: u64) -> Vec<NGramExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(epoch.wrapping_add(1));

    let mut epoch_examples = plan.adaptation.clone();
    if plan.fixed_size {
        let count = ((plan.q * plan.generic.len() as f64).round() as usize).min(plan.generic.len());
        let chosen = rand::seq::index::sample(&mut rng, plan.generic.len(), count);
        epoch_examples.extend(chosen.iter().map(|i| plan.generic[i].clone()));
    } else {
        for example in &plan.generic {
            if rng.random::<f64>() < plan.q {
                epoch_examples.push(example.clone());
            }
        }
    }
    use rand::seq::SliceRandom;
    epoch_examples.shuffle(&mut rng);
    epoch_examples
}

/// Optional held-out sets evaluated after every adaptation epoch.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalSets<'a> {
    /// Generic-domain development set.
    pub dev: Option<&'a [NGramExample]>,
    /// In-domain (adaptation-domain) held-out set.
    pub in_domain: Option<&'a [NGramExample]>,
}

/// One epoch of an adaptation run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptEpochRow {
    /// Model's cumulative epoch counter after this epoch.
    pub epoch: u64,
    /// Generic examples drawn this epoch.
    pub generic_count: usize,
    /// Total examples this epoch.
    pub epoch_size: usize,
    /// |A| / epoch size.
    pub realized_share: f64,
    /// Mean training NLL of the epoch.
    pub train_nll: f64,
    /// Learning rate used.
    pub rate: f64,
    /// Wall-clock seconds.
    pub wall_secs: f64,
    /// Perplexity on [`EvalSets::dev`] if provided.
    pub dev_ppl: Option<f64>,
    /// Perplexity on [`EvalSets::in_domain`] if provided.
    pub in_domain_ppl: Option<f64>,
}

/// Per-epoch adaptation report (tab-separated via [`AdaptReport::to_tsv`]).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptReport {
    pub rows: Vec<AdaptEpochRow>,
}

impl AdaptReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "epoch\tgeneric_count\tepoch_size\trealized_share\ttrain_nll\tdev_ppl\tin_domain_ppl\n",
        );
        for row in &self.rows {
            let fmt_opt = |v: Option<f64>| match v {
                Some(v) => format!("{v:.4}"),
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{:.6}\t{}\t{}\n",
                row.epoch,
                row.generic_count,
                row.epoch_size,
                row.realized_share,
                row.train_nll,
                fmt_opt(row.dev_ppl),
                fmt_opt(row.in_domain_ppl),
            ));
        }
        out
    }
}

fn run_plan_training(
    model: &mut Model,
    plan: &ResamplePlan,
    epochs: usize,
    schedule: &LrSchedule,
    evals: EvalSets<'_>,
) -> Result<AdaptReport> {
    let mut report = AdaptReport::default();
    for e in 0..epochs {
        // The model's cumulative epoch counter indexes the sampling stream, so
        // chained adaptations keep drawing fresh generic subsets.
        let examples = sample_epoch(plan, model.epoch);
        let rate = schedule.rate(e);
        let stats = train_one_epoch(model, &examples, rate)?;
        let mut row = AdaptEpochRow {
            epoch: stats.epoch,
            generic_count: examples.len() - plan.adaptation.len(),
            epoch_size: examples.len(),
            realized_share: plan.adaptation.len() as f64 / examples.len() as f64,
            train_nll: stats.mean_nll,
            rate,
            wall_secs: stats.wall_secs,
            dev_ppl: None,
            in_domain_ppl: None,
        };
        if let Some(dev) = evals.dev {
            row.dev_ppl = Some(perplexity(model, dev)?.ppl);
        }
        if let Some(in_domain) = evals.in_domain {
            row.in_domain_ppl = Some(perplexity(model, in_domain)?.ppl);
        }
        report.rows.push(row);
    }
    Ok(report)
}

/// Continued training: every parameter becomes trainable again and SGD resumes
/// over per-epoch resampled mixtures. With `epochs == 0` the model is returned
/// untouched.
pub fn continued_training(
    model: &mut Model,
    plan: &ResamplePlan,
    epochs: usize,
    schedule: &LrSchedule,
    evals: EvalSets<'_>,
) -> Result<AdaptReport> {
    if epochs == 0 {
        return Ok(AdaptReport::default());
    }
    model.set_all_trainable(true);
    run_plan_training(model, plan, epochs, schedule, evals)
}

/// Where to insert an adaptation layer, counting interfaces from after the
/// projection: position i feeds the input of current layer i; `Last` is the
/// interface just before the output layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerPosition {
    Index(usize),
    Last,
}

impl LayerPosition {
    /// Resolves to a concrete layer index for a model with `n_layers` layers.
    pub fn resolve(self, n_layers: usize) -> usize {
        match self {
            LayerPosition::Index(i) => i,
            LayerPosition::Last => n_layers - 1,
        }
    }
}

impl std::str::FromStr for LayerPosition {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "last" {
            return Ok(LayerPosition::Last);
        }
        s.parse::<usize>()
            .map(LayerPosition::Index)
            .map_err(|_| format!("layer position must be `last` or an index, got {s:?}"))
    }
}

/// Description of the layer to insert: position, activation (linear or tanh)
/// and width, which must equal the activation width at the insertion point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptLayerSpec {
    pub position: LayerPosition,
    pub activation: Activation,
    pub width: usize,
}

impl AdaptLayerSpec {
    /// Builds a spec whose width is read off the model at `position`.
    pub fn for_model(
        model: &Model,
        position: LayerPosition,
        activation: Activation,
    ) -> Result<Self> {
        let pos = position.resolve(model.layers.len());
        if pos >= model.layers.len() {
            return Err(Error::InvalidLayerPosition {
                position: pos,
                layers: model.layers.len(),
            });
        }
        Ok(Self {
            position,
            activation,
            width: model.layers[pos].input_dim(),
        })
    }
}

/// Inserts an identity-initialized adaptation layer.
///
/// The new layer has weight = identity, bias = 0 and is the only trainable
/// part of the returned model; every other layer (and the embedding) is
/// frozen. A LINEAR inserted layer leaves all output probabilities unchanged
/// up to floating-point round-off.
pub fn insert_adaptation_layer(model: &Model, spec: &AdaptLayerSpec) -> Result<Model> {
    if !matches!(spec.activation, Activation::Linear | Activation::Tanh) {
        return Err(Error::InvalidAdaptActivation);
    }
    let pos = spec.position.resolve(model.layers.len());
    if pos >= model.layers.len() {
        return Err(Error::InvalidLayerPosition {
            position: pos,
            layers: model.layers.len(),
        });
    }
    let width = model.layers[pos].input_dim();
    if spec.width != width {
        return Err(Error::NonSquareInsertion {
            position: pos,
            expected: width,
            got: spec.width,
        });
    }

    let mut adapted = model.clone();
    adapted.set_all_trainable(false);
    adapted.layers.insert(
        pos,
        Layer {
            weight: Array2::eye(width),
            bias: Array1::zeros(width),
            activation: spec.activation,
            trainable: true,
        },
    );
    adapted.config.hidden_sizes.insert(pos, width);
    adapted
        .config
        .hidden_activations
        .insert(pos, spec.activation);
    Ok(adapted)
}

/// Inserts an adaptation layer and trains only it on resampled mixtures.
/// Returns the adapted model and the per-epoch report; the input model is
/// untouched and every pre-existing parameter of the result is bit-identical
/// to the post-insertion state.
pub fn adapt_with_layer(
    model: &Model,
    spec: &AdaptLayerSpec,
    plan: &ResamplePlan,
    epochs: usize,
    schedule: &LrSchedule,
    evals: EvalSets<'_>,
) -> Result<(Model, AdaptReport)> {
    let mut adapted = insert_adaptation_layer(model, spec)?;
    let report = run_plan_training(&mut adapted, plan, epochs, schedule, evals)?;
    Ok((adapted, report))
}

/// How the generic draw of each day's plan is sized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DayMode {
    /// Keep the expected generic sample count fixed across days, so the
    /// combined adaptation share grows as days accumulate (default).
    FixedGenericCount(usize),
    /// Target the same combined adaptation share every day.
    CombinedShare(f64),
}

/// Multi-day incremental schedule: day d's adaptation pool is the union of
/// days 1..=d (pools are strictly nested).
#[derive(Debug, Clone)]
pub struct DaySchedule {
    days: Vec<Vec<NGramExample>>,
    generic: Vec<NGramExample>,
    mode: DayMode,
    seed: u64,
}

/// Builds a day schedule from per-day adaptation corpora and a generic pool.
pub fn build_day_schedule(
    days: Vec<Vec<NGramExample>>,
    generic: Vec<NGramExample>,
    mode: DayMode,
    seed: u64,
) -> Result<DaySchedule> {
    if days.is_empty() {
        return Err(Error::NoDays);
    }
    for (d, day) in days.iter().enumerate() {
        if day.is_empty() {
            return Err(Error::EmptyDay(d + 1));
        }
    }
    if generic.is_empty() {
        return Err(Error::EmptyGenericPool);
    }
    match mode {
        DayMode::FixedGenericCount(0) => {
            return Err(Error::InvalidConfig(
                "fixed generic count must be at least 1".into(),
            ))
        }
        DayMode::CombinedShare(p) if !(p > 0.0 && p < 1.0) => return Err(Error::InvalidShare(p)),
        _ => {}
    }
    Ok(DaySchedule {
        days,
        generic,
        mode,
        seed,
    })
}

impl DaySchedule {
    pub fn num_days(&self) -> usize {
        self.days.len()
    }

    pub fn mode(&self) -> DayMode {
        self.mode
    }

    /// Examples of day `d` (0-based).
    pub fn day(&self, d: usize) -> &[NGramExample] {
        &self.days[d]
    }

    /// Pooled adaptation set for day `d`: all examples of days 0..=d.
    pub fn pool(&self, d: usize) -> Vec<NGramExample> {
        self.days[..=d].iter().flatten().cloned().collect()
    }

    /// Target combined adaptation share for day `d` under the schedule mode.
    pub fn combined_share(&self, d: usize) -> f64 {
        let a: usize = self.days[..=d].iter().map(Vec::len).sum();
        match self.mode {
            DayMode::FixedGenericCount(g) => a as f64 / (a + g) as f64,
            DayMode::CombinedShare(p) => p,
        }
    }

    /// Resampling plan for day `d`, seeded independently per day.
    pub fn plan_for_day(&self, d: usize) -> Result<ResamplePlan> {
        let seed = self
            .seed
            .wrapping_add((d as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        build_resample_plan(
            self.pool(d),
            self.generic.clone(),
            self.combined_share(d),
            seed,
        )
    }

    /// Expected share of each day 0..=d in day-d epochs, with the generic
    /// share as the final entry. Entries sum to 1.
    pub fn proportions(&self, d: usize) -> Vec<f64> {
        let a: usize = self.days[..=d].iter().map(Vec::len).sum();
        let p = self.combined_share(d);
        // Expected epoch size implied by the plan: |A| / p, clamped to the
        // whole pool when the share is unreachable.
        let epoch = (a as f64 / p).min((a + self.generic.len()) as f64);
        let mut shares: Vec<f64> = self.days[..=d]
            .iter()
            .map(|day| day.len() as f64 / epoch)
            .collect();
        shares.push((epoch - a as f64) / epoch);
        shares
    }
}

/// Adaptation strategy selector for the multi-day simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptMethod {
    Continued,
    Layer {
        position: LayerPosition,
        activation: Activation,
    },
}

/// One evaluation row of the multi-day simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    /// 1-based index of the evaluated (next) day.
    pub eval_day: usize,
    /// Perplexity of the unadapted base model on that day.
    pub baseline_ppl: f64,
    /// Perplexity of the model adapted on all preceding days.
    pub adapted_ppl: f64,
    /// 1 − adapted/baseline.
    pub relative_reduction: f64,
    /// Expected per-day shares of the adaptation epochs (generic share last).
    pub shares: Vec<f64>,
}

/// Runs the incremental simulation: for each day d, adapt the BASE model on
/// the pooled days 1..=d and evaluate on day d+1. With D days this yields
/// D−1 rows.
pub fn simulate_days(
    base: &Model,
    schedule: &DaySchedule,
    method: AdaptMethod,
    epochs: usize,
    lr: &LrSchedule,
) -> Result<Vec<DayOutcome>> {
    let mut outcomes = Vec::new();
    for d in 0..schedule.num_days().saturating_sub(1) {
        let plan = schedule.plan_for_day(d)?;
        let next_day = schedule.day(d + 1);
        let baseline_ppl = perplexity(base, next_day)?.ppl;
        let adapted = match method {
            AdaptMethod::Continued => {
                let mut m = base.clone();
                continued_training(&mut m, &plan, epochs, lr, EvalSets::default())?;
                m
            }
            AdaptMethod::Layer {
                position,
                activation,
            } => {
                let spec = AdaptLayerSpec::for_model(base, position, activation)?;
                adapt_with_layer(base, &spec, &plan, epochs, lr, EvalSets::default())?.0
            }
        };
        let adapted_ppl = perplexity(&adapted, next_day)?.ppl;
        outcomes.push(DayOutcome {
            eval_day: d + 2,
            baseline_ppl,
            adapted_ppl,
            relative_reduction: 1.0 - adapted_ppl / baseline_ppl,
            shares: schedule.proportions(d),
        });
    }
    Ok(outcomes)
}
