//! `cslm` — operator CLI for the continuous-space language model toolkit.
//!
//! Subcommands: `build-vocab`, `train`, `adapt`, `ppl`, `rescore`,
//! `simulate-days`. Exit status is 0 on success, 1 on runtime/data errors,
//! 2 on usage errors (bad flags, missing input files). Every subcommand that
//! writes an output file also writes `<output>.manifest` with the full
//! configuration in `key=value` lines; outputs are written to a temporary
//! file and renamed, so failures never leave partial files behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use cslm_core::adapt::{
    adapt_with_layer, build_day_schedule, build_resample_plan, continued_training, simulate_days,
    AdaptLayerSpec, AdaptMethod, DayMode, EvalSets, LayerPosition,
};
use cslm_core::nnlm::{
    init_network, load_model, model_to_bytes, perplexity, train, Activation, LrSchedule, Model,
    NetworkConfig,
};
use cslm_core::rescore::{add_model_feature, corpus_bleu, rerank, FeatureWeights, NBestList};
use cslm_core::vocab::{corpus_to_examples, Vocabulary};

#[derive(Parser)]
#[command(
    name = "cslm",
    version,
    about = "Continuous-space language model toolkit: vocabulary building, training, \
             domain adaptation, perplexity evaluation, n-best rescoring, and multi-day \
             adaptation simulation."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a frequency-ranked vocabulary from a tokenized corpus.
    BuildVocab(BuildVocabArgs),
    /// Train a language model from scratch.
    Train(TrainArgs),
    /// Adapt a trained model to in-domain data.
    Adapt(AdaptArgs),
    /// Evaluate perplexity of a model on a corpus.
    Ppl(PplArgs),
    /// Rescore an n-best list with a model feature and rerank.
    Rescore(RescoreArgs),
    /// Simulate day-by-day incremental adaptation.
    SimulateDays(SimulateDaysArgs),
}

#[derive(Args)]
struct BuildVocabArgs {
    /// Tokenized training corpus, one sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Output vocabulary file (`<rank> <token> <frequency>` lines).
    #[arg(long)]
    out: PathBuf,
    /// Short-list size (softmax output units, including the specials).
    #[arg(long, default_value_t = 32000)]
    shortlist: usize,
    /// Maximum vocabulary size including the specials (0 = unlimited).
    #[arg(long, default_value_t = 0)]
    max_vocab: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Tokenized training corpus, one sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Vocabulary file from `build-vocab`.
    #[arg(long)]
    vocab: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// N-gram order (context length + 1).
    #[arg(long, default_value_t = 28)]
    order: usize,
    /// Projection (embedding) dimension per word.
    #[arg(long, default_value_t = 320)]
    proj: usize,
    /// Hidden layer sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1024,1024,1024")]
    hidden: Vec<usize>,
    /// Short-list size; must match the vocabulary's intended short list.
    #[arg(long, default_value_t = 32000)]
    shortlist: usize,
    /// Initial learning rate.
    #[arg(long, default_value_t = 0.06)]
    lr: f64,
    /// Per-epoch exponential learning-rate decay in (0, 1].
    #[arg(long, default_value_t = 0.9)]
    decay: f64,
    /// Training epochs.
    #[arg(long, default_value_t = 7)]
    epochs: usize,
    /// Minibatch size.
    #[arg(long, default_value_t = 128)]
    batch: usize,
    /// Seed for initialization and shuffling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct AdaptArgs {
    /// Trained model to adapt.
    #[arg(long)]
    model: PathBuf,
    /// Vocabulary file matching the model.
    #[arg(long)]
    vocab: PathBuf,
    /// In-domain adaptation corpus.
    #[arg(long)]
    adapt_corpus: PathBuf,
    /// Generic (training-domain) corpus to resample from.
    #[arg(long)]
    generic_corpus: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Adaptation method.
    #[arg(long, value_parser = ["continued", "layer"], default_value = "continued")]
    method: String,
    /// Target share of in-domain examples per epoch, in (0, 1).
    #[arg(long, default_value_t = 0.14)]
    share: f64,
    /// Adaptation epochs.
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    /// Initial learning rate.
    #[arg(long, default_value_t = 0.0005)]
    lr: f64,
    /// Per-epoch exponential learning-rate decay in (0, 1].
    #[arg(long, default_value_t = 0.97)]
    decay: f64,
    /// Adaptation-layer position: a layer index or `last` (method=layer).
    #[arg(long, default_value = "last")]
    layer_pos: String,
    /// Adaptation-layer activation: `tanh` or `linear` (method=layer).
    #[arg(long, default_value = "tanh")]
    activation: String,
    /// Optional generic-domain dev corpus: adds a per-epoch dev_ppl column.
    #[arg(long)]
    dev_corpus: Option<PathBuf>,
    /// Optional in-domain held-out corpus: adds a per-epoch in_domain_ppl column.
    #[arg(long)]
    heldout_corpus: Option<PathBuf>,
    /// Optional file for the per-epoch adaptation report (TSV).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for mixture resampling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct PplArgs {
    /// Trained model.
    #[arg(long)]
    model: PathBuf,
    /// Vocabulary file matching the model.
    #[arg(long)]
    vocab: PathBuf,
    /// Evaluation corpus, one sentence per line.
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct RescoreArgs {
    /// Input n-best list (` ||| `-separated fields).
    #[arg(long)]
    nbest: PathBuf,
    /// Trained model used for the extra feature.
    #[arg(long)]
    model: PathBuf,
    /// Vocabulary file matching the model.
    #[arg(long)]
    vocab: PathBuf,
    /// Feature weights, one per line; the model feature's weight comes last.
    #[arg(long)]
    weights: PathBuf,
    /// Output file for the reranked 1-best sentences, one per source.
    #[arg(long)]
    out: PathBuf,
    /// Optional output for the feature-augmented n-best list.
    #[arg(long)]
    out_nbest: Option<PathBuf>,
    /// Optional reference translations (one per source, aligned); prints BLEU.
    #[arg(long)]
    refs: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateDaysArgs {
    /// Base model trained on generic data.
    #[arg(long)]
    model: PathBuf,
    /// Vocabulary file matching the model.
    #[arg(long)]
    vocab: PathBuf,
    /// Per-day in-domain corpora in chronological order, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    days: Vec<PathBuf>,
    /// Generic corpus to resample from.
    #[arg(long)]
    generic: PathBuf,
    /// Adaptation method.
    #[arg(long, value_parser = ["continued", "layer"], default_value = "continued")]
    method: String,
    /// Adaptation-layer position (method=layer).
    #[arg(long, default_value = "last")]
    layer_pos: String,
    /// Adaptation-layer activation (method=layer).
    #[arg(long, default_value = "tanh")]
    activation: String,
    /// Generic-draw sizing: keep a fixed generic count per epoch, or target
    /// the same combined in-domain share every day.
    #[arg(long, value_parser = ["fixed-generic", "combined-share"], default_value = "fixed-generic")]
    mode: String,
    /// Expected generic examples per epoch (mode=fixed-generic).
    /// Defaults to 3× the first day's example count.
    #[arg(long)]
    generic_count: Option<usize>,
    /// Combined in-domain share per epoch, in (0, 1) (mode=combined-share).
    #[arg(long)]
    share: Option<f64>,
    /// Adaptation epochs per day.
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    /// Initial learning rate.
    #[arg(long, default_value_t = 0.0005)]
    lr: f64,
    /// Per-epoch exponential learning-rate decay in (0, 1].
    #[arg(long, default_value_t = 0.97)]
    decay: f64,
    /// Seed for day-wise resampling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Optional file for the per-day report table (TSV).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad invocation: unknown flags, invalid values, missing input files.
    Usage(String),
    /// The invocation was well-formed but the work failed.
    Runtime(String),
}

impl From<cslm_core::Error> for CliError {
    fn from(e: cslm_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::BuildVocab(args) => cmd_build_vocab(args),
        Command::Train(args) => cmd_train(args),
        Command::Adapt(args) => cmd_adapt(args),
        Command::Ppl(args) => cmd_ppl(args),
        Command::Rescore(args) => cmd_rescore(args),
        Command::SimulateDays(args) => cmd_simulate_days(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}

/// Reads an input file, mapping a missing path to a usage error.
fn read_input(path: &Path) -> CliResult<String> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "input file not found: {}",
            path.display()
        )));
    }
    fs::read_to_string(path).map_err(CliError::from)
}

fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    Ok(read_input(path)?.lines().map(str::to_string).collect())
}

fn require_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "input file not found: {}",
            path.display()
        )))
    }
}

/// Writes `bytes` atomically: to a temporary file in the target directory,
/// then renamed over `path`. An error never leaves a partial `path` behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .map_err(|e| CliError::Runtime(format!("renaming into {}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Writes `<output>.manifest` next to an output file: `key=value` lines in a
/// fixed order, enough to reproduce the output byte for byte.
fn write_manifest(output: &Path, entries: &[(&str, String)]) -> CliResult<()> {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest");
    let path = output.with_file_name(name);
    let mut text = String::new();
    for (key, value) in entries {
        let _ = writeln!(text, "{key}={value}");
    }
    write_atomic(&path, text.as_bytes())
}

fn join_usizes(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_layer_pos(raw: &str) -> CliResult<LayerPosition> {
    raw.parse::<LayerPosition>().map_err(|_| {
        CliError::Usage(format!(
            "invalid --layer-pos `{raw}`: use an index or `last`"
        ))
    })
}

fn parse_adapt_activation(raw: &str) -> CliResult<Activation> {
    match raw.parse::<Activation>() {
        Ok(a @ (Activation::Linear | Activation::Tanh)) => Ok(a),
        _ => Err(CliError::Usage(format!(
            "invalid --activation `{raw}`: use `tanh` or `linear`"
        ))),
    }
}

fn check_share(share: f64) -> CliResult<f64> {
    if share > 0.0 && share < 1.0 {
        Ok(share)
    } else {
        Err(CliError::Usage(format!(
            "--share must be strictly between 0 and 1, got {share}"
        )))
    }
}

fn check_epochs(epochs: usize) -> CliResult<usize> {
    if epochs == 0 {
        Err(CliError::Usage("--epochs must be at least 1".into()))
    } else {
        Ok(epochs)
    }
}

fn make_schedule(lr: f64, decay: f64) -> CliResult<LrSchedule> {
    LrSchedule::new(lr, decay).map_err(|e| CliError::Usage(e.to_string()))
}

/// Loads a vocabulary with the model's short-list size and checks that it
/// matches the model dimensions.
fn load_matching_vocab(path: &Path, model: &Model) -> CliResult<Vocabulary> {
    require_input(path)?;
    let vocab = Vocabulary::load(path, model.shortlist_size())?;
    if vocab.len() != model.config.vocab_size {
        return Err(CliError::Runtime(format!(
            "vocabulary has {} tokens but the model was trained with {}",
            vocab.len(),
            model.config.vocab_size
        )));
    }
    Ok(vocab)
}

fn load_model_input(path: &Path) -> CliResult<Model> {
    require_input(path)?;
    Ok(load_model(path)?)
}

fn cmd_build_vocab(args: BuildVocabArgs) -> CliResult<()> {
    let corpus = read_lines(&args.corpus)?;
    let max_vocab = if args.max_vocab == 0 {
        usize::MAX
    } else {
        args.max_vocab
    };
    let vocab = Vocabulary::build(corpus.iter(), max_vocab, args.shortlist)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let stats = vocab.coverage(corpus.iter())?;
    write_atomic(&args.out, vocab.to_file_string().as_bytes())?;
    write_manifest(
        &args.out,
        &[
            ("subcommand", "build-vocab".into()),
            ("corpus", args.corpus.display().to_string()),
            ("out", args.out.display().to_string()),
            ("shortlist", args.shortlist.to_string()),
            ("max_vocab", args.max_vocab.to_string()),
        ],
    )?;
    println!(
        "coverage={:.4} tokens={} sentences={}",
        stats.coverage, stats.tokens, stats.sentences
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    check_epochs(args.epochs)?;
    let schedule = make_schedule(args.lr, args.decay)?;
    let corpus = read_lines(&args.corpus)?;
    require_input(&args.vocab)?;
    let vocab = Vocabulary::load(&args.vocab, args.shortlist)?;

    let mut config = NetworkConfig::new(
        args.order,
        args.proj,
        args.hidden.clone(),
        vocab.shortlist_size(),
        vocab.len(),
    );
    config.batch_size = args.batch;
    config.seed = args.seed;
    let mut model = init_network(config).map_err(|e| CliError::Usage(e.to_string()))?;

    let examples = corpus_to_examples(corpus.iter(), &vocab, args.order);
    if examples.is_empty() {
        return Err(CliError::Runtime(format!(
            "no training examples in {}",
            args.corpus.display()
        )));
    }
    let stats = train(&mut model, &examples, &schedule, args.epochs)?;

    write_atomic(&args.out, &model_to_bytes(&model))?;
    write_manifest(
        &args.out,
        &[
            ("subcommand", "train".into()),
            ("corpus", args.corpus.display().to_string()),
            ("vocab", args.vocab.display().to_string()),
            ("out", args.out.display().to_string()),
            ("order", args.order.to_string()),
            ("proj", args.proj.to_string()),
            ("hidden", join_usizes(&args.hidden)),
            ("shortlist", args.shortlist.to_string()),
            ("lr", args.lr.to_string()),
            ("decay", args.decay.to_string()),
            ("epochs", args.epochs.to_string()),
            ("batch", args.batch.to_string()),
            ("seed", args.seed.to_string()),
        ],
    )?;

    println!("epoch\texamples\trate\ttrain_nll");
    for row in &stats.epochs {
        println!(
            "{}\t{}\t{:.6}\t{:.6}",
            row.epoch, row.examples, row.rate, row.mean_nll
        );
    }
    Ok(())
}

fn cmd_adapt(args: AdaptArgs) -> CliResult<()> {
    check_epochs(args.epochs)?;
    check_share(args.share)?;
    let schedule = make_schedule(args.lr, args.decay)?;
    let model = load_model_input(&args.model)?;
    let vocab = load_matching_vocab(&args.vocab, &model)?;

    let adapt_corpus = read_lines(&args.adapt_corpus)?;
    let generic_corpus = read_lines(&args.generic_corpus)?;
    let adaptation = corpus_to_examples(adapt_corpus.iter(), &vocab, model.order());
    let generic = corpus_to_examples(generic_corpus.iter(), &vocab, model.order());
    let plan = build_resample_plan(adaptation, generic, args.share, args.seed)?;

    let dev_corpus = args.dev_corpus.as_deref().map(read_lines).transpose()?;
    let heldout_corpus = args.heldout_corpus.as_deref().map(read_lines).transpose()?;
    let dev_examples = dev_corpus
        .as_ref()
        .map(|c| corpus_to_examples(c.iter(), &vocab, model.order()));
    let heldout_examples = heldout_corpus
        .as_ref()
        .map(|c| corpus_to_examples(c.iter(), &vocab, model.order()));
    let evals = EvalSets {
        dev: dev_examples.as_deref(),
        in_domain: heldout_examples.as_deref(),
    };

    let (adapted, report) = match args.method.as_str() {
        "continued" => {
            let mut m = model.clone();
            let report = continued_training(&mut m, &plan, args.epochs, &schedule, evals)?;
            (m, report)
        }
        "layer" => {
            let position = parse_layer_pos(&args.layer_pos)?;
            let activation = parse_adapt_activation(&args.activation)?;
            let spec = AdaptLayerSpec::for_model(&model, position, activation)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            adapt_with_layer(&model, &spec, &plan, args.epochs, &schedule, evals)?
        }
        other => return Err(CliError::Usage(format!("unknown method `{other}`"))),
    };

    write_atomic(&args.out, &model_to_bytes(&adapted))?;
    let opt_path = |p: &Option<PathBuf>| {
        p.as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "-".into())
    };
    write_manifest(
        &args.out,
        &[
            ("subcommand", "adapt".into()),
            ("model", args.model.display().to_string()),
            ("vocab", args.vocab.display().to_string()),
            ("adapt_corpus", args.adapt_corpus.display().to_string()),
            ("generic_corpus", args.generic_corpus.display().to_string()),
            ("out", args.out.display().to_string()),
            ("method", args.method.clone()),
            ("share", args.share.to_string()),
            ("epochs", args.epochs.to_string()),
            ("lr", args.lr.to_string()),
            ("decay", args.decay.to_string()),
            ("layer_pos", args.layer_pos.clone()),
            ("activation", args.activation.clone()),
            ("dev_corpus", opt_path(&args.dev_corpus)),
            ("heldout_corpus", opt_path(&args.heldout_corpus)),
            ("seed", args.seed.to_string()),
        ],
    )?;

    let tsv = report.to_tsv();
    if let Some(report_path) = &args.report {
        write_atomic(report_path, tsv.as_bytes())?;
    }
    print!("{tsv}");
    Ok(())
}

fn cmd_ppl(args: PplArgs) -> CliResult<()> {
    let model = load_model_input(&args.model)?;
    let vocab = load_matching_vocab(&args.vocab, &model)?;
    let corpus = read_lines(&args.corpus)?;
    let examples = corpus_to_examples(corpus.iter(), &vocab, model.order());
    if examples.is_empty() {
        return Err(CliError::Runtime(format!(
            "no evaluation examples in {}",
            args.corpus.display()
        )));
    }
    let stats = perplexity(&model, &examples)?;
    println!(
        "ppl={:.4} oos={:.4} n={}",
        stats.ppl, stats.oos_fraction, stats.total
    );
    Ok(())
}

fn cmd_rescore(args: RescoreArgs) -> CliResult<()> {
    require_input(&args.nbest)?;
    require_input(&args.weights)?;
    let model = load_model_input(&args.model)?;
    let vocab = load_matching_vocab(&args.vocab, &model)?;

    let list = NBestList::parse(&read_input(&args.nbest)?)?;
    let weights = FeatureWeights::parse(&read_input(&args.weights)?)?;
    let scored = add_model_feature(&list, &model, &vocab)?;
    let selected = rerank(&scored, &weights)?;

    let mut one_best = String::new();
    for hyp in &selected {
        one_best.push_str(&hyp.tokens.join(" "));
        one_best.push('\n');
    }
    write_atomic(&args.out, one_best.as_bytes())?;
    if let Some(out_nbest) = &args.out_nbest {
        write_atomic(out_nbest, scored.to_file_string().as_bytes())?;
    }
    let opt_path = |p: &Option<PathBuf>| {
        p.as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "-".into())
    };
    write_manifest(
        &args.out,
        &[
            ("subcommand", "rescore".into()),
            ("nbest", args.nbest.display().to_string()),
            ("model", args.model.display().to_string()),
            ("vocab", args.vocab.display().to_string()),
            ("weights", args.weights.display().to_string()),
            ("out", args.out.display().to_string()),
            ("out_nbest", opt_path(&args.out_nbest)),
            ("refs", opt_path(&args.refs)),
        ],
    )?;

    if let Some(refs_path) = &args.refs {
        let refs_lines = read_lines(refs_path)?;
        if refs_lines.len() != selected.len() {
            return Err(CliError::Runtime(format!(
                "{} references for {} reranked sentences",
                refs_lines.len(),
                selected.len()
            )));
        }
        let candidates: Vec<Vec<String>> = selected.iter().map(|h| h.tokens.clone()).collect();
        let references: Vec<Vec<Vec<String>>> = refs_lines
            .iter()
            .map(|line| vec![line.split_whitespace().map(str::to_string).collect()])
            .collect();
        let (report, _) = corpus_bleu(&candidates, &references, false)?;
        print!("{}", report.to_tsv());
    }
    Ok(())
}

fn cmd_simulate_days(args: SimulateDaysArgs) -> CliResult<()> {
    check_epochs(args.epochs)?;
    let schedule = make_schedule(args.lr, args.decay)?;
    let model = load_model_input(&args.model)?;
    let vocab = load_matching_vocab(&args.vocab, &model)?;

    let mut day_examples = Vec::with_capacity(args.days.len());
    for day_path in &args.days {
        let corpus = read_lines(day_path)?;
        day_examples.push(corpus_to_examples(corpus.iter(), &vocab, model.order()));
    }
    let generic_corpus = read_lines(&args.generic)?;
    let generic = corpus_to_examples(generic_corpus.iter(), &vocab, model.order());

    let mode = match args.mode.as_str() {
        "fixed-generic" => {
            if args.share.is_some() {
                return Err(CliError::Usage(
                    "--share only applies to --mode combined-share".into(),
                ));
            }
            let count = match args.generic_count {
                Some(0) => {
                    return Err(CliError::Usage("--generic-count must be at least 1".into()))
                }
                Some(n) => n,
                None => 3 * day_examples.first().map_or(0, Vec::len).max(1),
            };
            DayMode::FixedGenericCount(count)
        }
        "combined-share" => {
            if args.generic_count.is_some() {
                return Err(CliError::Usage(
                    "--generic-count only applies to --mode fixed-generic".into(),
                ));
            }
            let share = args
                .share
                .ok_or_else(|| CliError::Usage("--mode combined-share requires --share".into()))?;
            DayMode::CombinedShare(check_share(share)?)
        }
        other => return Err(CliError::Usage(format!("unknown mode `{other}`"))),
    };

    let method = match args.method.as_str() {
        "continued" => AdaptMethod::Continued,
        "layer" => AdaptMethod::Layer {
            position: parse_layer_pos(&args.layer_pos)?,
            activation: parse_adapt_activation(&args.activation)?,
        },
        other => return Err(CliError::Usage(format!("unknown method `{other}`"))),
    };

    let day_schedule = build_day_schedule(day_examples, generic, mode, args.seed)?;
    let outcomes = simulate_days(&model, &day_schedule, method, args.epochs, &schedule)?;

    let mut table =
        String::from("eval_day\tbaseline_ppl\tadapted_ppl\trelative_reduction\tshares\n");
    for row in &outcomes {
        let shares = row
            .shares
            .iter()
            .map(|s| format!("{s:.4}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(
            table,
            "{}\t{:.4}\t{:.4}\t{:.6}\t{}",
            row.eval_day, row.baseline_ppl, row.adapted_ppl, row.relative_reduction, shares
        );
    }
    if let Some(out) = &args.out {
        write_atomic(out, table.as_bytes())?;
        write_manifest(
            out,
            &[
                ("subcommand", "simulate-days".into()),
                ("model", args.model.display().to_string()),
                ("vocab", args.vocab.display().to_string()),
                (
                    "days",
                    args.days
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                ),
                ("generic", args.generic.display().to_string()),
                ("method", args.method.clone()),
                ("layer_pos", args.layer_pos.clone()),
                ("activation", args.activation.clone()),
                ("mode", args.mode.clone()),
                (
                    "generic_count",
                    args.generic_count.map_or("-".into(), |n| n.to_string()),
                ),
                ("share", args.share.map_or("-".into(), |s| s.to_string())),
                ("epochs", args.epochs.to_string()),
                ("lr", args.lr.to_string()),
                ("decay", args.decay.to_string()),
                ("seed", args.seed.to_string()),
            ],
        )?;
    }
    print!("{table}");
    Ok(())
}
