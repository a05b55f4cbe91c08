//! Acceptance criteria, one test per numbered criterion.
//!
//! Each test name is the pass/fail line in `cargo test` output; the body
//! additionally prints the measured numbers (visible with `--nocapture` or on
//! failure). Every tolerance, seed and size is pinned here so the suite is
//! deterministic end to end.
//!
//! Criteria 5, 6 and 10 share one synthetic two-domain world (generic domain A,
//! in-domain B with 40% of its transition table resampled), built once behind a
//! `OnceLock`: a 200k-token A corpus trains the shared order-5 base model at a
//! constant learning rate until its held-out perplexity plateaus, which is what
//! makes the adaptation comparisons meaningful.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use cslm_core::adapt::{
    adapt_with_layer, build_day_schedule, build_resample_plan, continued_training,
    insert_adaptation_layer, sample_epoch, simulate_days, AdaptLayerSpec, AdaptMethod, DayMode,
    EvalSets, LayerPosition,
};
use cslm_core::error::Error;
use cslm_core::nnlm::{
    init_network, max_gradient_rel_error, model_from_bytes, model_to_bytes, perplexity, train,
    Activation, LrSchedule, Model, NetworkConfig,
};
use cslm_core::rescore::bleu::{bleu, corpus_stats};
use cslm_core::rescore::{add_model_feature, rerank, FeatureWeights, NBestList};
use cslm_core::synth::MarkovDomain;
use cslm_core::vocab::{corpus_to_examples, NGramExample, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

fn random_examples(
    seed: u64,
    n: usize,
    order: usize,
    vocab: usize,
    shortlist: usize,
) -> Vec<NGramExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| NGramExample {
            context: (0..order - 1)
                .map(|_| rng.random_range(0..vocab as u32))
                .collect(),
            target: rng.random_range(0..shortlist as u32),
        })
        .collect()
}

// --- shared synthetic two-domain world for criteria 5, 6 and 10 ------------

struct World {
    vocab: Vocabulary,
    domain_b: MarkovDomain,
    a_examples: Vec<NGramExample>,
    a_eval: Vec<NGramExample>,
    b_examples: Vec<NGramExample>,
    b_eval: Vec<NGramExample>,
    base: Model,
    base_a: f64,
    base_b: f64,
}

fn world() -> &'static World {
    static WORLD: OnceLock<World> = OnceLock::new();
    WORLD.get_or_init(|| {
        let domain_a = MarkovDomain::build(600, 12, 0xA11CE);
        let domain_b = domain_a.related(0xB0B, 0.4);
        let a_train = domain_a.sample_tokens(200_000, 8, 20, 101);
        let a_held = domain_a.sample_tokens(10_000, 8, 20, 102);
        let b_adapt = domain_b.sample_tokens(3_000, 8, 20, 201);
        let b_held = domain_b.sample_tokens(10_000, 8, 20, 202);

        let vocab = Vocabulary::build(a_train.iter(), usize::MAX, usize::MAX).unwrap();
        let a_examples = corpus_to_examples(a_train.iter(), &vocab, 5);
        let a_eval = corpus_to_examples(a_held.iter(), &vocab, 5);
        let b_examples = corpus_to_examples(b_adapt.iter(), &vocab, 5);
        let b_eval = corpus_to_examples(b_held.iter(), &vocab, 5);

        let mut config =
            NetworkConfig::new(5, 32, vec![64, 64, 64], vocab.shortlist_size(), vocab.len());
        config.seed = 4242;
        let mut base = init_network(config).unwrap();
        // Constant rate to a plateau: held-out A no longer improves, so any
        // change under adaptation is attributable to the adaptation data.
        train(
            &mut base,
            &a_examples,
            &LrSchedule::new(0.1, 1.0).unwrap(),
            30,
        )
        .unwrap();
        let base_a = perplexity(&base, &a_eval).unwrap().ppl;
        let base_b = perplexity(&base, &b_eval).unwrap().ppl;

        World {
            vocab,
            domain_b,
            a_examples,
            a_eval,
            b_examples,
            b_eval,
            base,
            base_a,
            base_b,
        }
    })
}

fn adapt_lr() -> LrSchedule {
    LrSchedule::new(0.25, 1.0).unwrap()
}

/// Criterion-5 leg (a) — continued training at share 0.14 — cached because
/// criterion 10's desk-scale timing clause refers to the same run.
struct LegA {
    secs: f64,
    a_ppl: f64,
    b_ppl: f64,
}

fn leg_a() -> &'static LegA {
    static LEG: OnceLock<LegA> = OnceLock::new();
    LEG.get_or_init(|| {
        let w = world();
        let plan =
            build_resample_plan(w.b_examples.clone(), w.a_examples.clone(), 0.14, 77).unwrap();
        let mut model = w.base.clone();
        let t = Instant::now();
        continued_training(&mut model, &plan, 50, &adapt_lr(), EvalSets::default()).unwrap();
        let secs = t.elapsed().as_secs_f64();
        LegA {
            secs,
            a_ppl: perplexity(&model, &w.a_eval).unwrap().ppl,
            b_ppl: perplexity(&model, &w.b_eval).unwrap().ppl,
        }
    })
}

// --- criteria ---------------------------------------------------------------

/// `(order, projection, hidden sizes, hidden activations, shortlist, vocab)`.
type GradCheckConfig = (usize, usize, Vec<usize>, Vec<Activation>, usize, usize);

#[test]
fn criterion_01_gradient_oracle() {
    let t = Instant::now();
    let configs: Vec<GradCheckConfig> = vec![
        (2, 3, vec![4], vec![Activation::Tanh], 5, 7),
        (
            3,
            4,
            vec![5, 3],
            vec![Activation::Tanh, Activation::Linear],
            6,
            8,
        ),
        (
            4,
            2,
            vec![4, 4],
            vec![Activation::Linear, Activation::Tanh],
            8,
            8,
        ),
        (3, 5, vec![6], vec![Activation::Linear], 7, 8),
        (
            4,
            3,
            vec![3, 5, 4],
            vec![Activation::Tanh, Activation::Tanh, Activation::Linear],
            5,
            6,
        ),
    ];
    let n_configs = configs.len();
    assert!(n_configs >= 5);
    let mut worst = 0.0f64;
    for (i, (order, proj, hidden, acts, shortlist, vocab)) in configs.into_iter().enumerate() {
        let mut cfg = NetworkConfig::new(order, proj, hidden, shortlist, vocab);
        cfg.hidden_activations = acts;
        cfg.seed = 1000 + i as u64;
        let model = init_network(cfg).unwrap();
        let batch = random_examples(500 + i as u64, 8, order, vocab, shortlist);
        let err = max_gradient_rel_error(&model, &batch, 1e-4).unwrap();
        assert!(
            err <= 1e-4,
            "network {i}: max gradient rel error {err:.3e} > 1e-4"
        );
        worst = worst.max(err);
    }
    let secs = t.elapsed().as_secs_f64();
    assert!(secs < 10.0, "gradient oracle took {secs:.1}s, limit 10s");
    println!("criterion 1: {n_configs} networks, worst finite-difference rel error {worst:.2e} ({secs:.2}s)");
}

#[test]
fn criterion_02_identity_insertion_invariance() {
    let t = Instant::now();
    let mut cfg = NetworkConfig::new(4, 4, vec![6, 6, 6], 9, 12);
    cfg.seed = 2024;
    let model = init_network(cfg).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let contexts: Vec<Vec<u32>> = (0..100)
        .map(|_| (0..3).map(|_| rng.random_range(0..12u32)).collect())
        .collect();
    let base_probs = model.forward(&contexts).unwrap();

    // A 3-hidden-layer model has 4 insertion interfaces; `Last` is the
    // interface just before the softmax (index 3 here).
    let positions = [
        LayerPosition::Index(0),
        LayerPosition::Index(1),
        LayerPosition::Index(2),
        LayerPosition::Last,
    ];
    let mut worst = 0.0f64;
    for pos in positions {
        let spec = AdaptLayerSpec::for_model(&model, pos, Activation::Linear).unwrap();
        let inserted = insert_adaptation_layer(&model, &spec).unwrap();
        let probs = inserted.forward(&contexts).unwrap();
        for (p, q) in base_probs.iter().zip(probs.iter()) {
            worst = worst.max((p - q).abs() / p.max(f64::MIN_POSITIVE));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    assert!(
        worst <= 1e-6,
        "linear identity insertion changed a probability by {worst:.3e} relative"
    );
    assert!(
        secs < 5.0,
        "identity insertion check took {secs:.1}s, limit 5s"
    );
    println!(
        "criterion 2: 4 positions x 100 contexts, worst relative change {worst:.2e} ({secs:.2}s)"
    );
}

#[test]
fn criterion_03_freeze_soundness() {
    let mut cfg = NetworkConfig::new(3, 4, vec![6, 6], 8, 10);
    cfg.seed = 33;
    let model = init_network(cfg).unwrap();

    let plan = build_resample_plan(
        random_examples(34, 300, 3, 10, 8),
        random_examples(35, 2_000, 3, 10, 8),
        0.3,
        36,
    )
    .unwrap();
    let spec =
        AdaptLayerSpec::for_model(&model, LayerPosition::Index(1), Activation::Tanh).unwrap();
    let reference = insert_adaptation_layer(&model, &spec).unwrap();
    let (adapted, report) = adapt_with_layer(
        &model,
        &spec,
        &plan,
        50,
        &LrSchedule::new(0.1, 1.0).unwrap(),
        EvalSets::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 50);

    assert_eq!(adapted.embedding, reference.embedding, "embedding changed");
    assert_eq!(adapted.layers.len(), reference.layers.len());
    let inserted = 1;
    for l in 0..reference.layers.len() {
        if l == inserted {
            assert_ne!(
                adapted.layers[l].weight, reference.layers[l].weight,
                "inserted layer did not train"
            );
        } else {
            assert_eq!(
                adapted.layers[l].weight, reference.layers[l].weight,
                "layer {l} weight changed"
            );
            assert_eq!(
                adapted.layers[l].bias, reference.layers[l].bias,
                "layer {l} bias changed"
            );
        }
    }
    println!("criterion 3: 50 epochs; every parameter outside the inserted layer is bit-identical");
}

#[test]
fn criterion_04_resample_plan_fidelity() {
    let dummy = |n: usize| -> Vec<NGramExample> {
        (0..n)
            .map(|i| NGramExample {
                context: vec![(i % 7) as u32],
                target: (i % 5) as u32,
            })
            .collect()
    };
    let adaptation = dummy(3_220);
    let generic = dummy(25_000);

    let mut means = Vec::new();
    for (label, expected) in [("14%", 22_576.0f64), ("25%", 12_916.0)] {
        let share = 3_220.0 / expected;
        let plan = build_resample_plan(adaptation.clone(), generic.clone(), share, 404).unwrap();
        // The plan's own expectation must reproduce the table row exactly.
        let implied = 3_220.0 + plan.q * generic.len() as f64;
        assert!(
            (implied - expected).abs() < 0.5,
            "share {label}: plan implies {implied:.1} examples per epoch, table says {expected}"
        );
        let mean = (0..200)
            .map(|e| sample_epoch(&plan, e as u64).len() as f64)
            .sum::<f64>()
            / 200.0;
        assert!(
            (mean - expected).abs() <= 0.02 * expected,
            "share {label}: mean epoch size {mean:.0} outside 2% of {expected}"
        );
        means.push(mean);
    }
    println!(
        "criterion 4: |A|=3220; mean epoch sizes {:.0} (target 22576) and {:.0} (target 12916) over 200 epochs",
        means[0], means[1]
    );
}

#[test]
fn criterion_05_synthetic_adaptation_trend() {
    let w = world();
    let a = leg_a();
    let lr = adapt_lr();

    // (a) continued training at share 0.14: >= 10% relative reduction on held-out B.
    assert!(a.secs < 300.0, "leg (a) took {:.0}s, limit 300s", a.secs);
    assert!(
        a.b_ppl <= 0.90 * w.base_b,
        "leg (a): held-out B {:.2} is not a >=10% reduction of the base {:.2}",
        a.b_ppl,
        w.base_b
    );

    // (b) share 0.77: strictly worse held-out B than share 0.14 (over-fits).
    let plan77 = build_resample_plan(w.b_examples.clone(), w.a_examples.clone(), 0.77, 77).unwrap();
    let mut m77 = w.base.clone();
    let t = Instant::now();
    continued_training(&mut m77, &plan77, 50, &lr, EvalSets::default()).unwrap();
    let secs_b = t.elapsed().as_secs_f64();
    assert!(secs_b < 300.0, "leg (b) took {secs_b:.0}s, limit 300s");
    let b_ppl_77 = perplexity(&m77, &w.b_eval).unwrap().ppl;
    assert!(
        b_ppl_77 > a.b_ppl,
        "share 0.77 gave held-out B {:.2}, not worse than share 0.14's {:.2}",
        b_ppl_77,
        a.b_ppl
    );

    // (c) tanh adaptation layer at the last position: held-out B drops AND
    // held-out A degrades less than under (a).
    let plan14 = build_resample_plan(w.b_examples.clone(), w.a_examples.clone(), 0.14, 77).unwrap();
    let spec = AdaptLayerSpec::for_model(&w.base, LayerPosition::Last, Activation::Tanh).unwrap();
    let t = Instant::now();
    let (layered, _) =
        adapt_with_layer(&w.base, &spec, &plan14, 50, &lr, EvalSets::default()).unwrap();
    let secs_c = t.elapsed().as_secs_f64();
    assert!(secs_c < 300.0, "leg (c) took {secs_c:.0}s, limit 300s");
    let c_b = perplexity(&layered, &w.b_eval).unwrap().ppl;
    let c_a = perplexity(&layered, &w.a_eval).unwrap().ppl;
    assert!(
        c_b <= 0.95 * w.base_b,
        "adaptation layer: held-out B {:.2} did not drop below the base {:.2}",
        c_b,
        w.base_b
    );
    assert!(
        c_a < a.a_ppl,
        "adaptation layer degraded held-out A to {:.2}, more than continued training's {:.2}",
        c_a,
        a.a_ppl
    );

    println!(
        "criterion 5: base A {:.2} B {:.2}; (a) B {:.2} ({:+.1}%) A {:.2} in {:.0}s; \
         (b) B {:.2} ({:+.1}%); (c) B {:.2} ({:+.1}%) A {:.2}",
        w.base_a,
        w.base_b,
        a.b_ppl,
        100.0 * (a.b_ppl / w.base_b - 1.0),
        a.a_ppl,
        a.secs,
        b_ppl_77,
        100.0 * (b_ppl_77 / w.base_b - 1.0),
        c_b,
        100.0 * (c_b / w.base_b - 1.0),
        c_a
    );
}

#[test]
fn criterion_06_multi_day_windowing() {
    let w = world();
    let days: Vec<Vec<NGramExample>> = (0..5)
        .map(|d| {
            let sentences = w.domain_b.sample_tokens(1_000, 8, 20, 301 + d as u64);
            corpus_to_examples(sentences.iter(), &w.vocab, 5)
        })
        .collect();
    let schedule = build_day_schedule(
        days.clone(),
        w.a_examples.clone(),
        DayMode::FixedGenericCount(3 * days[0].len()),
        88,
    )
    .unwrap();

    // Day pools are strictly nested: each day's pool extends the previous one.
    for d in 1..5 {
        let prev = schedule.pool(d - 1);
        let cur = schedule.pool(d);
        assert!(cur.len() > prev.len(), "day {d} pool did not grow");
        assert_eq!(
            &cur[..prev.len()],
            &prev[..],
            "day {d} pool does not contain day {}",
            d - 1
        );
    }

    let outcomes =
        simulate_days(&w.base, &schedule, AdaptMethod::Continued, 15, &adapt_lr()).unwrap();
    assert_eq!(outcomes.len(), 4, "5 days must yield 4 evaluation rows");
    for o in &outcomes {
        assert!(
            o.adapted_ppl < o.baseline_ppl,
            "day {}: adapted {:.2} not below baseline {:.2}",
            o.eval_day,
            o.adapted_ppl,
            o.baseline_ppl
        );
    }
    let summary: Vec<String> = outcomes
        .iter()
        .map(|o| {
            format!(
                "day {} {:.1}->{:.1}",
                o.eval_day, o.baseline_ppl, o.adapted_ppl
            )
        })
        .collect();
    println!(
        "criterion 6: adapted below baseline on all 4 days ({})",
        summary.join(", ")
    );
}

#[test]
fn criterion_07_bleu_oracle() {
    // Identical corpus scores exactly 1.
    let cands: Vec<Vec<String>> = (0..20)
        .map(|i| {
            toks(&format!(
                "w{} w{} w{} w{} w{}",
                i,
                (i * 7) % 5,
                (i * 3) % 11,
                i % 4,
                (i + 2) % 9
            ))
        })
        .collect();
    let refs: Vec<Vec<Vec<String>>> = cands.iter().map(|c| vec![c.clone()]).collect();
    let (identical, _) = bleu(&cands, &refs, false).unwrap();
    assert_eq!(
        identical.score, 1.0,
        "identical corpus must score exactly 1.0"
    );

    // Hand-derived clipping case.
    let cands = vec![toks("the cat sat on the mat")];
    let refs = vec![vec![toks("the cat is on the mat")]];
    let (report, stats) = bleu(&cands, &refs, false).unwrap();
    assert_eq!(stats.matches, [5, 3, 1, 0]);
    assert_eq!(stats.totals, [6, 5, 4, 3]);
    assert_eq!(report.precisions, [5.0 / 6.0, 3.0 / 5.0, 1.0 / 4.0, 0.0]);
    assert_eq!(
        report.score, 0.0,
        "a zero match count must zero unsmoothed BLEU"
    );

    // Brevity penalty: all precisions 1, candidate half the reference length.
    let cands = vec![toks("a b c d e")];
    let refs = vec![vec![toks("a b c d e f g h i j")]];
    let (bp_report, _) = bleu(&cands, &refs, false).unwrap();
    assert!(
        (bp_report.score - (-1.0f64).exp()).abs() <= 1e-12,
        "BP case scored {:.15}, expected e^-1",
        bp_report.score
    );
    assert_eq!(bp_report.precisions, [1.0, 1.0, 1.0, 1.0]);

    // Stats are additive over random corpus splits.
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let cands: Vec<Vec<String>> = (0..30)
        .map(|_| {
            let len = rng.random_range(3..12);
            (0..len)
                .map(|_| format!("t{}", rng.random_range(0..6)))
                .collect()
        })
        .collect();
    let refs: Vec<Vec<Vec<String>>> = cands
        .iter()
        .map(|_| {
            let n_refs = rng.random_range(1..3);
            (0..n_refs)
                .map(|_| {
                    let len = rng.random_range(3..12);
                    (0..len)
                        .map(|_| format!("t{}", rng.random_range(0..6)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let full = corpus_stats(&cands, &refs).unwrap();
    for split in [1usize, 11, 29] {
        let left = corpus_stats(&cands[..split], &refs[..split]).unwrap();
        let right = corpus_stats(&cands[split..], &refs[split..]).unwrap();
        assert_eq!(left + right, full, "stats not additive at split {split}");
    }

    println!(
        "criterion 7: identical=1.0; cat-sat precisions 5/6 3/5 1/4 0/3 with unsmoothed 0; BP=e^-1; additivity on 3 splits"
    );
}

#[test]
fn criterion_08_rerank_contract() {
    // Positive scaling of the weight vector never changes the argmax.
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut text = String::new();
    for group in 0..1_000 {
        for h in 0..rng.random_range(2..=8) {
            let f: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            text.push_str(&format!(
                "{group} ||| w{h} w{} ||| {} {} {} ||| {}\n",
                rng.random_range(0..20u32),
                f[0],
                f[1],
                f[2],
                f.iter().sum::<f64>()
            ));
        }
    }
    let list = NBestList::parse(&text).unwrap();
    assert_eq!(list.groups.len(), 1_000);
    for trial in 0..5 {
        let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let scale = rng.random_range(0.1..10.0);
        let weights = FeatureWeights::new(raw.clone()).unwrap();
        let scaled = FeatureWeights::new(raw.iter().map(|x| x * scale).collect()).unwrap();
        let picked = rerank(&list, &weights).unwrap();
        let picked_scaled = rerank(&list, &scaled).unwrap();
        for (group, (h, hs)) in picked.iter().zip(&picked_scaled).enumerate() {
            assert!(
                std::ptr::eq(*h, *hs),
                "trial {trial}, group {group}: scaling by {scale:.3} changed the argmax"
            );
        }
    }

    // With unit weight on the CSLM feature (zero elsewhere), the selection is
    // exactly the max-CSLM-feature hypothesis.
    let corpus = [
        "alpha beta gamma delta",
        "beta gamma epsilon alpha",
        "delta alpha beta zeta",
    ];
    let vocab = Vocabulary::build(corpus.iter(), usize::MAX, usize::MAX).unwrap();
    let mut cfg = NetworkConfig::new(3, 4, vec![8], vocab.shortlist_size(), vocab.len());
    cfg.seed = 99;
    let model = init_network(cfg).unwrap();

    let words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"];
    let mut text = String::new();
    for group in 0..50 {
        for _ in 0..rng.random_range(2..=6) {
            let len = rng.random_range(1..5);
            let sent: Vec<&str> = (0..len)
                .map(|_| words[rng.random_range(0..words.len())])
                .collect();
            text.push_str(&format!(
                "{group} ||| {} ||| {} {}\n",
                sent.join(" "),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ));
        }
    }
    let list = NBestList::parse(&text).unwrap();
    let with_model = add_model_feature(&list, &model, &vocab).unwrap();
    let unit_model = FeatureWeights::new(vec![0.0, 0.0, 1.0]).unwrap();
    let picked = rerank(&with_model, &unit_model).unwrap();
    for (group, selected) in with_model.groups.iter().zip(picked) {
        let best = group
            .hypotheses
            .iter()
            .map(|h| h.features[2])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(
            selected.features[2], best,
            "group {}: unit CSLM weight did not pick the max-CSLM hypothesis",
            group.source_id
        );
    }

    println!("criterion 8: argmax invariant under positive scaling on 1000 groups x 5 weight draws; unit-CSLM weight picks max-CSLM hypothesis on 50 groups");
}

#[test]
fn criterion_09_determinism_and_serialization() {
    // Identical manifests (same flags, same inputs) produce byte-identical
    // model files through the CLI.
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let mut lines = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..200 {
        let len = rng.random_range(4..12);
        let words: Vec<String> = (0..len)
            .map(|_| format!("v{}", rng.random_range(0..30)))
            .collect();
        lines.push_str(&words.join(" "));
        lines.push('\n');
    }
    std::fs::write(&corpus, lines).unwrap();

    let cslm = env!("CARGO_BIN_EXE_cslm");
    let vocab_path = dir.path().join("vocab.txt");
    let status = Command::new(cslm)
        .args(["build-vocab", "--corpus"])
        .arg(&corpus)
        .arg("--out")
        .arg(&vocab_path)
        .args(["--shortlist", "20"])
        .status()
        .unwrap();
    assert!(status.success());

    let train = |out: &std::path::Path| {
        let status = Command::new(cslm)
            .args(["train", "--corpus"])
            .arg(&corpus)
            .arg("--vocab")
            .arg(&vocab_path)
            .arg("--out")
            .arg(out)
            .args([
                "--order",
                "3",
                "--proj",
                "4",
                "--hidden",
                "8",
                "--shortlist",
                "20",
            ])
            .args([
                "--lr", "0.1", "--decay", "0.9", "--epochs", "2", "--seed", "11",
            ])
            .status()
            .unwrap();
        assert!(status.success());
    };
    let model1 = dir.path().join("m1.bin");
    let model2 = dir.path().join("m2.bin");
    train(&model1);
    train(&model2);
    let manifest1 = std::fs::read_to_string(dir.path().join("m1.bin.manifest")).unwrap();
    let manifest2 = std::fs::read_to_string(dir.path().join("m2.bin.manifest")).unwrap();
    let strip = |m: &str| -> String {
        m.lines()
            .filter(|l| !l.starts_with("out="))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&manifest1), strip(&manifest2), "manifests differ");
    let bytes1 = std::fs::read(&model1).unwrap();
    let bytes2 = std::fs::read(&model2).unwrap();
    assert_eq!(
        bytes1, bytes2,
        "identical manifests produced different model files"
    );

    // Save -> load -> save is bit-exact.
    let loaded = model_from_bytes(&bytes1).unwrap();
    assert_eq!(
        model_to_bytes(&loaded),
        bytes1,
        "save/load round trip is not bit-exact"
    );

    // Corruptions map to their error classes.
    let mut bad_magic = bytes1.clone();
    bad_magic[0] ^= 0xff;
    assert!(matches!(
        model_from_bytes(&bad_magic),
        Err(Error::FormatVersion(_))
    ));

    let mut bad_version = bytes1.clone();
    bad_version[8] = 99;
    assert!(matches!(
        model_from_bytes(&bad_version),
        Err(Error::FormatVersion(_))
    ));

    assert!(matches!(
        model_from_bytes(&bytes1[..20]),
        Err(Error::Truncated(_))
    ));

    let mut bad_dims = bytes1.clone();
    bad_dims[16] = bad_dims[16].wrapping_add(1); // projection_dim no longer matches payload
    assert!(matches!(
        model_from_bytes(&bad_dims),
        Err(Error::InvalidDimensions(_))
    ));

    let mut bad_payload = bytes1.clone();
    let mid = bad_payload.len() - 100;
    bad_payload[mid] ^= 0x01;
    assert!(matches!(
        model_from_bytes(&bad_payload),
        Err(Error::ChecksumMismatch { .. })
    ));

    println!("criterion 9: CLI retrain byte-identical; save/load bit-exact; 5 corruption classes rejected correctly");
}

#[test]
fn criterion_10_adaptation_speed() {
    // Desk scale: the criterion-5 continued-training leg must finish well
    // inside 5 minutes.
    let desk = leg_a();
    assert!(
        desk.secs < 300.0,
        "desk-scale leg took {:.0}s, limit 300s",
        desk.secs
    );

    // Full scale: 50 epochs of continued training on a 1024-wide, order-28
    // network at ~22.6k examples per epoch, under 15 minutes.
    let domain = MarkovDomain::build(2_200, 12, 0xCAFE);
    let generic_sentences = domain.sample_tokens(25_000, 8, 20, 401);
    let adapt_sentences = domain.sample_tokens(3_100, 8, 20, 402);
    let vocab = Vocabulary::build(generic_sentences.iter(), usize::MAX, 320).unwrap();
    let generic = corpus_to_examples(generic_sentences.iter(), &vocab, 28);
    let mut adaptation = corpus_to_examples(adapt_sentences.iter(), &vocab, 28);
    adaptation.truncate(3_220);
    assert_eq!(
        adaptation.len(),
        3_220,
        "adaptation corpus too small for the Table-3 row"
    );
    assert!(generic.len() >= 20_000);

    let plan = build_resample_plan(adaptation, generic, 3_220.0 / 22_576.0, 7).unwrap();
    let mut cfg = NetworkConfig::new(28, 32, vec![1_024], vocab.shortlist_size(), vocab.len());
    cfg.seed = 4242;
    let mut model = init_network(cfg).unwrap();

    let t = Instant::now();
    let report = continued_training(
        &mut model,
        &plan,
        50,
        &LrSchedule::new(0.06, 0.9).unwrap(),
        EvalSets::default(),
    )
    .unwrap();
    let secs = t.elapsed().as_secs_f64();

    let mean_epoch =
        report.rows.iter().map(|r| r.epoch_size as f64).sum::<f64>() / report.rows.len() as f64;
    assert!(
        (mean_epoch - 22_576.0).abs() <= 0.02 * 22_576.0,
        "mean epoch size {mean_epoch:.0} is not ~22.6k"
    );
    assert!(
        secs < 900.0,
        "full-scale adaptation took {secs:.0}s, limit 900s"
    );
    println!(
        "criterion 10: full scale 50 epochs x {:.0} examples in {:.0}s (< 900s); desk-scale leg {:.0}s (< 300s)",
        mean_epoch, secs, desk.secs
    );
}
