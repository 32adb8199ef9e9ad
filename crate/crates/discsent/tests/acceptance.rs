//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `--nocapture`).
//!
//! Run with `cargo test -p discsent --test acceptance`.

mod common;

use std::path::Path;
use std::time::Instant;

use discsent_core::discourse::{
    builtin_conjunction_lexicon, extract_next_example, extract_order_pairs, match_conjunction,
    Category, Record,
};
use discsent_core::encoder::{EncoderConfig, EncoderKind};
use discsent_core::model::{EncodedConjunction, EncodedNext, EncodedOrder, Model};
use discsent_core::optim::{
    adagrad_update, gradient_check, Gradients, ParamStore, Parameter, ADAGRAD_EPS,
    GRAD_CHECK_STEP,
};
use discsent_core::retrieval::{nearest_neighbors, SentenceIndex};
use discsent_core::rng::Rng;
use discsent_core::schedule::{TaskKind, TaskSchedule, ALL_TASKS};
use discsent_core::tape::Tape;
use discsent_core::tensor::Tensor;
use discsent_core::text::{tokenize, Paragraph, Sentence};
use discsent_core::train::{evaluate_intrinsic, TaskData, TrainConfig, Trainer};
use discsent_core::vocab::Vocabulary;

use discsent::extract::{build_datasets, BuildOptions};
use discsent::training::{run_training, TrainOptions};

const GRAD_TOLERANCE: f64 = 1e-4;

fn toy_vocab(size: usize) -> Vocabulary {
    let sentences: Vec<Sentence> = (0..size)
        .map(|i| Sentence::from_tokens([format!("w{i:03}")]))
        .collect();
    Vocabulary::build(&sentences, 1)
}

fn random_ids(rng: &mut Rng, vocab_size: u64, min_len: usize, max_len: usize) -> Vec<u32> {
    let len = min_len + rng.next_below((max_len - min_len + 1) as u64) as usize;
    (0..len)
        .map(|_| 1 + rng.next_below(vocab_size - 1) as u32)
        .collect()
}

fn random_task_data(rng: &mut Rng, vocab_size: u64, per_task: usize) -> TaskData {
    let mut data = TaskData::default();
    for _ in 0..per_task {
        data.order.push(EncodedOrder {
            s0: random_ids(rng, vocab_size, 3, 7),
            s1: random_ids(rng, vocab_size, 3, 7),
            swapped: rng.next_bit(),
        });
        data.conjunction.push(EncodedConjunction {
            s0: random_ids(rng, vocab_size, 3, 7),
            s1: random_ids(rng, vocab_size, 3, 7),
            category: rng.next_below(9) as usize,
        });
        data.next.push(EncodedNext {
            context: [
                random_ids(rng, vocab_size, 3, 6),
                random_ids(rng, vocab_size, 3, 6),
                random_ids(rng, vocab_size, 3, 6),
            ],
            candidates: (0..5).map(|_| random_ids(rng, vocab_size, 3, 6)).collect(),
            answer: rng.next_below(5) as usize,
        });
    }
    data
}

fn randomize_store(store: &mut ParamStore<f64>, rng: &mut Rng, scale: f64) {
    for id in store.ids().collect::<Vec<_>>() {
        let len = store.value(id).len();
        let data: Vec<f64> = (0..len).map(|_| rng.next_range(-scale, scale)).collect();
        store.param_mut(id).value.data_mut().copy_from_slice(&data);
    }
}

/// Criterion 1: every differentiable operation and every full per-task
/// loss on a D=8 toy model passes central-difference checking at 1e-4
/// in 64-bit mode across at least 20 seeds, in under a minute.
#[test]
fn criterion_1_gradient_correctness() {
    let started = Instant::now();

    // Operation-level checks on random small shapes.
    for seed in 0..20u64 {
        let mut rng = Rng::new(seed);
        let mut store: ParamStore<f64> = ParamStore::new();
        let m = 1 + rng.next_below(3) as usize;
        let k = 1 + rng.next_below(3) as usize;
        let n = 2 + rng.next_below(3) as usize;
        let a = store.add("a", random_tensor(&mut rng, &[m, k]));
        let b = store.add("b", random_tensor(&mut rng, &[k, n]));
        let c = store.add("c", random_tensor(&mut rng, &[m, n]));
        let target = rng.next_below((m * n) as u64) as usize;
        let report = gradient_check(
            &mut store,
            |s| {
                let mut tape = Tape::new(s);
                let na = tape.param(a);
                let nb = tape.param(b);
                let nc = tape.param(c);
                let prod = tape.matmul(na, nb).unwrap();
                let summed = tape.add(prod, nc).unwrap();
                let gated = tape.sigmoid(summed);
                let squashed = tape.tanh(nc);
                let mixed = tape.mul(gated, squashed).unwrap();
                let shifted = tape.sub(mixed, nc).unwrap();
                let flat = tape.reshape(shifted, &[1, m * n]).unwrap();
                let doubled = tape.concat(&[flat, flat]);
                let loss = tape.softmax_cross_entropy(doubled, target).unwrap();
                (tape.scalar_value(loss), tape.backward(loss))
            },
            GRAD_CHECK_STEP,
        );
        assert!(
            report.max_rel_err < GRAD_TOLERANCE,
            "op check seed {seed}: {} at {}[{}]",
            report.max_rel_err,
            report.worst_param,
            report.worst_coord
        );
    }

    // Full per-task losses on a D=8 toy model (BiGRU, 4 per direction).
    let config = EncoderConfig {
        kind: EncoderKind::Bigru,
        d_emb: 8,
        d_h: 4,
    };
    for seed in 0..20u64 {
        let mut model: Model<f64> = Model::new(config, toy_vocab(13), None, seed).unwrap();
        let mut rng = Rng::new(1000 + seed);
        randomize_store(&mut model.store, &mut rng, 0.5);
        let order = EncodedOrder {
            s0: random_ids(&mut rng, 14, 2, 4),
            s1: random_ids(&mut rng, 14, 2, 4),
            swapped: rng.next_bit(),
        };
        let conj = EncodedConjunction {
            s0: random_ids(&mut rng, 14, 2, 4),
            s1: random_ids(&mut rng, 14, 2, 4),
            category: rng.next_below(9) as usize,
        };
        let next = EncodedNext {
            context: [
                random_ids(&mut rng, 14, 2, 3),
                random_ids(&mut rng, 14, 2, 3),
                random_ids(&mut rng, 14, 2, 3),
            ],
            candidates: (0..5).map(|_| random_ids(&mut rng, 14, 2, 3)).collect(),
            answer: rng.next_below(5) as usize,
        };

        let encoder = model.encoder.clone();
        let order_head = model.order_head.clone();
        let conjunction_head = model.conjunction_head.clone();
        let next_head = model.next_head.clone();
        let vocab = model.vocab.clone();
        let mut check = |task: TaskKind| {
            let view_encoder = encoder.clone();
            let view_order = order_head.clone();
            let view_conj = conjunction_head.clone();
            let view_next = next_head.clone();
            let view_vocab = vocab.clone();
            let order = order.clone();
            let conj = conj.clone();
            let next = next.clone();
            let report = gradient_check(
                &mut model.store,
                move |s| {
                    let view = Model {
                        store: s.clone(),
                        encoder: view_encoder.clone(),
                        order_head: view_order.clone(),
                        conjunction_head: view_conj.clone(),
                        next_head: view_next.clone(),
                        vocab: view_vocab.clone(),
                    };
                    let mut tape = Tape::new(&view.store);
                    let loss = match task {
                        TaskKind::Order => view.order_loss(&mut tape, &order).unwrap(),
                        TaskKind::Conjunction => {
                            view.conjunction_loss(&mut tape, &conj).unwrap()
                        }
                        TaskKind::Next => view.next_loss(&mut tape, &next).unwrap(),
                    };
                    (tape.scalar_value(loss), tape.backward(loss))
                },
                GRAD_CHECK_STEP,
            );
            assert!(
                report.max_rel_err < GRAD_TOLERANCE,
                "{task:?} seed {seed}: {} at {}[{}]",
                report.max_rel_err,
                report.worst_param,
                report.worst_coord
            );
        };
        check(TaskKind::Order);
        check(TaskKind::Conjunction);
        check(TaskKind::Next);
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "gradient suite took {elapsed:?}, budget is one minute"
    );
    println!("ACCEPTANCE 1 PASS: all gradients within 1e-4 across 20 seeds in {elapsed:?}");
}

fn random_tensor(rng: &mut Rng, shape: &[usize]) -> Tensor<f64> {
    let len = shape.iter().product();
    let data = (0..len).map(|_| rng.next_range(-1.0, 1.0)).collect();
    Tensor::from_vec(shape, data).unwrap()
}

/// Criterion 2: the built-in lexicon is exactly the 40-phrase,
/// 9-category grouping, and the three reference pairs with their
/// conjunctions re-attached extract to return / strengthen / contrast.
#[test]
fn criterion_2_lexicon_fidelity() {
    let expected: [(&str, Category); 40] = [
        ("again", Category::Addition),
        ("also", Category::Addition),
        ("besides", Category::Addition),
        ("finally", Category::Addition),
        ("further", Category::Addition),
        ("furthermore", Category::Addition),
        ("moreover", Category::Addition),
        ("in addition", Category::Addition),
        ("anyway", Category::Contrast),
        ("contrarily", Category::Contrast),
        ("however", Category::Contrast),
        ("conversely", Category::Contrast),
        ("instead", Category::Contrast),
        ("nonetheless", Category::Contrast),
        ("nevertheless", Category::Contrast),
        ("in contrast", Category::Contrast),
        ("otherwise", Category::Contrast),
        ("rather", Category::Contrast),
        ("meanwhile", Category::Time),
        ("next", Category::Time),
        ("then", Category::Time),
        ("now", Category::Time),
        ("thereafter", Category::Time),
        ("accordingly", Category::Result),
        ("consequently", Category::Result),
        ("hence", Category::Result),
        ("thus", Category::Result),
        ("therefore", Category::Result),
        ("namely", Category::Specific),
        ("specifically", Category::Specific),
        ("notably", Category::Specific),
        ("that is", Category::Specific),
        ("for example", Category::Specific),
        ("likewise", Category::Compare),
        ("similarly", Category::Compare),
        ("indeed", Category::Strengthen),
        ("in fact", Category::Strengthen),
        ("still", Category::Return),
        ("undoubtedly", Category::Recognize),
        ("certainly", Category::Recognize),
    ];
    let lexicon = builtin_conjunction_lexicon();
    assert_eq!(lexicon.phrase_count(), 40);
    assert_eq!(lexicon.categories().len(), 9);
    for (phrase, category) in expected {
        assert_eq!(
            lexicon.category_of(phrase),
            Some(category),
            "phrase '{phrase}'"
        );
    }

    let cases = [
        ("still, for good measure, i pouted.", Category::Return),
        ("in fact, it's exhilarating.", Category::Strengthen),
        ("otherwise, there was silence.", Category::Contrast),
    ];
    for (sentence, category) in cases {
        let tokens = tokenize(sentence).unwrap();
        let matched = match_conjunction(&lexicon, &tokens).unwrap();
        assert_eq!(matched.category, category, "sentence '{sentence}'");
    }
    println!("ACCEPTANCE 2 PASS: lexicon matches the 40-phrase grouping; reference pairs classify correctly");
}

/// Criterion 3: zero-initialized heads start at ln 2 / ln 9 / ln 5
/// within 1e-6.
#[test]
fn criterion_3_loss_calibration() {
    let config = EncoderConfig {
        kind: EncoderKind::Bigru,
        d_emb: 6,
        d_h: 4,
    };
    let model: Model<f32> = Model::new(config, toy_vocab(10), None, 3).unwrap();
    let mut rng = Rng::new(8);
    let order = EncodedOrder {
        s0: random_ids(&mut rng, 11, 3, 5),
        s1: random_ids(&mut rng, 11, 3, 5),
        swapped: true,
    };
    let conj = EncodedConjunction {
        s0: random_ids(&mut rng, 11, 3, 5),
        s1: random_ids(&mut rng, 11, 3, 5),
        category: 4,
    };
    let next = EncodedNext {
        context: [
            random_ids(&mut rng, 11, 3, 4),
            random_ids(&mut rng, 11, 3, 4),
            random_ids(&mut rng, 11, 3, 4),
        ],
        candidates: (0..5).map(|_| random_ids(&mut rng, 11, 3, 4)).collect(),
        answer: 1,
    };
    let mut tape = Tape::new(&model.store);
    let cases = [
        (
            model.order_loss(&mut tape, &order).unwrap(),
            core::f64::consts::LN_2,
            "order",
        ),
        (
            model.conjunction_loss(&mut tape, &conj).unwrap(),
            (9.0f64).ln(),
            "conjunction",
        ),
        (
            model.next_loss(&mut tape, &next).unwrap(),
            (5.0f64).ln(),
            "next",
        ),
    ];
    for (node, want, task) in cases {
        let got = tape.scalar_value(node) as f64;
        assert!(
            (got - want).abs() < 1e-6,
            "{task}: initial loss {got}, want {want}"
        );
    }
    println!("ACCEPTANCE 3 PASS: initial losses equal ln 2 / ln 9 / ln 5 within 1e-6");
}

/// Criterion 4: with default factors every 17-step window holds
/// exactly 12 ORDER, 3 CONJUNCTION, 2 NEXT.
#[test]
fn criterion_4_schedule_exactness() {
    let schedule = TaskSchedule::with_defaults(&ALL_TASKS);
    let steps: Vec<TaskKind> = schedule.take(3400).collect();
    for (at, window) in steps.windows(17).enumerate() {
        let order = window.iter().filter(|t| **t == TaskKind::Order).count();
        let conj = window
            .iter()
            .filter(|t| **t == TaskKind::Conjunction)
            .count();
        let next = window.iter().filter(|t| **t == TaskKind::Next).count();
        assert_eq!(
            (order, conj, next),
            (12, 3, 2),
            "window starting at step {at}"
        );
    }
    println!("ACCEPTANCE 4 PASS: every 17-step window is exactly 12/3/2");
}

fn read_dataset_dir(dir: &Path) -> Vec<u8> {
    let mut blob = Vec::new();
    for name in [
        "order.jsonl",
        "order.heldout.jsonl",
        "conjunction.jsonl",
        "conjunction.heldout.jsonl",
        "next.jsonl",
        "next.heldout.jsonl",
        "vocab.tsv",
        "stats.json",
    ] {
        blob.extend(std::fs::read(dir.join(name)).unwrap());
        blob.push(0);
    }
    blob
}

/// Criterion 5: build-data is byte-deterministic and 200 training
/// steps are bit-deterministic.
#[test]
fn criterion_5_determinism() {
    let corpus = tempfile::tempdir().unwrap();
    common::generate_corpus(corpus.path(), 60, 11);

    let build = |workers: usize| {
        let out = tempfile::tempdir().unwrap();
        build_datasets(&BuildOptions {
            corpus_dir: corpus.path().to_path_buf(),
            out_dir: out.path().to_path_buf(),
            seed: 21,
            heldout_fraction: 0.1,
            min_count: 2,
            workers: Some(workers),
        })
        .unwrap();
        (read_dataset_dir(out.path()), out)
    };
    let (first, data_dir) = build(1);
    let (second, _keep) = build(4);
    assert_eq!(first, second, "build-data outputs differ across runs");

    let train = |tag: &str| {
        let out = tempfile::tempdir().unwrap();
        let path = out.path().join(format!("{tag}.dsc"));
        run_training(&TrainOptions {
            data_dir: data_dir.path().to_path_buf(),
            out_path: path.clone(),
            metrics_path: Some(out.path().join("metrics.jsonl")),
            embeddings: None,
            config: TrainConfig {
                encoder: EncoderConfig {
                    kind: EncoderKind::Bigru,
                    d_emb: 8,
                    d_h: 6,
                },
                lr: 0.05,
                batch_size: 8,
                steps: 200,
                seed: 4,
                ..TrainConfig::default()
            },
            eval_every: 0,
            checkpoint_every: 0,
        })
        .unwrap();
        std::fs::read(path).unwrap()
    };
    assert_eq!(train("a"), train("b"), "checkpoints differ across runs");
    println!("ACCEPTANCE 5 PASS: extraction bytes and 200-step checkpoints are run-identical");
}

/// Criterion 6a: a joint BiGRU model overfits 32 frozen examples per
/// task to at least 95% training accuracy within 5000 steps.
#[test]
fn criterion_6a_overfit() {
    let started = Instant::now();
    let mut rng = Rng::new(31);
    let vocab_size = 40u64;
    let data = random_task_data(&mut rng, vocab_size, 32);
    let config = TrainConfig {
        encoder: EncoderConfig {
            kind: EncoderKind::Bigru,
            d_emb: 24,
            d_h: 24,
        },
        lr: 0.1,
        batch_size: 32,
        steps: 5000,
        seed: 6,
        ..TrainConfig::default()
    };
    let model: Model<f32> =
        Model::new(config.encoder, toy_vocab(vocab_size as usize - 1), None, config.seed).unwrap();
    let mut trainer = Trainer::new(model, config, data).unwrap();

    let mut reached = None;
    for step in 1..=5000u64 {
        trainer.train_step().unwrap();
        if step % 250 == 0 {
            let report =
                evaluate_intrinsic(&trainer.model, &trainer.data, &ALL_TASKS).unwrap();
            let accs = [
                report.order.unwrap().accuracy,
                report.conjunction.unwrap().accuracy,
                report.next.unwrap().accuracy,
            ];
            if accs.iter().all(|a| *a >= 0.95) {
                reached = Some((step, accs));
                break;
            }
        }
    }
    let (step, accs) = reached.expect("did not reach 95% training accuracy within 5000 steps");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 900, "overfit run took {elapsed:?}");
    println!(
        "ACCEPTANCE 6a PASS: train accuracy {accs:?} at step {step} in {elapsed:?}"
    );
}

/// Criterion 6b: on a 2000+-paragraph corpus, 2000 joint steps push
/// held-out accuracy past chance on all three tasks.
#[test]
fn criterion_6b_generalization() {
    let started = Instant::now();
    let corpus = tempfile::tempdir().unwrap();
    common::generate_corpus(corpus.path(), 2200, 77);

    let data_dir = tempfile::tempdir().unwrap();
    let stats = build_datasets(&BuildOptions {
        corpus_dir: corpus.path().to_path_buf(),
        out_dir: data_dir.path().to_path_buf(),
        seed: 7,
        heldout_fraction: 0.05,
        min_count: 2,
        workers: None,
    })
    .unwrap();
    assert!(stats.paragraphs >= 2000, "corpus too small: {stats:?}");
    assert!(stats.order.heldout > 100 && stats.next.heldout > 20);

    let out = tempfile::tempdir().unwrap();
    let outcome = run_training(&TrainOptions {
        data_dir: data_dir.path().to_path_buf(),
        out_path: out.path().join("model.dsc"),
        metrics_path: None,
        embeddings: None,
        config: TrainConfig {
            encoder: EncoderConfig {
                kind: EncoderKind::Bigru,
                d_emb: 32,
                d_h: 32,
            },
            lr: 0.1,
            batch_size: 16,
            steps: 2000,
            seed: 9,
            ..TrainConfig::default()
        },
        eval_every: 0,
        checkpoint_every: 0,
    })
    .unwrap();

    let report = outcome.heldout.expect("held-out evaluation ran");
    let order = report.order.unwrap();
    let conj = report.conjunction.unwrap();
    let next = report.next.unwrap();
    assert!(
        order.accuracy >= 0.55,
        "order accuracy {} below 0.55",
        order.accuracy
    );
    assert!(
        next.accuracy >= 0.25,
        "next accuracy {} below 0.25",
        next.accuracy
    );
    assert!(
        conj.accuracy > conj.chance,
        "conjunction accuracy {} not above majority-class chance {}",
        conj.accuracy,
        conj.chance
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 1800, "generalization run took {elapsed:?}");
    println!(
        "ACCEPTANCE 6b PASS: heldout order {:.3} (>=0.55), next {:.3} (>=0.25), conjunction {:.3} (chance {:.3}) in {elapsed:?}",
        order.accuracy, next.accuracy, conj.accuracy, conj.chance
    );
}

/// Criterion 7: the first AdaGrad step has per-coordinate magnitude
/// lr within 1e-6 for gradients bounded away from zero, and the
/// accumulator never decreases over 1000 steps.
#[test]
fn criterion_7_adagrad_property() {
    let mut rng = Rng::new(17);
    for _ in 0..50 {
        let coords = 1 + rng.next_below(8) as usize;
        let lr = rng.next_range(0.001, 0.5);
        let mut p: Parameter<f64> = Parameter::new(Tensor::zeros(&[1, coords]));
        let grads: Vec<f64> = (0..coords)
            .map(|_| {
                let magnitude = rng.next_range(0.1, 10.0);
                if rng.next_bit() {
                    magnitude
                } else {
                    -magnitude
                }
            })
            .collect();
        p.grad = Tensor::from_vec(&[1, coords], grads.clone()).unwrap();
        adagrad_update(&mut p, lr, ADAGRAD_EPS).unwrap();
        for (value, g) in p.value.data().iter().zip(&grads) {
            let magnitude = value.abs();
            assert!(
                (magnitude - lr).abs() <= lr * 1e-6,
                "first step magnitude {magnitude} vs lr {lr}"
            );
            assert!(value.signum() == -g.signum(), "step must oppose gradient");
        }
    }

    let mut p: Parameter<f64> = Parameter::new(Tensor::zeros(&[1, 4]));
    let mut previous = vec![0.0f64; 4];
    for _ in 0..1000 {
        let g: Vec<f64> = (0..4).map(|_| rng.next_range(-3.0, 3.0)).collect();
        p.grad = Tensor::from_vec(&[1, 4], g).unwrap();
        adagrad_update(&mut p, 0.01, ADAGRAD_EPS).unwrap();
        for (acc, prev) in p.accumulator.data().iter().zip(&previous) {
            assert!(acc >= prev, "accumulator decreased: {acc} < {prev}");
        }
        previous.copy_from_slice(p.accumulator.data());
    }
    println!("ACCEPTANCE 7 PASS: first-step magnitude is lr·(1±1e-6); accumulators monotone over 1000 steps");
}

/// Criterion 8: querying an index with one of its own sentences
/// returns that sentence first at distance exactly zero, and results
/// are sorted nondecreasing.
#[test]
fn criterion_8_retrieval_sanity() {
    let mut rng = Rng::new(23);
    for trial in 0..20 {
        let dim = 1 + rng.next_below(16) as usize;
        let n = 2 + rng.next_below(50) as usize;
        let mut index = SentenceIndex::new(dim);
        for i in 0..n {
            let row: Vec<f32> = (0..dim)
                .map(|_| rng.next_range(-3.0, 3.0) as f32)
                .collect();
            index.push(&row, format!("sentence {i}"));
        }
        let probe = rng.next_below(n as u64) as usize;
        let hits = nearest_neighbors(&index, index.row(probe), n);
        assert_eq!(hits[0].1, 0.0, "trial {trial}: self distance not zero");
        assert_eq!(
            index.sentence(hits[0].0),
            index.sentence(probe),
            "trial {trial}: wrong first hit"
        );
        assert!(
            hits.windows(2).all(|w| w[0].1 <= w[1].1),
            "trial {trial}: distances not sorted"
        );
    }
    println!("ACCEPTANCE 8 PASS: self-queries return distance 0 first; results sorted");
}

/// Criterion 9: checkpoints round-trip bit-exactly, JSONL records
/// reparse to equal examples, and NEXT invariants hold on 100% of
/// extracted records over a fuzz corpus.
#[test]
fn criterion_9_format_round_trips() {
    // Checkpoint file round trip.
    let config = EncoderConfig {
        kind: EncoderKind::Bigru,
        d_emb: 6,
        d_h: 5,
    };
    let mut model: Model<f32> = Model::new(config, toy_vocab(17), None, 2).unwrap();
    let mut rng = Rng::new(5);
    for id in model.store.ids().collect::<Vec<_>>() {
        let len = model.store.value(id).len();
        let data: Vec<f32> = (0..len)
            .map(|_| rng.next_range(-0.7, 0.7) as f32)
            .collect();
        model.store.param_mut(id).value.data_mut().copy_from_slice(&data);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.dsc");
    std::fs::write(&path, discsent_core::checkpoint::encode_checkpoint(&model)).unwrap();
    let loaded = discsent_core::checkpoint::decode_checkpoint(&std::fs::read(&path).unwrap())
        .unwrap();
    for id in model.store.ids() {
        assert_eq!(
            model.store.value(id).data(),
            loaded.store.value(id).data(),
            "tensor {}",
            model.store.name(id)
        );
    }

    // Fuzz corpus: generated narrative plus random punctuation-heavy
    // paragraphs, all flowing through segmentation and extraction.
    let corpus_dir = tempfile::tempdir().unwrap();
    common::generate_corpus(corpus_dir.path(), 120, 3);
    let mut fuzz = String::new();
    let words = ["a", "bb", "ccc", "d-d", "e'e", "...", "\"q\"", "(p)", "x9"];
    for p in 0..200 {
        let sentences = 1 + rng.next_below(14) as usize;
        for _ in 0..sentences {
            let len = 1 + rng.next_below(7) as usize;
            for i in 0..len {
                if i > 0 {
                    fuzz.push(' ');
                }
                fuzz.push_str(words[rng.next_below(words.len() as u64) as usize]);
            }
            fuzz.push_str(match rng.next_below(3) {
                0 => "! ",
                1 => "? ",
                _ => ". ",
            });
        }
        fuzz.push_str("\n\n");
        let _ = p;
    }
    std::fs::write(corpus_dir.path().join("fuzz.txt"), fuzz).unwrap();

    let out_dir = tempfile::tempdir().unwrap();
    let stats = build_datasets(&BuildOptions {
        corpus_dir: corpus_dir.path().to_path_buf(),
        out_dir: out_dir.path().to_path_buf(),
        seed: 13,
        heldout_fraction: 0.2,
        min_count: 1,
        workers: Some(2),
    })
    .unwrap();
    assert!(stats.next.total > 50, "fuzz corpus produced too few NEXT examples");

    let mut checked = 0usize;
    for name in [
        "order.jsonl",
        "order.heldout.jsonl",
        "conjunction.jsonl",
        "conjunction.heldout.jsonl",
        "next.jsonl",
        "next.heldout.jsonl",
    ] {
        let text = std::fs::read_to_string(out_dir.path().join(name)).unwrap();
        for line in text.lines() {
            let record: Record = serde_json::from_str(line).unwrap();
            let reserialized = serde_json::to_string(&record).unwrap();
            assert_eq!(reserialized, line, "round trip changed a record in {name}");
            if let Record::Next(ex) = &record {
                assert_eq!(ex.context.len(), 3);
                assert_eq!(ex.candidates.len(), 5);
                assert!(ex.answer < 5);
            }
            checked += 1;
        }
    }
    assert!(checked > 1000, "only {checked} records checked");

    // NEXT construction invariant against source paragraphs.
    let mut next_checked = 0usize;
    for seed in 0..300u64 {
        let mut para_rng = Rng::new(seed);
        let n = 1 + para_rng.next_below(14) as usize;
        let sentences: Vec<Sentence> = (0..n)
            .map(|i| {
                let mut tokens = vec![format!("s{seed}x{i}")];
                for _ in 0..para_rng.next_below(4) {
                    tokens.push(format!("t{}", para_rng.next_below(20)));
                }
                Sentence::from_tokens(tokens)
            })
            .collect();
        let paragraph = Paragraph {
            doc_id: "fuzz".into(),
            index: seed as usize,
            sentences,
        };
        let mut rng = Rng::new(seed ^ 0xABCD);
        if let Some(ex) = extract_next_example(&paragraph, &mut rng) {
            assert_eq!(ex.context.len(), 3);
            assert_eq!(ex.candidates.len(), 5);
            assert_eq!(
                ex.candidates[ex.answer as usize], paragraph.sentences[3],
                "answer candidate is not the fourth sentence"
            );
            next_checked += 1;
        } else {
            assert!(paragraph.sentences.len() < 8);
        }
        let pairs = extract_order_pairs(&paragraph, &mut rng);
        assert_eq!(pairs.len(), paragraph.sentences.len().saturating_sub(1));
    }
    assert!(next_checked > 100);
    println!(
        "ACCEPTANCE 9 PASS: bit-exact checkpoint round trip; {checked} records reparse identically; NEXT invariants hold on {next_checked} fuzz paragraphs"
    );
}
