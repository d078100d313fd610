use mrn_core::frontend::{parse_source, SourceFile};
use mrn_core::graph::build_mrng;
use mrn_core::harness::*;
use mrn_core::model::ModelConfig;
use proptest::prelude::*;

fn tiny(seed: u64) -> ModelConfig {
    ModelConfig {
        f_hidden: 8,
        p: 2,
        layers: 2,
        heads: 2,
        k_prime: 4,
        c0: 8,
        seed,
        ..ModelConfig::default()
    }
}

fn contracts(per_class: usize, seed: u64) -> Vec<Contract> {
    synthetic_corpus(per_class, 1, seed)
        .into_iter()
        .map(|c| {
            let g = build_mrng(&c.file_name, &parse_source(&SourceFile::new(&c.file_name, &c.source)).unwrap());
            let labels = align_labels(&g, &c.functions, &c.file_name).unwrap();
            Contract {
                path: c.file_name,
                graph: g,
                labels,
            }
        })
        .collect()
}

fn config(epochs: usize, seed: u64) -> TrainingConfig {
    TrainingConfig {
        epochs,
        batch_size: 8,
        seed,
        min_frequency: 1,
        ..TrainingConfig::default()
    }
}

/// Fraction of (positive, negative) pairs ordered correctly, ties one half.
fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        for (j, &yj) in labels.iter().enumerate() {
            if yi && !yj {
                pairs += 1.0;
                total += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Less => 0.0,
                };
            }
        }
    }
    total / pairs
}

proptest! {
    #[test]
    fn auc_matches_pairwise_oracle(v in prop::collection::vec((0u8..6, any::<bool>()), 2..40)) {
        let scores: Vec<f64> = v.iter().map(|(s, _)| f64::from(*s) / 5.0).collect();
        let labels: Vec<bool> = v.iter().map(|(_, y)| *y).collect();
        match roc_auc(&scores, &labels) {
            Ok((roc, auc)) => {
                prop_assert!((auc - pairwise_auc(&scores, &labels)).abs() <= 1e-9);
                prop_assert_eq!(roc[0], (0.0, 0.0));
                prop_assert_eq!(*roc.last().unwrap(), (1.0, 1.0));
                prop_assert!(roc.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
            }
            Err(e) => prop_assert!(e.positives == 0 || e.negatives == 0),
        }
    }

    #[test]
    fn report_is_consistent_with_its_counts(
        v in prop::collection::vec((0.0f64..1.0, any::<bool>()), 1..50),
        threshold in 0.0f64..1.0,
    ) {
        let scores: Vec<f64> = v.iter().map(|(s, _)| *s).collect();
        let labels: Vec<bool> = v.iter().map(|(_, y)| *y).collect();
        let r = MetricsReport::new(&scores, &labels, threshold);
        let c = r.counts;
        prop_assert_eq!(c.tp + c.fp + c.fn_ + c.tn, v.len());
        prop_assert_eq!(r.accuracy, c.accuracy());
        prop_assert_eq!(r.precision, c.precision());
        prop_assert_eq!(r.recall, c.recall());
        prop_assert_eq!(r.f1, c.f1());
        for m in [r.accuracy, r.precision, r.recall, r.f1] {
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn split_is_a_partition(n in 1usize..200, seed in any::<u64>()) {
        let s = split_dataset(n, [0.8, 0.1, 0.1], seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let floor = (n as f64 * 0.1 + 1e-9).floor() as usize;
        prop_assert_eq!(s.validation.len(), floor);
        prop_assert_eq!(s.test.len(), floor);
    }
}

#[test]
fn training_is_bit_reproducible() {
    let data = contracts(6, 3);
    let (train, validation): (Vec<&Contract>, Vec<&Contract>) = (data[..9].iter().collect(), data[9..].iter().collect());
    let run = || train_model(&train, &validation, tiny(1), &config(4, 9), |_| {}).unwrap();
    let (a, b) = (run(), run());
    let bits = |o: &TrainOutcome| {
        o.log
            .iter()
            .map(|e| e.train_loss.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.log, b.log);
    assert_eq!(a.checkpoint, b.checkpoint);
}

#[test]
fn zero_learning_rate_freezes_parameters() {
    let data = contracts(4, 5);
    let train: Vec<&Contract> = data.iter().collect();
    let cfg = TrainingConfig {
        learning_rate: 0.0,
        ..config(3, 2)
    };
    let out = train_model(&train, &[], tiny(4), &cfg, |_| {}).unwrap();
    let fresh = mrn_core::model::Model::new(tiny(4), out.checkpoint.model.vocab.clone()).unwrap();
    assert_eq!(out.checkpoint.model.params, fresh.params);
    assert!(out.log.windows(2).all(|w| w[0].train_loss == w[1].train_loss));
    assert_eq!(out.checkpoint.metadata.epoch, 3);
    assert_eq!(out.checkpoint.metadata.best_validation_f1, None);
}

#[test]
fn training_loss_falls_on_separable_corpus() {
    let data = contracts(30, 11);
    let train: Vec<&Contract> = data.iter().collect();
    let out = train_model(&train, &[], tiny(6), &config(20, 6), |_| {}).unwrap();
    assert!(out.log.last().unwrap().train_loss < out.log[0].train_loss);
}

#[test]
fn checkpoint_is_best_validation_epoch() {
    let data = contracts(8, 13);
    let train: Vec<&Contract> = data[..12].iter().collect();
    let validation: Vec<&Contract> = data[12..].iter().collect();
    let cfg = TrainingConfig {
        learning_rate: 0.5,
        ..config(8, 3)
    };
    let out = train_model(&train, &validation, tiny(2), &cfg, |_| {}).unwrap();
    let f1: Vec<f64> = out.log.iter().map(|e| e.validation.as_ref().unwrap().f1).collect();
    let best = f1.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first = f1.iter().position(|&v| v == best).unwrap() + 1;
    assert_eq!(out.checkpoint.metadata.epoch, first);
    assert_eq!(out.checkpoint.metadata.best_validation_f1, Some(best));
    let r = evaluate(&out.checkpoint.model, &validation, 0.5).unwrap();
    assert_eq!(r.f1, best);
}

#[test]
fn training_rejects_empty_input() {
    assert!(matches!(
        train_model(&[], &[], tiny(0), &config(1, 0), |_| {}),
        Err(TrainError::EmptyTrainSet)
    ));
}

#[test]
fn locate_reports_every_function() {
    let data = contracts(2, 1);
    let train: Vec<&Contract> = data.iter().collect();
    let model = train_model(&train, &[], tiny(0), &config(1, 0), |_| {}).unwrap().checkpoint.model;
    let src = "contract Bank {
        mapping(address => uint) balances;
        function withdraw(uint amount) public {
            balances[msg.sender] -= amount;
            msg.sender.transfer(amount);
        }
    }";
    let report = locate(&SourceFile::new("w.sol", src), &model, 0.5).unwrap();
    assert_eq!(report.functions.len(), 1);
    let f = &report.functions[0];
    assert_eq!((f.name.as_str(), f.arity), ("withdraw", 1));
    assert!(f.probability > 0.0 && f.probability < 1.0);
    assert_eq!(f.span[0], 3);
    let empty = locate(&SourceFile::new("e.sol", "contract E {}"), &model, 0.5).unwrap();
    assert!(empty.functions.is_empty() && !empty.any_positive());
    assert!(locate(&SourceFile::new("bad.sol", "contract {"), &model, 0.5).is_err());
}

#[test]
fn manifest_round_trip_and_label_errors() {
    let dir = std::env::temp_dir().join(format!("mrn-harness-{}", std::process::id()));
    let corpus = synthetic_corpus(2, 2, 4);
    let manifest = write_corpus(&dir, &corpus).unwrap();
    let loaded = DatasetManifest::load(&dir.join("manifest.jsonl")).unwrap();
    assert_eq!(loaded, manifest);
    assert_eq!(load_dataset(&loaded).unwrap().len(), 4);
    let mut broken = manifest.clone();
    broken.entries[0].functions.pop();
    assert!(matches!(load_dataset(&broken), Err(DatasetError::Labels { .. })));
    assert!(matches!(
        DatasetManifest::parse("{\"path\": 1}\n", &dir),
        Err(DatasetError::Manifest { line: 1, .. })
    ));
    std::fs::remove_dir_all(&dir).unwrap();
}
