//! Mini-batch training with gradient accumulation, per-epoch validation and
//! best-F1 checkpoint selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::Contract;
use super::metrics::MetricsReport;
use crate::graph::{build_vocabulary, VocabularyError};
use crate::model::layers::bce_sum;
use crate::model::{Mode, Model, ModelCheckpoint, ModelConfig, ModelError, TrainingMetadata};
use crate::tensor::{KernelError, Sgd, Tape, Tensor};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("numeric failure in epoch {epoch}")]
    Numeric { epoch: usize, source: KernelError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    /// Contracts per optimizer step.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    /// Train / validation / test.
    pub split: [f64; 3],
    /// Node labels rarer than this map to the unknown token.
    pub min_frequency: usize,
    /// Multiplier on positive-label loss terms; 1 disables reweighting.
    pub positive_weight: f64,
    pub threshold: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.002,
            momentum: 0.0005,
            seed: 0,
            split: [0.8, 0.1, 0.1],
            min_frequency: 2,
            positive_weight: 1.0,
            threshold: 0.5,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive");
        }
        if self.learning_rate < 0.0 || self.momentum < 0.0 || self.positive_weight <= 0.0 {
            return bad("learning_rate and momentum must be non-negative, positive_weight positive");
        }
        if self.split.iter().any(|r| *r < 0.0) || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("split ratios must be non-negative and sum to 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Eval-mode mean cross entropy over all training functions.
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation: Option<ValidationScores>,
}

pub struct TrainOutcome {
    pub checkpoint: ModelCheckpoint,
    pub log: Vec<EpochLog>,
}

fn scores_and_labels(model: &Model, data: &[&Contract]) -> Result<(Vec<f64>, Vec<bool>), KernelError> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for c in data {
        scores.extend(model.predict(&c.graph)?);
        labels.extend(c.labels.iter().map(|&y| y >= 0.5));
    }
    Ok((scores, labels))
}

/// Metrics of `model` over every function of `data`.
pub fn evaluate(model: &Model, data: &[&Contract], threshold: f64) -> Result<MetricsReport, KernelError> {
    let (scores, labels) = scores_and_labels(model, data)?;
    Ok(MetricsReport::new(&scores, &labels, threshold))
}

/// Mean eval-mode cross entropy and accuracy from one forward pass per file.
fn train_summary(model: &Model, data: &[&Contract], threshold: f64) -> Result<(f64, f64), ModelError> {
    let total: usize = data.iter().map(|c| c.labels.len()).sum();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for c in data {
        if c.labels.is_empty() {
            continue;
        }
        let mut tape = Tape::new();
        let bound = model.bind(&mut tape);
        let probs = model.forward(&mut tape, &bound, &c.graph, Mode::Eval)?.expect("non-empty file");
        let l = bce_sum(&mut tape, probs, &c.labels, total as f64)?;
        loss += tape.value(l).data()[0];
        correct += tape
            .value(probs)
            .data()
            .iter()
            .zip(&c.labels)
            .filter(|(&p, &y)| (p >= threshold) == (y >= 0.5))
            .count();
    }
    Ok((loss, correct as f64 / total.max(1) as f64))
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(a.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(b.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7))
        .rotate_left(17)
}

/// Trains from scratch. The vocabulary comes from `train` only; the
/// returned checkpoint is the epoch with the best validation F1 (earliest
/// on ties), or the final epoch when `validation` is empty.
pub fn train_model(
    train: &[&Contract],
    validation: &[&Contract],
    model_config: ModelConfig,
    config: &TrainingConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    let vocab = build_vocabulary(train.iter().map(|c| &c.graph), config.min_frequency)?;
    let mut model = Model::new(model_config, vocab)?;
    let mut opt = Sgd::new(config.learning_rate, config.momentum, model.params.tensors());
    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Model)> = None;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let numeric = |epoch: usize| {
        move |e: ModelError| match e {
            ModelError::Kernel(source) => TrainError::Numeric { epoch, source },
            other => TrainError::Model(other),
        }
    };
    for epoch in 1..=config.epochs {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix(config.seed, epoch as u64, 0)));
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let denominator: usize = batch.iter().map(|&i| train[i].labels.len()).sum();
            if denominator == 0 {
                continue;
            }
            let mut grads: Vec<Tensor> = model.params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
            for &i in batch {
                let c = train[i];
                let mode = Mode::Train {
                    seed: mix(config.seed, epoch as u64, (step as u64) << 32 | i as u64),
                };
                let (_, g) = model
                    .loss_and_gradients(&c.graph, &c.labels, denominator as f64, config.positive_weight, mode)
                    .map_err(numeric(epoch))?;
                for (acc, g) in grads.iter_mut().zip(&g) {
                    for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                        *a += b;
                    }
                }
            }
            opt.step(model.params.tensors_mut(), &grads)
                .map_err(|source| TrainError::Numeric { epoch, source })?;
        }
        let (train_loss, train_accuracy) = train_summary(&model, train, config.threshold).map_err(numeric(epoch))?;
        let validation_scores = if validation.is_empty() {
            None
        } else {
            let r = evaluate(&model, validation, config.threshold)
                .map_err(|source| TrainError::Numeric { epoch, source })?;
            Some(ValidationScores {
                accuracy: r.accuracy,
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
            })
        };
        let entry = EpochLog {
            epoch,
            train_loss,
            train_accuracy,
            validation: validation_scores,
        };
        log::info!(
            "epoch {epoch}: train loss {train_loss:.6}, train accuracy {train_accuracy:.4}{}",
            entry
                .validation
                .as_ref()
                .map_or(String::new(), |v| format!(", validation F1 {:.4}", v.f1))
        );
        on_epoch(&entry);
        if let Some(v) = &entry.validation {
            if best.as_ref().is_none_or(|(f1, _, _)| v.f1 > *f1) {
                best = Some((v.f1, epoch, model.clone()));
            }
        }
        log.push(entry);
    }
    let (best_validation_f1, epoch, model) = match best {
        Some((f1, epoch, m)) => (Some(f1), epoch, m),
        None => (None, config.epochs, model),
    };
    Ok(TrainOutcome {
        checkpoint: ModelCheckpoint {
            model,
            metadata: TrainingMetadata {
                epoch,
                best_validation_f1,
                class: None,
            },
        },
        log,
    })
}
