//! Datasets, training, evaluation and the locate report.

pub mod dataset;
pub mod locate;
pub mod metrics;
pub mod synthetic;
pub mod train;

pub use dataset::{
    align_labels, load_contract, load_dataset, split_dataset, Contract, DatasetError, DatasetManifest, FunctionLabel,
    ManifestEntry, Split, VulnerabilityClass,
};
pub use locate::{locate, FunctionVerdict, LocateError, LocateReport};
pub use metrics::{roc_auc, ConfusionCounts, DegenerateLabels, MetricsReport};
pub use synthetic::{synthetic_corpus, write_corpus, SyntheticContract};
pub use train::{evaluate, train_model, EpochLog, TrainError, TrainOutcome, TrainingConfig, ValidationScores};
