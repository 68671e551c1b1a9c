//! Learned contact localization and force regression from the seven channel
//! pressures.

pub mod container;
pub mod mlp;
pub mod train;

pub use container::{load, save};
pub use mlp::{
    default_dims, grad_check, loss, Activation, Gradients, MlpModel, Normalization,
    Prediction, AXIAL_CLASSES, OUTPUT_DIM, RADIAL_CLASSES,
};
pub use train::{
    evaluate, forward_batch, history_to_csv, latency_bench, split_holdout, train,
    EpochMetrics, LatencyStats, Metrics, TrainConfig, TrainOutcome, METRICS_CSV_HEADER,
};
