//! Metrics, pipelines and k-fold cross-validation.
//!
//! Class 1 (numeric sarcasm) is the positive class throughout. The `avg`
//! columns are support-weighted; fold means are unweighted.

mod crossval;
mod metrics;
mod pipeline;

pub use crossval::{crossvalidate, evaluate, CrossValReport, FoldReport};
pub use metrics::{
    confusion, f_score, prf_per_class, round2, weighted_average, ClassMetrics, ConfusionMatrix, MetricsReport,
};
pub use pipeline::{
    labels_of, Artifact, ConstantPipeline, Fitted, NeuralSettings, Pipeline, PipelineConfig, PipelineKind,
    StandardPipeline,
};
