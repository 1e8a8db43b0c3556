use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use super::pipeline::{labels_of, Fitted, Pipeline};
use crate::corpus::FoldAssignment;
use crate::error::{Error, Result};
use crate::text::AnalyzedTweet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Fingerprint of everything fitted on this fold's training part.
    pub artifact_fingerprint: String,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub pipeline: String,
    pub k: usize,
    pub fold_seed: u64,
    pub folds: Vec<FoldReport>,
    /// Unweighted mean over folds.
    pub mean: MetricsReport,
}

/// Scores a fitted pipeline on labelled tweets.
pub fn evaluate(fitted: &dyn Fitted, tweets: &[AnalyzedTweet]) -> Result<MetricsReport> {
    let golds = labels_of(tweets)?;
    let preds = fitted.predict(tweets)?;
    MetricsReport::from_predictions(&preds, &golds)
}

/// Trains on k-1 folds and scores the held-out one, for every fold in
/// order. The pipeline only ever sees the training part of a fold.
pub fn crossvalidate(pipeline: &dyn Pipeline, data: &[AnalyzedTweet], folds: &FoldAssignment) -> Result<CrossValReport> {
    let ids: HashSet<&str> = data.iter().map(|t| t.id.as_str()).collect();
    if ids.len() != data.len() {
        return Err(Error::invalid("duplicate tweet ids in dataset"));
    }
    if let Some(unknown) = folds.assignments.keys().find(|id| !ids.contains(id.as_str())) {
        return Err(Error::invalid(format!("fold assignment references unknown tweet {unknown:?}")));
    }
    let mut reports = Vec::with_capacity(folds.k);
    for fold in 0..folds.k {
        let (tr, te) = folds.split_indices(data.iter().map(|t| t.id.as_str()), fold)?;
        if te.is_empty() {
            return Err(Error::invalid(format!("fold {fold} is empty")));
        }
        let train: Vec<AnalyzedTweet> = tr.iter().map(|&i| data[i].clone()).collect();
        let test: Vec<AnalyzedTweet> = te.iter().map(|&i| data[i].clone()).collect();
        let fitted = pipeline.fit(&train)?;
        reports.push(FoldReport {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            artifact_fingerprint: fitted.artifact().fingerprint(),
            metrics: evaluate(fitted.as_ref(), &test)?,
        });
    }
    let metrics: Vec<MetricsReport> = reports.iter().map(|r| r.metrics.clone()).collect();
    Ok(CrossValReport {
        pipeline: pipeline.name(),
        k: folds.k,
        fold_seed: folds.seed,
        mean: MetricsReport::mean(&metrics)?,
        folds: reports,
    })
}
