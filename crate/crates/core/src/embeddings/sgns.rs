use std::collections::HashMap;

use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::{dot, sigmoid, Real};

/// Skip-gram with negative sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Context radius on each side of the center word.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 200,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            seed: 0,
        }
    }
}

impl SgnsConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 || self.epochs == 0 || self.min_count == 0 {
            return Err(Error::invalid("sgns dim, window, negatives, epochs and min_count must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("sgns learning rate must be positive"));
        }
        Ok(())
    }
}

fn log_sigmoid<T: Real>(x: T) -> T {
    // -softplus(-x)
    let z = -x;
    -(z.max(T::zero()) + (T::one() + (-z.abs()).exp()).ln())
}

/// Loss and gradients of one (center, context, negatives) sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient<T> {
    pub loss: T,
    pub center: Vec<T>,
    pub context: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

/// `-log σ(c·o) - Σ log σ(-c·n_k)` and its gradients with respect to the
/// center input vector, the context output vector and each negative output
/// vector.
pub fn sgns_pair_loss<T: Real>(center: &[T], context: &[T], negatives: &[&[T]]) -> SgnsGradient<T> {
    let d = center.len();
    let s_pos = dot(center, context);
    let mut loss = -log_sigmoid(s_pos);
    let g_pos = sigmoid(s_pos) - T::one();
    let mut g_center: Vec<T> = context.iter().map(|&u| g_pos * u).collect();
    let g_context: Vec<T> = center.iter().map(|&c| g_pos * c).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let s = dot(center, neg);
        loss -= log_sigmoid(-s);
        let g = sigmoid(s);
        for k in 0..d {
            g_center[k] += g * neg[k];
        }
        g_negs.push(center.iter().map(|&c| g * c).collect());
    }
    SgnsGradient {
        loss,
        center: g_center,
        context: g_context,
        negatives: g_negs,
    }
}

#[derive(Debug, Clone)]
pub struct SgnsOutcome<T> {
    /// Input (center) vectors.
    pub table: EmbeddingTable<T>,
    /// Mean sample loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains skip-gram embeddings with negative sampling.
///
/// Single-threaded and fully determined by the seed. Negatives are drawn
/// from the unigram distribution raised to the 3/4 power.
pub fn train_sgns<T: Real>(corpus: &[Vec<String>], config: &SgnsConfig) -> Result<SgnsOutcome<T>> {
    config.validate()?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for sentence in corpus {
        for w in sentence {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= config.min_count).collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|w| index.get(w.as_str()).copied()).collect())
        .collect();

    let d = config.dim;
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Uniform::new_inclusive(-0.5 / d as f64, 0.5 / d as f64);
    let mut input: Vec<T> = (0..v * d).map(|_| T::lit(init.sample(&mut rng))).collect();
    let mut output: Vec<T> = vec![T::zero(); v * d];
    let noise = WeightedIndex::new(vocab.iter().map(|&(_, c)| (c as f64).powf(0.75)))
        .map_err(|e| Error::invalid(e.to_string()))?;
    let lr = T::lit(config.learning_rate);

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut neg_ids = Vec::with_capacity(config.negatives);
    for _ in 0..config.epochs {
        let mut total = 0.0;
        let mut samples = 0usize;
        for sent in &sentences {
            for (pos, &center) in sent.iter().enumerate() {
                let lo = pos.saturating_sub(config.window);
                let hi = (pos + config.window + 1).min(sent.len());
                for (cpos, &context) in sent.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    neg_ids.clear();
                    for _ in 0..config.negatives {
                        let n = noise.sample(&mut rng);
                        if n != context {
                            neg_ids.push(n);
                        }
                    }
                    let g = {
                        let negs: Vec<&[T]> = neg_ids.iter().map(|&n| &output[n * d..(n + 1) * d]).collect();
                        sgns_pair_loss(&input[center * d..(center + 1) * d], &output[context * d..(context + 1) * d], &negs)
                    };
                    total += g.loss.as_f64();
                    samples += 1;
                    for k in 0..d {
                        output[context * d + k] -= lr * g.context[k];
                    }
                    for (&n, gn) in neg_ids.iter().zip(&g.negatives) {
                        for k in 0..d {
                            output[n * d + k] -= lr * gn[k];
                        }
                    }
                    for k in 0..d {
                        input[center * d + k] -= lr * g.center[k];
                    }
                }
            }
        }
        let mean = if samples > 0 { total / samples as f64 } else { 0.0 };
        if !mean.is_finite() {
            return Err(Error::Divergence {
                epoch: epoch_losses.len() + 1,
                loss: mean,
            });
        }
        epoch_losses.push(mean);
    }

    let table = EmbeddingTable::from_rows(
        d,
        vocab
            .iter()
            .enumerate()
            .map(|(i, &(w, _))| (w.to_string(), input[i * d..(i + 1) * d].to_vec())),
    )?;
    Ok(SgnsOutcome { table, epoch_losses })
}
