use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Model, ModelKind};
use super::params::{Grads, ParamStore};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const ADAGRAD_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adagrad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement, keeping
    /// the best parameters. Holds out `validation_fraction` of the data.
    pub early_stopping: Option<usize>,
    pub validation_fraction: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            batch_size: 64,
            optimizer: OptimizerKind::Sgd,
            learning_rate: 0.1,
            epochs: 25,
            seed: 0,
            early_stopping: None,
            validation_fraction: 0.1,
        }
    }
}

impl TrainingConfig {
    /// Mini-batch SGD at 0.1 for CNN-FF, Adagrad at 0.3 for the LSTM models.
    pub fn preset(kind: ModelKind) -> Self {
        match kind {
            ModelKind::CnnFf => TrainingConfig::default(),
            ModelKind::LstmFf | ModelKind::CnnLstmFf => TrainingConfig {
                optimizer: OptimizerKind::Adagrad,
                learning_rate: 0.3,
                ..TrainingConfig::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::invalid("batch size and epochs must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::invalid("validation fraction outside [0, 1)"));
        }
        Ok(())
    }
}

/// Parameter update rule with its state.
#[derive(Debug, Clone)]
pub struct Optimizer<T> {
    kind: OptimizerKind,
    lr: T,
    accum: Option<Grads<T>>,
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind, learning_rate: f64, params: &ParamStore<T>) -> Self {
        Optimizer {
            kind,
            lr: T::lit(learning_rate),
            accum: (kind == OptimizerKind::Adagrad).then(|| params.zero_grads()),
        }
    }

    /// Applies `grads`; frozen rows stay untouched.
    pub fn step(&mut self, params: &mut ParamStore<T>, grads: &Grads<T>) {
        let eps = T::lit(ADAGRAD_EPS);
        for (pi, p) in params.params.iter_mut().enumerate() {
            let g = &grads.data[pi];
            let cols = p.cols;
            let frozen = |i: usize| p.frozen_rows.contains(&(i / cols));
            match (self.kind, self.accum.as_mut()) {
                (OptimizerKind::Adagrad, Some(acc)) => {
                    let a = &mut acc.data[pi];
                    for i in 0..p.data.len() {
                        if g[i] == T::zero() || frozen(i) {
                            continue;
                        }
                        a[i] += g[i] * g[i];
                        p.data[i] -= self.lr * g[i] / (a[i].sqrt() + eps);
                    }
                }
                _ => {
                    for i in 0..p.data.len() {
                        if g[i] != T::zero() && !frozen(i) {
                            p.data[i] -= self.lr * g[i];
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    /// `epoch,train_loss,val_loss` rows.
    pub fn loss_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss\n");
        for r in &self.epochs {
            s.push_str(&format!("{},{},", r.epoch, r.train_loss));
            if let Some(v) = r.val_loss {
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }
}

/// Token-id sequence with its label.
pub type Example = (Vec<usize>, Label);

fn mean_loss<T: Real>(model: &Model<T>, data: &[Example]) -> Result<f64> {
    let mut s = 0.0;
    for (ids, y) in data {
        s += model.loss(ids, *y)?.as_f64();
    }
    Ok(s / data.len().max(1) as f64)
}

/// Mini-batch training with dropout; the epoch loss is the mean training
/// loss seen during the epoch. Deterministic for a fixed seed.
pub fn train<T: Real>(model: &mut Model<T>, data: &[Example], config: &TrainingConfig) -> Result<TrainReport> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let (train_idx, val): (Vec<usize>, Vec<Example>) = match config.early_stopping {
        Some(_) => {
            order.shuffle(&mut rng);
            let n_val = ((data.len() as f64) * config.validation_fraction).round() as usize;
            if n_val == 0 || n_val >= data.len() {
                return Err(Error::invalid("validation split leaves no training or validation data"));
            }
            let val = order[..n_val].iter().map(|&i| data[i].clone()).collect();
            let mut tr = order[n_val..].to_vec();
            tr.sort_unstable();
            (tr, val)
        }
        None => (order, Vec::new()),
    };
    let mut order = train_idx;
    let mut opt = Optimizer::new(config.optimizer, config.learning_rate, &model.params);
    let mut grads = model.params.zero_grads();
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ParamStore<T>)> = None;
    let mut stale = 0;
    let mut stopped_early = false;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            let scale = T::one() / T::from_count(batch.len());
            for &i in batch {
                let (ids, y) = &data[i];
                let l = model.accumulate_gradient(ids, *y, Some(&mut rng), scale, &mut grads)?;
                total += l.as_f64();
            }
            opt.step(&mut model.params, &grads);
        }
        let train_loss = total / order.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Divergence { epoch, loss: train_loss });
        }
        let val_loss = if val.is_empty() { None } else { Some(mean_loss(model, &val)?) };
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if let (Some(patience), Some(v)) = (config.early_stopping, val_loss) {
            if !v.is_finite() {
                return Err(Error::Divergence { epoch, loss: v });
            }
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, epoch, model.params.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }
    let best_epoch = match best {
        Some((_, e, params)) => {
            model.params = params;
            e
        }
        None => epochs.len(),
    };
    Ok(TrainReport {
        epochs,
        best_epoch,
        stopped_early,
    })
}
