use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::params::{Grads, ParamId, ParamStore};
use super::tape::{Activation, NodeId, Tape};
use super::vocab::{Vocab, DEFAULT_SEQ_LEN, PAD};
use crate::corpus::Label;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-width of the uniform range for embedding rows without a pre-trained vector.
pub const EMBEDDING_INIT: f64 = 0.05;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    CnnFf,
    LstmFf,
    CnnLstmFf,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cnn-ff" => Ok(ModelKind::CnnFf),
            "lstm-ff" => Ok(ModelKind::LstmFf),
            "cnn-lstm-ff" => Ok(ModelKind::CnnLstmFf),
            _ => Err(Error::invalid(format!("unknown neural model {s:?}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::CnnFf => "cnn-ff",
            ModelKind::LstmFf => "lstm-ff",
            ModelKind::CnnLstmFf => "cnn-lstm-ff",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Architecture {
    /// Parallel convolutions, max-over-time pooling, dense output.
    CnnFf { widths: Vec<usize>, filters: usize },
    /// LSTM over every position, mean-pooled hidden states, dense output.
    LstmFf { hidden: usize },
    /// One convolution, windowed max pooling, LSTM over pooled rows, dense
    /// output from the last hidden state.
    CnnLstmFf {
        width: usize,
        filters: usize,
        pool: usize,
        hidden: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub embedding_dim: usize,
    pub seq_len: usize,
    pub activation: Activation,
    pub dropout: f64,
}

impl ModelConfig {
    /// 128 filters for each width 3, 4 and 5; dropout 0.5.
    pub fn cnn_ff(embedding_dim: usize) -> Self {
        ModelConfig {
            architecture: Architecture::CnnFf {
                widths: vec![3, 4, 5],
                filters: 128,
            },
            embedding_dim,
            seq_len: DEFAULT_SEQ_LEN,
            activation: Activation::Tanh,
            dropout: 0.5,
        }
    }

    /// Dropout 0.25; hidden sizes 20, 40 and 128 are the studied presets.
    pub fn lstm_ff(embedding_dim: usize, hidden: usize) -> Self {
        ModelConfig {
            architecture: Architecture::LstmFf { hidden },
            embedding_dim,
            seq_len: DEFAULT_SEQ_LEN,
            activation: Activation::Tanh,
            dropout: 0.25,
        }
    }

    /// 64 filters of width 5, pool 4, LSTM hidden size 64; dropout 0.25.
    pub fn cnn_lstm_ff(embedding_dim: usize) -> Self {
        ModelConfig {
            architecture: Architecture::CnnLstmFf {
                width: 5,
                filters: 64,
                pool: 4,
                hidden: 64,
            },
            embedding_dim,
            seq_len: DEFAULT_SEQ_LEN,
            activation: Activation::Tanh,
            dropout: 0.25,
        }
    }

    pub fn preset(kind: ModelKind, embedding_dim: usize) -> Self {
        match kind {
            ModelKind::CnnFf => Self::cnn_ff(embedding_dim),
            ModelKind::LstmFf => Self::lstm_ff(embedding_dim, 128),
            ModelKind::CnnLstmFf => Self::cnn_lstm_ff(embedding_dim),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self.architecture {
            Architecture::CnnFf { .. } => ModelKind::CnnFf,
            Architecture::LstmFf { .. } => ModelKind::LstmFf,
            Architecture::CnnLstmFf { .. } => ModelKind::CnnLstmFf,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.seq_len == 0 {
            return Err(Error::invalid("embedding dimension and sequence length must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        match &self.architecture {
            Architecture::CnnFf { widths, filters } => {
                if widths.is_empty() || *filters == 0 {
                    return Err(Error::invalid("cnn needs at least one filter width and filter"));
                }
                if let Some(w) = widths.iter().find(|&&w| w == 0 || w > self.seq_len) {
                    return Err(Error::invalid(format!("filter width {w} does not fit length {}", self.seq_len)));
                }
            }
            Architecture::LstmFf { hidden } => {
                if *hidden == 0 {
                    return Err(Error::invalid("lstm hidden size must be positive"));
                }
            }
            Architecture::CnnLstmFf {
                width,
                filters,
                pool,
                hidden,
            } => {
                if *width == 0 || *width > self.seq_len || *filters == 0 || *pool == 0 || *hidden == 0 {
                    return Err(Error::invalid("cnn-lstm sizes must be positive and fit the sequence"));
                }
                let conv_len = self.seq_len - width + 1;
                if !conv_len.is_multiple_of(*pool) {
                    return Err(Error::invalid(format!(
                        "convolution length {conv_len} is not divisible by pool size {pool}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Length of the vector fed to the output layer.
    pub fn feature_len(&self) -> usize {
        match &self.architecture {
            Architecture::CnnFf { widths, filters } => widths.len() * filters,
            Architecture::LstmFf { hidden } => *hidden,
            Architecture::CnnLstmFf { hidden, .. } => *hidden,
        }
    }

    /// LSTM steps of the CNN-LSTM model: pooled length of the feature maps.
    pub fn timesteps(&self) -> usize {
        match &self.architecture {
            Architecture::CnnLstmFf { width, pool, .. } => (self.seq_len - width + 1) / pool,
            _ => self.seq_len,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    embedding: ParamId,
    conv: Vec<(ParamId, ParamId, usize)>,
    lstm: Option<(ParamId, ParamId, usize)>,
    out: (ParamId, ParamId),
}

fn layout_for(config: &ModelConfig, params: &ParamStore<impl Real>) -> Result<Layout> {
    let id = |name: &str| params.find(name).ok_or_else(|| Error::invalid(format!("missing parameter {name}")));
    let mut conv = Vec::new();
    let mut lstm = None;
    match &config.architecture {
        Architecture::CnnFf { widths, .. } => {
            for &w in widths {
                conv.push((id(&format!("conv{w}.weight"))?, id(&format!("conv{w}.bias"))?, w));
            }
        }
        Architecture::LstmFf { hidden } => lstm = Some((id("lstm.weight")?, id("lstm.bias")?, *hidden)),
        Architecture::CnnLstmFf { width, hidden, .. } => {
            conv.push((id(&format!("conv{width}.weight"))?, id(&format!("conv{width}.bias"))?, *width));
            lstm = Some((id("lstm.weight")?, id("lstm.bias")?, *hidden));
        }
    }
    Ok(Layout {
        embedding: id("embedding")?,
        conv,
        lstm,
        out: (id("out.weight")?, id("out.bias")?),
    })
}

fn glorot<T: Real>(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, n: usize) -> Vec<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let u = Uniform::new_inclusive(-limit, limit);
    (0..n).map(|_| T::lit(u.sample(rng))).collect()
}

/// A neural classifier: configuration, vocabulary and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ParamStore<T>,
    layout: Layout,
}

/// Saved form of a [`Model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Checkpoint<T> {
    pub format_version: u32,
    pub config: ModelConfig,
    pub config_fingerprint: String,
    pub vocab: Vocab,
    pub vocab_hash: String,
    pub tensors: ParamStore<T>,
}

impl<T: Real> Model<T> {
    /// Glorot-uniform weights, zero biases except forget gates at 1, and
    /// embeddings copied from `table` where it has the word. The padding row
    /// is zero and frozen.
    pub fn new(config: ModelConfig, vocab: Vocab, table: Option<&EmbeddingTable<T>>, seed: u64) -> Result<Self> {
        config.validate()?;
        let d = config.embedding_dim;
        if let Some(t) = table {
            if t.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: t.dim(),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::default();

        let u = Uniform::new_inclusive(-EMBEDDING_INIT, EMBEDDING_INIT);
        let mut emb = Vec::with_capacity(vocab.len() * d);
        for (i, w) in vocab.words().iter().enumerate() {
            let random: Vec<T> = (0..d).map(|_| T::lit(u.sample(&mut rng))).collect();
            if i == PAD {
                emb.extend(std::iter::repeat_n(T::zero(), d));
            } else if let Some(v) = table.and_then(|t| t.get(w)) {
                emb.extend_from_slice(v);
            } else {
                emb.extend(random);
            }
        }
        let e = params.add("embedding", vocab.len(), d, emb);
        params.get_mut(e).frozen_rows = vec![PAD];

        let add_conv = |params: &mut ParamStore<T>, rng: &mut ChaCha8Rng, w: usize, filters: usize| {
            let span = w * d;
            params.add(&format!("conv{w}.weight"), filters, span, glorot(rng, span, filters, filters * span));
            params.add(&format!("conv{w}.bias"), filters, 1, vec![T::zero(); filters]);
        };
        let add_lstm = |params: &mut ParamStore<T>, rng: &mut ChaCha8Rng, hidden: usize, input: usize| {
            let width = hidden + input;
            params.add("lstm.weight", 4 * hidden, width, glorot(rng, width, 4 * hidden, 4 * hidden * width));
            let mut b = vec![T::zero(); 4 * hidden];
            b[hidden..2 * hidden].iter_mut().for_each(|x| *x = T::one());
            params.add("lstm.bias", 4 * hidden, 1, b);
        };
        match &config.architecture {
            Architecture::CnnFf { widths, filters } => {
                for &w in widths {
                    add_conv(&mut params, &mut rng, w, *filters);
                }
            }
            Architecture::LstmFf { hidden } => add_lstm(&mut params, &mut rng, *hidden, d),
            Architecture::CnnLstmFf {
                width, filters, hidden, ..
            } => {
                add_conv(&mut params, &mut rng, *width, *filters);
                add_lstm(&mut params, &mut rng, *hidden, *filters);
            }
        }
        let f = config.feature_len();
        params.add("out.weight", 1, f, glorot(&mut rng, f, 1, f));
        params.add("out.bias", 1, 1, vec![T::zero()]);
        let layout = layout_for(&config, &params)?;
        Ok(Model {
            config,
            vocab,
            params,
            layout,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind()
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        self.vocab.pad_and_index(tokens, self.config.seq_len)
    }

    fn lstm<'a>(&'a self, tape: &mut Tape<'a, T>, inputs: &[NodeId]) -> Result<Vec<NodeId>> {
        let (w, b, dh) = self.layout.lstm.expect("model has an lstm");
        let mut h = tape.input(vec![T::zero(); dh], 1, dh);
        let mut c = tape.input(vec![T::zero(); dh], 1, dh);
        let mut hs = Vec::with_capacity(inputs.len());
        for &x in inputs {
            let hx = tape.concat(&[h, x]);
            let z = tape.affine(hx, w, b)?;
            let zi = tape.slice(z, 0, dh);
            let zf = tape.slice(z, dh, dh);
            let zc = tape.slice(z, 2 * dh, dh);
            let zo = tape.slice(z, 3 * dh, dh);
            let i = tape.act(zi, Activation::Sigmoid);
            let f = tape.act(zf, Activation::Sigmoid);
            let cand = tape.act(zc, Activation::Tanh);
            let o = tape.act(zo, Activation::Sigmoid);
            let keep = tape.mul(f, c);
            let write = tape.mul(i, cand);
            c = tape.add(keep, write);
            let tc = tape.act(c, Activation::Tanh);
            h = tape.mul(o, tc);
            hs.push(h);
        }
        Ok(hs)
    }

    /// Records the pooled feature vector, before dropout.
    pub fn features_node<'a>(&'a self, tape: &mut Tape<'a, T>, ids: &[usize]) -> Result<NodeId> {
        if ids.len() != self.config.seq_len {
            return Err(Error::DimensionMismatch {
                expected: self.config.seq_len,
                found: ids.len(),
            });
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.vocab.len()) {
            return Err(Error::invalid(format!("token id {bad} outside vocabulary")));
        }
        let d = self.config.embedding_dim;
        let emb = tape.gather(self.layout.embedding, ids);
        let act = self.config.activation;
        match &self.config.architecture {
            Architecture::CnnFf { .. } => {
                let mut pooled = Vec::with_capacity(self.layout.conv.len());
                for &(w, b, k) in &self.layout.conv {
                    let c = tape.conv(emb, w, b, k)?;
                    let c = tape.act(c, act);
                    pooled.push(tape.max_over_time(c)?);
                }
                Ok(tape.concat(&pooled))
            }
            Architecture::LstmFf { .. } => {
                let xs: Vec<NodeId> = (0..ids.len()).map(|t| tape.slice(emb, t * d, d)).collect();
                let hs = self.lstm(tape, &xs)?;
                Ok(tape.mean(&hs))
            }
            Architecture::CnnLstmFf { pool, filters, .. } => {
                let (w, b, k) = self.layout.conv[0];
                let c = tape.conv(emb, w, b, k)?;
                let c = tape.act(c, act);
                let p = tape.max_pool(c, *pool)?;
                let rows = tape.shape(p).0;
                let xs: Vec<NodeId> = (0..rows).map(|j| tape.slice(p, j * filters, *filters)).collect();
                let hs = self.lstm(tape, &xs)?;
                Ok(*hs.last().expect("at least one timestep"))
            }
        }
    }

    /// Records the forward pass up to the predicted probability. Dropout is
    /// applied only when `dropout_rng` is given.
    pub fn forward<'a>(
        &'a self,
        tape: &mut Tape<'a, T>,
        ids: &[usize],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<NodeId> {
        let mut feat = self.features_node(tape, ids)?;
        let p = self.config.dropout;
        if let Some(rng) = dropout_rng {
            if p > 0.0 {
                let keep = T::lit(1.0 / (1.0 - p));
                let n = tape.value(feat).len();
                let mask = (0..n).map(|_| if rng.gen::<f64>() < p { T::zero() } else { keep }).collect();
                feat = tape.dropout(feat, mask);
            }
        }
        let (w, b) = self.layout.out;
        let logit = tape.affine(feat, w, b)?;
        Ok(tape.act(logit, Activation::Sigmoid))
    }

    /// Evaluation-mode pooled features.
    pub fn features(&self, ids: &[usize]) -> Result<Vec<T>> {
        let mut tape = Tape::new(&self.params);
        let f = self.features_node(&mut tape, ids)?;
        Ok(tape.value(f).to_vec())
    }

    /// Evaluation-mode probability of the sarcastic class.
    pub fn predict_ids(&self, ids: &[usize]) -> Result<T> {
        let mut tape = Tape::new(&self.params);
        let y = self.forward(&mut tape, ids, None)?;
        Ok(tape.value(y)[0])
    }

    pub fn predict_proba<S: AsRef<str>>(&self, tokens: &[S]) -> Result<T> {
        self.predict_ids(&self.encode(tokens))
    }

    /// Sarcastic when the probability exceeds one half.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Label> {
        Ok(Label::from_bool(self.predict_proba(tokens)? > T::lit(0.5)))
    }

    /// Loss of one example; adds `scale * dloss/dparams` into `grads`.
    pub fn accumulate_gradient(
        &self,
        ids: &[usize],
        target: Label,
        dropout_rng: Option<&mut ChaCha8Rng>,
        scale: T,
        grads: &mut Grads<T>,
    ) -> Result<T> {
        let mut tape = Tape::new(&self.params);
        let y = self.forward(&mut tape, ids, dropout_rng)?;
        let loss = tape.bce(y, T::from_count(target.as_u8() as usize));
        tape.backward(loss, scale, grads);
        Ok(tape.value(loss)[0])
    }

    /// Evaluation-mode loss of one example.
    pub fn loss(&self, ids: &[usize], target: Label) -> Result<T> {
        let mut tape = Tape::new(&self.params);
        let y = self.forward(&mut tape, ids, None)?;
        let loss = tape.bce(y, T::from_count(target.as_u8() as usize));
        Ok(tape.value(loss)[0])
    }

    pub fn to_checkpoint(&self) -> Checkpoint<T> {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            config_fingerprint: self.config.fingerprint(),
            config: self.config.clone(),
            vocab_hash: self.vocab.hash(),
            vocab: self.vocab.clone(),
            tensors: self.params.clone(),
        }
    }

    pub fn from_checkpoint(ck: Checkpoint<T>) -> Result<Self> {
        if ck.format_version != CHECKPOINT_VERSION {
            return Err(Error::invalid(format!("unsupported checkpoint version {}", ck.format_version)));
        }
        if ck.config.fingerprint() != ck.config_fingerprint {
            return Err(Error::invalid("checkpoint config fingerprint mismatch"));
        }
        if ck.vocab.hash() != ck.vocab_hash {
            return Err(Error::invalid("checkpoint vocabulary hash mismatch"));
        }
        let mut model = Model::new(ck.config, ck.vocab, None, 0)?;
        model.params.load_from(&ck.tensors)?;
        Ok(model)
    }
}
