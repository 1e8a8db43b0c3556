use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classic::{ClassicConfig, ClassicKind, ClassicModel};
use crate::corpus::Label;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::features::{Family, FeatureConfig, FeatureExtractor};
use crate::neural::{train as train_model, Checkpoint, Example, Model, ModelConfig, ModelKind, TrainReport, TrainingConfig, Vocab};
use crate::rulebase::{MatchStrategy, RuleConfig, RuleModel};
use crate::text::AnalyzedTweet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineKind {
    RuleExact,
    RuleCosine,
    Knn,
    Svm,
    Forest,
    CnnFf,
    LstmFf,
    CnnLstmFf,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 8] = [
        PipelineKind::RuleExact,
        PipelineKind::RuleCosine,
        PipelineKind::Knn,
        PipelineKind::Svm,
        PipelineKind::Forest,
        PipelineKind::CnnFf,
        PipelineKind::LstmFf,
        PipelineKind::CnnLstmFf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::RuleExact => "rule-exact",
            PipelineKind::RuleCosine => "rule-cosine",
            PipelineKind::Knn => "knn",
            PipelineKind::Svm => "svm",
            PipelineKind::Forest => "forest",
            PipelineKind::CnnFf => "cnn-ff",
            PipelineKind::LstmFf => "lstm-ff",
            PipelineKind::CnnLstmFf => "cnn-lstm-ff",
        }
    }

    pub fn classic(self) -> Option<ClassicKind> {
        match self {
            PipelineKind::Knn => Some(ClassicKind::Knn),
            PipelineKind::Svm => Some(ClassicKind::Svm),
            PipelineKind::Forest => Some(ClassicKind::Forest),
            _ => None,
        }
    }

    pub fn neural(self) -> Option<ModelKind> {
        match self {
            PipelineKind::CnnFf => Some(ModelKind::CnnFf),
            PipelineKind::LstmFf => Some(ModelKind::LstmFf),
            PipelineKind::CnnLstmFf => Some(ModelKind::CnnLstmFf),
            _ => None,
        }
    }

    /// Whether fitting requires an embedding table.
    pub fn needs_embeddings(self, config: &PipelineConfig) -> bool {
        self == PipelineKind::RuleCosine
            || (self.classic().is_some()
                && FeatureConfig::parse_families(&config.features)
                    .is_ok_and(|f| f.contains(&Family::TweetEmbedding)))
    }
}

impl std::str::FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm || (norm == "rf" && *k == PipelineKind::Forest))
            .ok_or_else(|| Error::invalid(format!("unknown pipeline {s:?}")))
    }
}

impl std::fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings for the neural pipelines. Unset fields fall back to the
/// per-architecture presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuralSettings {
    /// Used when no embedding table is supplied.
    pub embedding_dim: usize,
    pub min_count: usize,
    pub model: Option<ModelConfig>,
    pub training: Option<TrainingConfig>,
}

impl Default for NeuralSettings {
    fn default() -> Self {
        NeuralSettings {
            embedding_dim: 200,
            min_count: 1,
            model: None,
            training: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// The strategy field is overridden by the pipeline kind.
    pub rule: RuleConfig,
    /// Feature families for the classical pipelines, e.g. `S+P+E+value+unit`.
    pub features: String,
    pub classic: ClassicConfig,
    pub neural: NeuralSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rule: RuleConfig::default(),
            features: "S+E+P+value+unit".into(),
            classic: ClassicConfig::default(),
            neural: NeuralSettings::default(),
        }
    }
}

/// Anything that can be trained from labelled tweets alone.
pub trait Pipeline {
    fn name(&self) -> String;
    fn fit(&self, train: &[AnalyzedTweet]) -> Result<Box<dyn Fitted>>;
}

/// A trained pipeline.
pub trait Fitted {
    fn predict(&self, tweets: &[AnalyzedTweet]) -> Result<Vec<Label>>;
    /// Everything learned during fitting, in serializable form.
    fn artifact(&self) -> Artifact;
}

/// Serialized form of any fitted pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Artifact {
    Constant {
        label: Label,
    },
    Rule {
        model: RuleModel<f64>,
    },
    Classic {
        features: FeatureConfig,
        embedding_fingerprint: Option<String>,
        model: ClassicModel<f64>,
    },
    Neural {
        checkpoint: Checkpoint<f64>,
        report: TrainReport,
    },
}

impl Artifact {
    /// SHA-256 over the JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("artifact serializes");
        hex::encode(Sha256::digest(json))
    }

    /// Rebuilds a predictor; `table` must be the one used at training time
    /// when the artifact depends on embeddings.
    pub fn into_fitted(self, table: Option<Arc<EmbeddingTable<f64>>>) -> Result<Box<dyn Fitted>> {
        Ok(match self {
            Artifact::Constant { label } => Box::new(ConstantFitted(label)),
            Artifact::Rule { model } => {
                model.check_table(table.as_deref())?;
                Box::new(RuleFitted { model, table })
            }
            Artifact::Classic {
                features,
                embedding_fingerprint,
                model,
            } => {
                if let Some(fp) = &embedding_fingerprint {
                    let t = table.as_deref().ok_or_else(|| Error::invalid("model needs its embedding table"))?;
                    if &t.fingerprint() != fp {
                        return Err(Error::invalid("embedding table differs from the one used in training"));
                    }
                }
                Box::new(ClassicFitted {
                    extractor: FeatureExtractor::new(features),
                    embedding_fingerprint,
                    model,
                    table,
                })
            }
            Artifact::Neural { checkpoint, report } => Box::new(NeuralFitted {
                model: Model::from_checkpoint(checkpoint)?,
                report,
            }),
        })
    }
}

pub fn labels_of(tweets: &[AnalyzedTweet]) -> Result<Vec<Label>> {
    tweets
        .iter()
        .map(|t| t.label.ok_or_else(|| Error::invalid(format!("tweet {:?} has no label", t.id))))
        .collect()
}

/// Always predicts one label.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPipeline(pub Label);

struct ConstantFitted(Label);

impl Pipeline for ConstantPipeline {
    fn name(&self) -> String {
        format!("constant-{}", self.0)
    }

    fn fit(&self, _train: &[AnalyzedTweet]) -> Result<Box<dyn Fitted>> {
        Ok(Box::new(ConstantFitted(self.0)))
    }
}

impl Fitted for ConstantFitted {
    fn predict(&self, tweets: &[AnalyzedTweet]) -> Result<Vec<Label>> {
        Ok(vec![self.0; tweets.len()])
    }

    fn artifact(&self) -> Artifact {
        Artifact::Constant { label: self.0 }
    }
}

/// One of the eight named pipelines with its settings.
#[derive(Debug, Clone)]
pub struct StandardPipeline {
    pub kind: PipelineKind,
    pub config: PipelineConfig,
    pub table: Option<Arc<EmbeddingTable<f64>>>,
    /// Overrides every seed in `config`.
    pub seed: u64,
}

impl StandardPipeline {
    pub fn new(kind: PipelineKind, config: PipelineConfig, table: Option<Arc<EmbeddingTable<f64>>>, seed: u64) -> Self {
        StandardPipeline {
            kind,
            config,
            table,
            seed,
        }
    }

    /// Model and training settings a neural kind resolves to.
    pub fn neural_settings(&self, kind: ModelKind) -> Result<(ModelConfig, TrainingConfig)> {
        let s = &self.config.neural;
        let dim = self.table.as_ref().map_or(s.embedding_dim, |t| t.dim());
        let model = match &s.model {
            Some(m) if m.kind() != kind => {
                return Err(Error::invalid(format!("model config is {} but pipeline is {kind}", m.kind())))
            }
            Some(m) => m.clone(),
            None => ModelConfig::preset(kind, dim),
        };
        model.validate()?;
        let mut training = s.training.clone().unwrap_or_else(|| TrainingConfig::preset(kind));
        training.seed = self.seed;
        training.validate()?;
        Ok((model, training))
    }

    fn fit_rule(&self, train: &[AnalyzedTweet], strategy: MatchStrategy) -> Result<Box<dyn Fitted>> {
        let config = RuleConfig {
            strategy,
            ..self.config.rule
        };
        let model = RuleModel::build(train, config, self.table.as_deref())?;
        Ok(Box::new(RuleFitted {
            model,
            table: self.table.clone(),
        }))
    }

    fn fit_classic(&self, train: &[AnalyzedTweet], kind: ClassicKind) -> Result<Box<dyn Fitted>> {
        let y = labels_of(train)?;
        let families = FeatureConfig::parse_families(&self.config.features)?;
        let dim = self.table.as_ref().map_or(0, |t| t.dim());
        let features = FeatureConfig::new(families, dim, FeatureConfig::units_from(train))?;
        let extractor = FeatureExtractor::new(features);
        let x = extractor.extract_matrix(train, self.table.as_deref())?;
        let mut cfg = self.config.classic.clone();
        cfg.forest.seed = self.seed;
        let model = ClassicModel::fit(kind, &x, &y, &cfg)?;
        let embedding_fingerprint = if extractor.config.has(Family::TweetEmbedding) {
            self.table.as_ref().map(|t| t.fingerprint())
        } else {
            None
        };
        Ok(Box::new(ClassicFitted {
            extractor,
            embedding_fingerprint,
            model,
            table: self.table.clone(),
        }))
    }

    fn fit_neural(&self, train: &[AnalyzedTweet], kind: ModelKind) -> Result<Box<dyn Fitted>> {
        let y = labels_of(train)?;
        let (model_cfg, training) = self.neural_settings(kind)?;
        let docs: Vec<Vec<&str>> = train.iter().map(|t| t.tokens.iter().map(String::as_str).collect()).collect();
        let vocab = Vocab::build(&docs, self.config.neural.min_count)?;
        let mut model = Model::new(model_cfg, vocab, self.table.as_deref(), self.seed)?;
        let data: Vec<Example> = train.iter().zip(&y).map(|(t, &l)| (model.encode(&t.tokens), l)).collect();
        let report = train_model(&mut model, &data, &training)?;
        Ok(Box::new(NeuralFitted { model, report }))
    }
}

impl Pipeline for StandardPipeline {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn fit(&self, train: &[AnalyzedTweet]) -> Result<Box<dyn Fitted>> {
        if train.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        match self.kind {
            PipelineKind::RuleExact => self.fit_rule(train, MatchStrategy::Exact),
            PipelineKind::RuleCosine => self.fit_rule(train, MatchStrategy::Cosine),
            k => match (k.classic(), k.neural()) {
                (Some(c), _) => self.fit_classic(train, c),
                (_, Some(n)) => self.fit_neural(train, n),
                _ => unreachable!("every kind is rule, classic or neural"),
            },
        }
    }
}

struct RuleFitted {
    model: RuleModel<f64>,
    table: Option<Arc<EmbeddingTable<f64>>>,
}

impl Fitted for RuleFitted {
    fn predict(&self, tweets: &[AnalyzedTweet]) -> Result<Vec<Label>> {
        Ok(self
            .model
            .predict_all(tweets, self.table.as_deref())?
            .into_iter()
            .map(|p| p.label)
            .collect())
    }

    fn artifact(&self) -> Artifact {
        Artifact::Rule {
            model: self.model.clone(),
        }
    }
}

struct ClassicFitted {
    extractor: FeatureExtractor,
    embedding_fingerprint: Option<String>,
    model: ClassicModel<f64>,
    table: Option<Arc<EmbeddingTable<f64>>>,
}

impl Fitted for ClassicFitted {
    fn predict(&self, tweets: &[AnalyzedTweet]) -> Result<Vec<Label>> {
        let x = self.extractor.extract_matrix(tweets, self.table.as_deref())?;
        self.model.predict_all(&x)
    }

    fn artifact(&self) -> Artifact {
        Artifact::Classic {
            features: self.extractor.config.clone(),
            embedding_fingerprint: self.embedding_fingerprint.clone(),
            model: self.model.clone(),
        }
    }
}

struct NeuralFitted {
    model: Model<f64>,
    report: TrainReport,
}

impl Fitted for NeuralFitted {
    fn predict(&self, tweets: &[AnalyzedTweet]) -> Result<Vec<Label>> {
        tweets.iter().map(|t| self.model.predict(&t.tokens)).collect()
    }

    fn artifact(&self) -> Artifact {
        Artifact::Neural {
            checkpoint: self.model.to_checkpoint(),
            report: self.report.clone(),
        }
    }
}
