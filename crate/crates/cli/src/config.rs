//! Run configuration read from `--config` (TOML or JSON).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use numsarc::classic::ClassicConfig;
use numsarc::embeddings::SgnsConfig;
use numsarc::eval::{NeuralSettings, PipelineConfig, PipelineKind};
use numsarc::rulebase::RuleConfig;
use numsarc::synth::SynthConfig;
use serde::{Deserialize, Serialize};

/// Every setting a subcommand may consult. Command-line flags override the
/// matching fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub pipeline: Option<PipelineKind>,
    pub folds: usize,
    pub embeddings: Option<PathBuf>,
    pub rule: RuleConfig,
    pub features: String,
    pub classic: ClassicConfig,
    pub neural: NeuralSettings,
    pub sgns: SgnsConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        RunConfig {
            seed: 0,
            pipeline: None,
            folds: 5,
            embeddings: None,
            rule: p.rule,
            features: p.features,
            classic: p.classic,
            neural: p.neural,
            sgns: SgnsConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    /// `.json` files parse as JSON, anything else as TOML. Relative paths
    /// inside the file resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&src).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&src).with_context(|| format!("parsing {}", path.display()))?
        };
        if let (Some(emb), Some(dir)) = (&cfg.embeddings, path.parent()) {
            if emb.is_relative() {
                cfg.embeddings = Some(dir.join(emb));
            }
        }
        Ok(cfg)
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            rule: self.rule,
            features: self.features.clone(),
            classic: self.classic.clone(),
            neural: self.neural.clone(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.folds < 2 {
            bail!("folds must be at least 2, got {}", self.folds);
        }
        if let Some(p) = &self.embeddings {
            if !p.is_file() {
                bail!("embedding file {} does not exist", p.display());
            }
        }
        Ok(())
    }
}
