//! Reading corpora in whichever stage they were saved.

use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use numsarc::corpus::{read_jsonl, Label};
use numsarc::embeddings::load_embeddings;
use numsarc::text::{AnalyzedTweet, Analyzer};
use numsarc::EmbeddingTable64;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// A cleaned record; label optional so unlabelled text can be analyzed.
#[derive(Debug, Deserialize)]
struct Record {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<Label>,
    #[serde(default)]
    cased: Option<String>,
}

/// Loads JSONL that is either already analyzed (has `tokens`) or cleaned
/// `{id, text, label?}` records, analyzing the latter.
pub fn load_tweets(path: &Path, analyzer: &Analyzer) -> Result<Vec<AnalyzedTweet>> {
    let values: Vec<Value> = read_jsonl(path)?;
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let ctx = || format!("{}:{}", path.display(), i + 1);
            if v.get("tokens").is_some() {
                return serde_json::from_value(v).with_context(ctx);
            }
            let r: Record = serde_json::from_value(v).with_context(ctx)?;
            let mut a = analyzer.analyze_text(&r.id, &r.text);
            a.label = r.label;
            a.cased_text = r.cased;
            Ok(a)
        })
        .collect()
}

pub fn load_table(path: Option<&Path>) -> Result<Option<Arc<EmbeddingTable64>>> {
    path.map(|p| {
        load_embeddings(p, None)
            .map(Arc::new)
            .with_context(|| format!("loading embeddings {}", p.display()))
    })
    .transpose()
}

/// SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}
