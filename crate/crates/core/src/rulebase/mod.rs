//! Sarcastic and non-sarcastic repositories with the interval cascade.
//!
//! Each repository keeps one entry per training tweet (its noun-phrase words,
//! optionally their mean vector, and the first numeric mention) plus
//! per-unit statistics over every mention value in the repository.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::embeddings::{compose_vector, cosine, EmbeddingTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::text::AnalyzedTweet;

pub const DEFAULT_Z: f64 = 2.58;
pub const DEFAULT_MIN_SIMILARITY: f64 = 0.5;

/// Mean and population standard deviation of one unit's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UnitStats<T> {
    pub unit: String,
    pub mean: T,
    pub std_dev: T,
    pub count: usize,
}

impl<T: Real> UnitStats<T> {
    /// `None` for an empty slice.
    pub fn from_values(unit: &str, values: &[T]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = T::from_count(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        Some(UnitStats {
            unit: unit.to_string(),
            mean,
            std_dev: var.sqrt(),
            count: values.len(),
        })
    }

    pub fn interval(&self, z: T) -> (T, T) {
        (self.mean - z * self.std_dev, self.mean + z * self.std_dev)
    }
}

/// `|value - mean| <= z * sigma`.
pub fn within_interval<T: Real>(value: T, stats: &UnitStats<T>, z: T) -> bool {
    (value - stats.mean).abs() <= z * stats.std_dev
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RepositoryEntry<T> {
    /// Position of the source tweet in the list the repository was built from.
    pub tweet_index: usize,
    pub tweet_id: String,
    pub noun_phrase_words: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noun_phrase_vector: Option<Vec<T>>,
    /// Canonical unit of the first mention; the key into `unit_stats`.
    pub unit: Option<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTweet {
    pub tweet_index: usize,
    pub tweet_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Repository<T> {
    pub label: Label,
    pub entries: Vec<RepositoryEntry<T>>,
    pub unit_stats: BTreeMap<String, UnitStats<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedTweet>,
}

impl<T: Real> Repository<T> {
    pub fn stats_for(&self, unit: &str) -> Option<&UnitStats<T>> {
        self.unit_stats.get(unit)
    }
}

/// Builds one repository. Tweets without a numeric mention are skipped and
/// listed in `skipped`. With a table, every entry also stores the mean
/// vector of its noun-phrase words.
pub fn build_repository<T: Real>(
    tweets: &[AnalyzedTweet],
    label: Label,
    table: Option<&EmbeddingTable<T>>,
) -> Result<Repository<T>> {
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut by_unit: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for (i, t) in tweets.iter().enumerate() {
        if let Some(l) = t.label {
            if l != label {
                return Err(Error::invalid(format!(
                    "tweet {} is labelled {l} but the repository is {label}",
                    t.id
                )));
            }
        }
        let Some(first) = t.first_mention() else {
            skipped.push(SkippedTweet {
                tweet_index: i,
                tweet_id: t.id.clone(),
                reason: "no numeric mention".into(),
            });
            continue;
        };
        for m in &t.mentions {
            if let Some(u) = &m.unit {
                by_unit.entry(u.clone()).or_default().push(T::lit(m.value));
            }
        }
        entries.push(RepositoryEntry {
            tweet_index: i,
            tweet_id: t.id.clone(),
            noun_phrase_words: t.noun_phrase_words.clone(),
            noun_phrase_vector: table.map(|tb| compose_vector(&t.noun_phrase_words, tb).vector),
            unit: first.unit.clone(),
            value: first.value,
        });
    }
    let unit_stats = by_unit
        .iter()
        .filter_map(|(u, vals)| UnitStats::from_values(u, vals).map(|s| (u.clone(), s)))
        .collect();
    Ok(Repository {
        label,
        entries,
        unit_stats,
        skipped,
    })
}

/// Entry with the largest set overlap; ties go to the lowest tweet index.
pub fn match_exact<'r, T, S: AsRef<str>>(
    query_words: &[S],
    repo: &'r Repository<T>,
) -> Option<(&'r RepositoryEntry<T>, usize)> {
    let query: BTreeSet<&str> = query_words.iter().map(|w| w.as_ref()).collect();
    let mut best: Option<(&RepositoryEntry<T>, usize)> = None;
    for e in &repo.entries {
        let words: BTreeSet<&str> = e.noun_phrase_words.iter().map(String::as_str).collect();
        let overlap = words.intersection(&query).count();
        if overlap == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, o)) => overlap > o || (overlap == o && e.tweet_index < b.tweet_index),
        };
        if better {
            best = Some((e, overlap));
        }
    }
    best
}

/// Entry with the highest cosine similarity, if it reaches `min_similarity`.
/// Ties go to the lowest tweet index.
pub fn match_cosine<'r, T: Real>(
    query: &[T],
    repo: &'r Repository<T>,
    min_similarity: T,
) -> Result<Option<(&'r RepositoryEntry<T>, T)>> {
    let mut best: Option<(&RepositoryEntry<T>, T)> = None;
    for e in &repo.entries {
        let v = e
            .noun_phrase_vector
            .as_deref()
            .ok_or_else(|| Error::invalid(format!("entry {} has no vector", e.tweet_id)))?;
        let s = cosine(query, v)?;
        let better = match best {
            None => true,
            Some((b, bs)) => s > bs || (s == bs && e.tweet_index < b.tweet_index),
        };
        if better {
            best = Some((e, s));
        }
    }
    Ok(best.filter(|&(_, s)| s >= min_similarity))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStrategy {
    /// Noun-phrase word overlap.
    Exact,
    /// Cosine similarity of mean noun-phrase vectors.
    Cosine,
}

impl std::str::FromStr for MatchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(MatchStrategy::Exact),
            "cosine" => Ok(MatchStrategy::Cosine),
            _ => Err(Error::invalid(format!("unknown strategy {s:?} (expected exact or cosine)"))),
        }
    }
}

impl std::fmt::Display for MatchStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatchStrategy::Exact => "exact",
            MatchStrategy::Cosine => "cosine",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RulePath {
    SarcMatchIn,
    SarcMatchOut,
    NonsarcMatchIn,
    NonsarcMatchOut,
    NoMatch,
}

impl RulePath {
    /// Serialized name, e.g. `SARC_MATCH_IN`.
    pub fn name(self) -> &'static str {
        match self {
            RulePath::SarcMatchIn => "SARC_MATCH_IN",
            RulePath::SarcMatchOut => "SARC_MATCH_OUT",
            RulePath::NonsarcMatchIn => "NONSARC_MATCH_IN",
            RulePath::NonsarcMatchOut => "NONSARC_MATCH_OUT",
            RulePath::NoMatch => "NO_MATCH",
        }
    }

    pub fn label(self) -> Label {
        Label::from_bool(matches!(self, RulePath::SarcMatchIn | RulePath::NonsarcMatchOut))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulePrediction {
    pub label: Label,
    pub path: RulePath,
    /// `(repository label, tweet index)` of the matched entry.
    pub matched_entry: Option<(Label, usize)>,
    pub interval: Option<(f64, f64)>,
    /// Overlap count or cosine similarity of the match.
    pub score: Option<f64>,
    /// Mentions after the first one, which the cascade ignores.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ignored_mentions: Vec<(f64, Option<String>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    pub strategy: MatchStrategy,
    pub z: f64,
    pub min_similarity: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            strategy: MatchStrategy::Exact,
            z: DEFAULT_Z,
            min_similarity: DEFAULT_MIN_SIMILARITY,
        }
    }
}

/// What a test tweet is matched on.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a, T> {
    Words(&'a [String]),
    Vector(&'a [T]),
}

fn find<'r, T: Real>(
    query: Query<'_, T>,
    repo: &'r Repository<T>,
    min_similarity: T,
) -> Result<Option<(&'r RepositoryEntry<T>, f64)>> {
    Ok(match query {
        Query::Words(w) => match_exact(w, repo).map(|(e, o)| (e, o as f64)),
        Query::Vector(v) => match_cosine(v, repo, min_similarity)?.map(|(e, s)| (e, s.as_f64())),
    })
}

/// Runs the cascade for an explicit query.
///
/// The sarcastic repository is consulted first. A match whose unit equals
/// the test unit decides the label there; otherwise the non-sarcastic
/// repository gets the same treatment with the labels reversed. Everything
/// else, including unitless mentions, ends in `NoMatch`.
pub fn predict_with_query<T: Real>(
    test: &AnalyzedTweet,
    query: Query<'_, T>,
    sarcastic: &Repository<T>,
    non_sarcastic: &Repository<T>,
    z: T,
    min_similarity: T,
) -> Result<RulePrediction> {
    let ignored_mentions = test.mentions.iter().skip(1).map(|m| (m.value, m.unit.clone())).collect();
    let no_match = RulePrediction {
        label: Label::NonSarcastic,
        path: RulePath::NoMatch,
        matched_entry: None,
        interval: None,
        score: None,
        ignored_mentions,
    };
    let Some((value, unit)) = test.first_mention().and_then(|m| m.unit.as_deref().map(|u| (m.value, u))) else {
        return Ok(no_match);
    };
    let value = T::lit(value);
    for (repo, inside, outside) in [
        (sarcastic, RulePath::SarcMatchIn, RulePath::SarcMatchOut),
        (non_sarcastic, RulePath::NonsarcMatchIn, RulePath::NonsarcMatchOut),
    ] {
        let Some((entry, score)) = find(query, repo, min_similarity)? else {
            continue;
        };
        if entry.unit.as_deref() != Some(unit) {
            continue;
        }
        let stats = repo
            .stats_for(unit)
            .ok_or_else(|| Error::invalid(format!("unit {unit:?} missing from repository statistics")))?;
        let path = if within_interval(value, stats, z) { inside } else { outside };
        let (lo, hi) = stats.interval(z);
        return Ok(RulePrediction {
            label: path.label(),
            path,
            matched_entry: Some((repo.label, entry.tweet_index)),
            interval: Some((lo.as_f64(), hi.as_f64())),
            score: Some(score),
            ..no_match
        });
    }
    Ok(no_match)
}

/// Both repositories plus the settings used to query them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RuleModel<T> {
    pub config: RuleConfig,
    /// Embedding dimension for the cosine strategy.
    pub dim: Option<usize>,
    pub embedding_fingerprint: Option<String>,
    pub sarcastic: Repository<T>,
    pub non_sarcastic: Repository<T>,
}

impl<T: Real> RuleModel<T> {
    /// Splits labelled training tweets into the two repositories. The cosine
    /// strategy needs `table`.
    pub fn build(train: &[AnalyzedTweet], config: RuleConfig, table: Option<&EmbeddingTable<T>>) -> Result<Self> {
        if !(config.z > 0.0) {
            return Err(Error::invalid("z must be positive"));
        }
        let table = match config.strategy {
            MatchStrategy::Exact => None,
            MatchStrategy::Cosine => {
                Some(table.ok_or_else(|| Error::invalid("cosine strategy needs an embedding table"))?)
            }
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for t in train {
            match t.label {
                Some(Label::Sarcastic) => pos.push(t.clone()),
                Some(Label::NonSarcastic) => neg.push(t.clone()),
                None => return Err(Error::invalid(format!("training tweet {} has no label", t.id))),
            }
        }
        Ok(RuleModel {
            config,
            dim: table.map(EmbeddingTable::dim),
            embedding_fingerprint: table.map(EmbeddingTable::fingerprint),
            sarcastic: build_repository(&pos, Label::Sarcastic, table)?,
            non_sarcastic: build_repository(&neg, Label::NonSarcastic, table)?,
        })
    }

    /// Checks that `table` is the one the repositories were built with.
    pub fn check_table(&self, table: Option<&EmbeddingTable<T>>) -> Result<()> {
        if self.config.strategy == MatchStrategy::Exact {
            return Ok(());
        }
        let table = table.ok_or_else(|| Error::invalid("cosine strategy needs an embedding table"))?;
        if self.embedding_fingerprint.as_deref() != Some(table.fingerprint().as_str()) {
            return Err(Error::invalid("embedding table differs from the one used to build the repositories"));
        }
        Ok(())
    }

    pub fn predict(&self, test: &AnalyzedTweet, table: Option<&EmbeddingTable<T>>) -> Result<RulePrediction> {
        let z = T::lit(self.config.z);
        let tau = T::lit(self.config.min_similarity);
        match self.config.strategy {
            MatchStrategy::Exact => predict_with_query(
                test,
                Query::Words(&test.noun_phrase_words),
                &self.sarcastic,
                &self.non_sarcastic,
                z,
                tau,
            ),
            MatchStrategy::Cosine => {
                let table = table.ok_or_else(|| Error::invalid("cosine strategy needs an embedding table"))?;
                let v = compose_vector(&test.noun_phrase_words, table).vector;
                predict_with_query(test, Query::Vector(&v), &self.sarcastic, &self.non_sarcastic, z, tau)
            }
        }
    }

    pub fn predict_all(&self, tests: &[AnalyzedTweet], table: Option<&EmbeddingTable<T>>) -> Result<Vec<RulePrediction>> {
        self.check_table(table)?;
        tests.iter().map(|t| self.predict(t, table)).collect()
    }
}
