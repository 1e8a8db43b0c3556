//! Hand-crafted feature families and their assembly into fixed layouts.

mod lexicon;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use lexicon::{parse_word_list, EmoticonLexicon, SentimentLexicon};

use crate::embeddings::{compose_vector, EmbeddingTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::text::AnalyzedTweet;

/// (positive, negative, highly emotional positive, highly emotional negative)
/// word counts. Highly emotional means an adjective, adverb or verb tag.
pub fn sentiment_features(tweet: &AnalyzedTweet, lex: &SentimentLexicon) -> [usize; 4] {
    let mut out = [0; 4];
    for (i, w) in tweet.tokens.iter().enumerate() {
        let emotional = tweet.tags.get(i).is_some_and(|t| t.is_emotional());
        if lex.is_positive(w) {
            out[0] += 1;
            out[2] += usize::from(emotional);
        } else if lex.is_negative(w) {
            out[1] += 1;
            out[3] += usize::from(emotional);
        }
    }
    out
}

/// (positive emoticon present, negative emoticon present, positive and
/// negative words both present, word polarity opposite to an emoticon), each 0 or 1.
pub fn emoticon_features(tweet: &AnalyzedTweet, slex: &SentimentLexicon, elex: &EmoticonLexicon) -> [usize; 4] {
    let has = |f: &dyn Fn(&str) -> bool| tweet.tokens.iter().any(|t| f(t));
    let pos_emo = has(&|t| elex.is_positive(t));
    let neg_emo = has(&|t| elex.is_negative(t));
    let pos_word = has(&|t| slex.is_positive(t));
    let neg_word = has(&|t| slex.is_negative(t));
    [
        usize::from(pos_emo),
        usize::from(neg_emo),
        usize::from(pos_word && neg_word),
        usize::from((pos_word && neg_emo) || (neg_word && pos_emo)),
    ]
}

/// ('!', '.', '?', all-caps words, '\'') counts. The ellipsis character
/// counts as three dots. A word is all-caps when it has at least two
/// letters and none of them is lowercase.
pub fn punctuation_features(text: &str) -> [usize; 5] {
    let mut out = [0; 5];
    for c in text.chars() {
        match c {
            '!' => out[0] += 1,
            '.' => out[1] += 1,
            '\u{2026}' => out[1] += 3,
            '?' => out[2] += 1,
            '\'' => out[4] += 1,
            _ => {}
        }
    }
    out[3] = text
        .split_whitespace()
        .filter(|w| {
            let letters: Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
            letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
        })
        .count();
    out
}

/// First mention's value and a one-hot over `units`. Unknown or missing
/// units give an all-zero one-hot; no mention gives value 0 as well.
pub fn numeric_features(tweet: &AnalyzedTweet, units: &[String]) -> (f64, Vec<u8>) {
    let mut onehot = vec![0; units.len()];
    let Some(m) = tweet.first_mention() else {
        return (0.0, onehot);
    };
    if let Some(i) = m.unit.as_ref().and_then(|u| units.iter().position(|x| x == u)) {
        onehot[i] = 1;
    }
    (m.value, onehot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Sentiment,
    Emoticon,
    Punctuation,
    NumberValue,
    UnitOnehot,
    TweetEmbedding,
}

impl Family {
    /// Assembly order.
    pub const ALL: [Family; 6] = [
        Family::Sentiment,
        Family::Emoticon,
        Family::Punctuation,
        Family::NumberValue,
        Family::UnitOnehot,
        Family::TweetEmbedding,
    ];

    pub fn short(self) -> &'static str {
        match self {
            Family::Sentiment => "S",
            Family::Emoticon => "E",
            Family::Punctuation => "P",
            Family::NumberValue => "value",
            Family::UnitOnehot => "unit",
            Family::TweetEmbedding => "emb",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "s" | "sentiment" => Family::Sentiment,
            "e" | "emoticon" => Family::Emoticon,
            "p" | "punctuation" => Family::Punctuation,
            "value" | "number_value" | "number" => Family::NumberValue,
            "unit" | "unit_onehot" => Family::UnitOnehot,
            "emb" | "embedding" | "tweet_embedding" => Family::TweetEmbedding,
            other => return Err(Error::invalid(format!("unknown feature family {other:?}"))),
        })
    }
}

const SENTIMENT_NAMES: [&str; 4] = ["pos_words", "neg_words", "emotional_pos", "emotional_neg"];
const EMOTICON_NAMES: [&str; 4] = ["pos_emoticon", "neg_emoticon", "word_contrast", "word_emoticon_contrast"];
const PUNCTUATION_NAMES: [&str; 5] = ["exclamations", "dots", "questions", "caps_words", "quotes"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub family: Family,
    pub offset: usize,
    pub len: usize,
}

/// Enabled families, embedding dimension and the frozen unit vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub families: BTreeSet<Family>,
    pub embedding_dim: usize,
    pub units: Vec<String>,
}

impl FeatureConfig {
    pub fn new(families: impl IntoIterator<Item = Family>, embedding_dim: usize, units: Vec<String>) -> Result<Self> {
        let families: BTreeSet<Family> = families.into_iter().collect();
        if families.is_empty() {
            return Err(Error::invalid("at least one feature family must be enabled"));
        }
        if families.contains(&Family::TweetEmbedding) && embedding_dim == 0 {
            return Err(Error::invalid("tweet embedding family needs a positive dimension"));
        }
        Ok(FeatureConfig {
            families,
            embedding_dim,
            units,
        })
    }

    /// Parses a `+`/`,` separated family list such as `S+P+E+value+unit`.
    pub fn parse_families(spec: &str) -> Result<BTreeSet<Family>> {
        spec.split(['+', ','])
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect()
    }

    /// Sorted set of units seen in `train`'s first mentions.
    pub fn units_from(train: &[AnalyzedTweet]) -> Vec<String> {
        let set: BTreeSet<String> = train
            .iter()
            .filter_map(|t| t.first_mention().and_then(|m| m.unit.clone()))
            .collect();
        set.into_iter().collect()
    }

    pub fn has(&self, f: Family) -> bool {
        self.families.contains(&f)
    }

    fn family_len(&self, f: Family) -> usize {
        match f {
            Family::Sentiment | Family::Emoticon => 4,
            Family::Punctuation => 5,
            Family::NumberValue => 1,
            Family::UnitOnehot => self.units.len(),
            Family::TweetEmbedding => self.embedding_dim,
        }
    }

    pub fn layout(&self) -> Vec<Segment> {
        let mut offset = 0;
        Family::ALL
            .iter()
            .filter(|f| self.has(**f))
            .map(|&family| {
                let len = self.family_len(family);
                let s = Segment { family, offset, len };
                offset += len;
                s
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.layout().iter().map(|s| s.len).sum()
    }

    /// One column name per component, prefixed by the family tag.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for seg in self.layout() {
            let tag = seg.family.short();
            match seg.family {
                Family::Sentiment => names.extend(SENTIMENT_NAMES.iter().map(|n| format!("{tag}:{n}"))),
                Family::Emoticon => names.extend(EMOTICON_NAMES.iter().map(|n| format!("{tag}:{n}"))),
                Family::Punctuation => names.extend(PUNCTUATION_NAMES.iter().map(|n| format!("{tag}:{n}"))),
                Family::NumberValue => names.push(tag.to_string()),
                Family::UnitOnehot => names.extend(self.units.iter().map(|u| format!("{tag}:{u}"))),
                Family::TweetEmbedding => names.extend((0..seg.len).map(|i| format!("{tag}:{i}"))),
            }
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub layout: Vec<Segment>,
}

/// Lexicons plus a config; computes feature vectors.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub config: FeatureConfig,
    pub sentiment: SentimentLexicon,
    pub emoticons: EmoticonLexicon,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig) -> Self {
        FeatureExtractor {
            config,
            sentiment: SentimentLexicon::default(),
            emoticons: EmoticonLexicon::default(),
        }
    }

    /// Concatenates the enabled families in [`Family::ALL`] order. Punctuation
    /// uses the cased text when the tweet carries it.
    pub fn extract<T: Real>(&self, tweet: &AnalyzedTweet, table: Option<&EmbeddingTable<T>>) -> Result<FeatureVector<T>> {
        let cfg = &self.config;
        let table = if cfg.has(Family::TweetEmbedding) {
            let t = table.ok_or_else(|| Error::invalid("tweet embedding family needs an embedding table"))?;
            if t.dim() != cfg.embedding_dim {
                return Err(Error::DimensionMismatch {
                    expected: cfg.embedding_dim,
                    found: t.dim(),
                });
            }
            Some(t)
        } else {
            None
        };
        let mut values = Vec::with_capacity(cfg.width());
        let counts = |v: &mut Vec<T>, c: &[usize]| v.extend(c.iter().map(|&x| T::from_count(x)));
        for f in Family::ALL.into_iter().filter(|f| cfg.has(*f)) {
            match f {
                Family::Sentiment => counts(&mut values, &sentiment_features(tweet, &self.sentiment)),
                Family::Emoticon => counts(&mut values, &emoticon_features(tweet, &self.sentiment, &self.emoticons)),
                Family::Punctuation => {
                    let text = tweet.cased_text.as_deref().unwrap_or(&tweet.text);
                    counts(&mut values, &punctuation_features(text))
                }
                Family::NumberValue => values.push(T::lit(numeric_features(tweet, &[]).0)),
                Family::UnitOnehot => {
                    let (_, onehot) = numeric_features(tweet, &cfg.units);
                    values.extend(onehot.into_iter().map(|b| T::from_count(b as usize)));
                }
                Family::TweetEmbedding => {
                    let table = table.expect("checked above");
                    values.extend(compose_vector(&tweet.tokens, table).vector);
                }
            }
        }
        Ok(FeatureVector {
            values,
            layout: cfg.layout(),
        })
    }

    /// Row-major matrix, one row per tweet.
    pub fn extract_matrix<T: Real>(&self, tweets: &[AnalyzedTweet], table: Option<&EmbeddingTable<T>>) -> Result<Vec<Vec<T>>> {
        tweets.iter().map(|t| self.extract(t, table).map(|v| v.values)).collect()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `id,label,<columns...>` rows. Labels are 0/1, empty when unknown.
pub fn write_feature_csv<T: Real>(
    path: &Path,
    config: &FeatureConfig,
    tweets: &[AnalyzedTweet],
    rows: &[Vec<T>],
) -> Result<()> {
    if tweets.len() != rows.len() {
        return Err(Error::invalid("tweet and row counts differ"));
    }
    let mut out = String::from("id,label");
    for name in config.column_names() {
        out.push(',');
        out.push_str(&csv_field(&name));
    }
    out.push('\n');
    for (t, row) in tweets.iter().zip(rows) {
        out.push_str(&csv_field(&t.id));
        out.push(',');
        if let Some(l) = t.label {
            let _ = write!(out, "{}", l.as_u8());
        }
        for x in row {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests;
