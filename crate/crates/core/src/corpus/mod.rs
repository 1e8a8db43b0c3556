//! Corpus ingestion: hashtag labeling, normalization, dataset presets and folds.

mod dataset;
mod folds;
mod io;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use dataset::{build_dataset, DatasetName, DatasetSpec};
pub use folds::{stratified_kfold, FoldAssignment};
pub use io::{read_jsonl, write_jsonl};

use crate::error::{Error, Result};
use crate::text::{is_numeric_token, tokenize, Token};

/// Binary class. Serialized as `0` / `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    NonSarcastic,
    Sarcastic,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_positive(self) -> bool {
        self == Label::Sarcastic
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Sarcastic
        } else {
            Label::NonSarcastic
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Label::NonSarcastic),
            1 => Ok(Label::Sarcastic),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// A record as collected, before cleaning. `label` is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl RawTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawTweet {
            id: id.into(),
            text: text.into(),
            label: None,
        }
    }
}

/// A cleaned, lowercased tweet with its class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTweet {
    pub id: String,
    pub text: String,
    pub label: Label,
    /// Cleaned text before lowercasing; feeds the capital-word count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cased: Option<String>,
}

impl LabeledTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        LabeledTweet {
            id: id.into(),
            text: text.into(),
            label,
            cased: None,
        }
    }
}

pub const SARCASTIC_HASHTAGS: &[&str] = &["sarcasm", "sarcastic", "beingsarcastic"];
pub const NON_SARCASTIC_HASHTAGS: &[&str] = &["nonsarcasm", "notsarcastic"];

/// The five label hashtags, lowercase and without `#`.
pub fn default_label_hashtags() -> HashSet<String> {
    SARCASTIC_HASHTAGS
        .iter()
        .chain(NON_SARCASTIC_HASHTAGS)
        .map(|s| s.to_string())
        .collect()
}

fn is_url(lower: &str) -> bool {
    lower.contains("://") || lower.starts_with("t.co/") || lower.starts_with("www.")
}

/// Hashtag name without `#` and trailing punctuation, lowercased.
fn hashtag_name(token: &str) -> Option<String> {
    let name = token.strip_prefix('#')?.trim_start_matches('#');
    let core = name.trim_end_matches(|c: char| !c.is_ascii_alphanumeric());
    Some(core.to_ascii_lowercase())
}

fn hashtag_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .flat_map(|w| w.split_inclusive_hash())
        .filter_map(hashtag_name)
}

trait SplitHash {
    fn split_inclusive_hash(&self) -> Vec<&str>;
}

impl SplitHash for str {
    /// Splits before every `#`, so `a#b#c` yields `a`, `#b`, `#c`.
    fn split_inclusive_hash(&self) -> Vec<&str> {
        let mut parts = Vec::new();
        let mut start = 0;
        for (i, c) in self.char_indices() {
            if c == '#' && i > start {
                parts.push(&self[start..i]);
                start = i;
            }
        }
        if start < self.len() {
            parts.push(&self[start..]);
        }
        parts
    }
}

/// Cleans a raw tweet but keeps its case.
///
/// Expands the ellipsis character to three dots and maps curly apostrophes
/// to `'`, then drops remaining non-ASCII characters, URLs, @-mentions, a leading `rt` marker and
/// the given label hashtags; other hashtags lose their `#`. Returns `None`
/// when nothing is left.
pub fn clean_tweet(raw: &RawTweet, label_hashtags: &HashSet<String>) -> Option<String> {
    let ascii: String = raw
        .text
        .replace('\u{2026}', "...")
        .replace(['\u{2018}', '\u{2019}'], "'")
        .chars()
        .filter(char::is_ascii)
        .collect();
    let mut kept: Vec<&str> = Vec::new();
    for word in ascii.split_whitespace() {
        for mut token in word.split_inclusive_hash() {
            if token.starts_with('#') {
                let name = hashtag_name(token).unwrap_or_default();
                if label_hashtags.contains(&name) {
                    continue;
                }
                token = token.trim_start_matches('#');
            }
            if token.is_empty() || token.starts_with('@') || is_url(&token.to_ascii_lowercase()) {
                continue;
            }
            kept.push(token);
        }
    }
    let start = kept
        .iter()
        .position(|t| !t.eq_ignore_ascii_case("rt"))
        .unwrap_or(kept.len());
    let text = kept[start..].join(" ");
    (!text.is_empty()).then_some(text)
}

/// [`clean_tweet`] followed by lowercasing.
pub fn normalize_tweet(raw: &RawTweet, label_hashtags: &HashSet<String>) -> Option<String> {
    clean_tweet(raw, label_hashtags).map(|t| t.to_ascii_lowercase())
}

/// Distant-supervision label from the tweet's hashtags.
///
/// Conflicting markers yield `None`.
pub fn label_by_hashtag(raw: &RawTweet) -> Option<Label> {
    let mut sarcastic = false;
    let mut non = false;
    for name in hashtag_tokens(&raw.text) {
        sarcastic |= SARCASTIC_HASHTAGS.contains(&name.as_str());
        non |= NON_SARCASTIC_HASHTAGS.contains(&name.as_str());
    }
    match (sarcastic, non) {
        (true, false) => Some(Label::Sarcastic),
        (false, true) => Some(Label::NonSarcastic),
        _ => None,
    }
}

/// True iff some token is a bare number (`2`, `3.5`, `8:30`).
pub fn is_numeric_tweet(tokens: &[Token]) -> bool {
    tokens.iter().any(|t| is_numeric_token(&t.surface))
}

pub fn is_numeric_text(text: &str) -> bool {
    is_numeric_tweet(&tokenize(text))
}

/// Share of tweets that mention a bare number.
pub fn numeric_fraction(corpus: &[LabeledTweet]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let numeric = corpus.iter().filter(|t| is_numeric_text(&t.text)).count();
    Ok(numeric as f64 / corpus.len() as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub read: usize,
    pub kept: usize,
    pub empty: usize,
    pub unlabeled: usize,
    pub duplicates: usize,
}

/// Labels, cleans and deduplicates raw records.
///
/// An explicit `label` wins over hashtags. Duplicates are detected on the
/// normalized text; the first occurrence is kept.
pub fn ingest(raw: &[RawTweet]) -> Result<(Vec<LabeledTweet>, IngestStats)> {
    let hashtags = default_label_hashtags();
    let mut stats = IngestStats {
        read: raw.len(),
        ..Default::default()
    };
    let mut ids = HashSet::new();
    let mut texts = HashSet::new();
    let mut out = Vec::new();
    for r in raw {
        if r.id.is_empty() {
            return Err(Error::invalid("tweet with empty id"));
        }
        if !ids.insert(r.id.as_str()) {
            return Err(Error::invalid(format!("duplicate tweet id {:?}", r.id)));
        }
        let Some(label) = r.label.or_else(|| label_by_hashtag(r)) else {
            stats.unlabeled += 1;
            continue;
        };
        let Some(cased) = clean_tweet(r, &hashtags) else {
            stats.empty += 1;
            continue;
        };
        let text = cased.to_ascii_lowercase();
        if !texts.insert(text.clone()) {
            stats.duplicates += 1;
            continue;
        }
        out.push(LabeledTweet {
            id: r.id.clone(),
            text,
            label,
            cased: Some(cased),
        });
    }
    stats.kept = out.len();
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(text: &str) -> Option<String> {
        normalize_tweet(&RawTweet::new("x", text), &default_label_hashtags())
    }

    #[test]
    fn label_hashtag_is_stripped() {
        assert_eq!(norm("Love waking up at 4 am #sarcasm").unwrap(), "love waking up at 4 am");
    }

    #[test]
    fn urls_and_mentions_are_removed() {
        assert_eq!(norm("see http://t.co/ab @bob hi").unwrap(), "see hi");
        assert_eq!(norm("t.co/xyz www.example.com ok").unwrap(), "ok");
    }

    #[test]
    fn non_ascii_is_removed() {
        assert_eq!(norm("Καλημέρα hello").unwrap(), "hello");
    }

    #[test]
    fn other_hashtags_keep_their_word() {
        assert_eq!(norm("#Monday mornings #BeingSarcastic").unwrap(), "monday mornings");
        assert_eq!(norm("great#sarcasm day").unwrap(), "great day");
    }

    #[test]
    fn retweet_marker_and_whitespace() {
        assert_eq!(norm("RT @bob:   so   fun").unwrap(), "so fun");
    }

    #[test]
    fn nothing_left_is_none() {
        assert_eq!(norm("@bob #sarcasm http://x.y"), None);
        assert_eq!(norm("   "), None);
    }

    #[test]
    fn hashtag_labels() {
        assert_eq!(label_by_hashtag(&RawTweet::new("1", "ugh #sarcasm")), Some(Label::Sarcastic));
        assert_eq!(label_by_hashtag(&RawTweet::new("1", "so #Sarcastic!")), Some(Label::Sarcastic));
        assert_eq!(
            label_by_hashtag(&RawTweet::new("2", "fine day #notsarcastic")),
            Some(Label::NonSarcastic)
        );
        assert_eq!(label_by_hashtag(&RawTweet::new("3", "fine day")), None);
        assert_eq!(label_by_hashtag(&RawTweet::new("4", "#sarcasm #nonsarcasm")), None);
    }

    #[test]
    fn numeric_tweets() {
        let t = |s: &str| is_numeric_tweet(&tokenize(s));
        assert!(t("having 2 hours"));
        assert!(!t("model34d is great"));
        assert!(!t("no digits"));
        assert!(!t("i <3 it 4s"));
    }

    #[test]
    fn numeric_fraction_edges() {
        let num = LabeledTweet::new("a", "at 4 am", Label::Sarcastic);
        let non = LabeledTweet::new("b", "at four", Label::Sarcastic);
        assert_eq!(numeric_fraction(&[num.clone(), num.clone()]).unwrap(), 1.0);
        assert_eq!(numeric_fraction(std::slice::from_ref(&non)).unwrap(), 0.0);
        assert_eq!(numeric_fraction(&[num, non]).unwrap(), 0.5);
        assert!(matches!(numeric_fraction(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn ingest_labels_dedups_and_counts() {
        let raw = vec![
            RawTweet::new("1", "Love waking up at 4 am #sarcasm"),
            RawTweet::new("2", "love waking up at 4 AM #sarcastic"),
            RawTweet::new("3", "nice weather #notsarcastic"),
            RawTweet::new("4", "no label here"),
            RawTweet::new("5", "#sarcasm"),
            RawTweet {
                id: "6".into(),
                text: "explicit".into(),
                label: Some(Label::NonSarcastic),
            },
        ];
        let (tweets, stats) = ingest(&raw).unwrap();
        let ids: Vec<&str> = tweets.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["1", "3", "6"]);
        assert_eq!(tweets[0].cased.as_deref(), Some("Love waking up at 4 am"));
        assert_eq!(stats.duplicates, 1);
        assert_eq!(stats.unlabeled, 1);
        assert_eq!(stats.empty, 1);
        assert_eq!(stats.kept, 3);
    }

    #[test]
    fn ingest_rejects_duplicate_ids() {
        let raw = vec![RawTweet::new("1", "a #sarcasm"), RawTweet::new("1", "b #sarcasm")];
        assert!(ingest(&raw).is_err());
    }

    #[test]
    fn label_serializes_as_integer() {
        let t = LabeledTweet::new("a", "x", Label::Sarcastic);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"id":"a","text":"x","label":1}"#);
        assert!(serde_json::from_str::<LabeledTweet>(r#"{"id":"a","text":"x","label":2}"#).is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(text in "(RT |rt )?([A-Za-z0-9#@:/.!?' ]|é|ü|http://x\\.co/a|#sarcasm|#notsarcastic){0,30}") {
            let hashtags = default_label_hashtags();
            if let Some(once) = normalize_tweet(&RawTweet::new("x", &text), &hashtags) {
                let twice = normalize_tweet(&RawTweet::new("x", &once), &hashtags);
                prop_assert_eq!(twice.as_deref(), Some(once.as_str()));
            }
        }

        #[test]
        fn label_hashtags_never_survive(text in "([a-z ]|#sarcasm|#Sarcastic|#beingsarcastic|#nonsarcasm|#NotSarcastic|#sarcasmx|!|\\.){0,25}") {
            if let Some(out) = norm(&text) {
                for tag in default_label_hashtags() {
                    let needle = format!("#{tag}");
                    prop_assert!(!out.contains(&needle), "{} in {}", needle, out);
                }
                prop_assert!(out.is_ascii());
                prop_assert!(!out.contains("  "));
            }
        }

        #[test]
        fn numeric_fraction_matches_brute_force(flags in proptest::collection::vec(any::<bool>(), 1..60)) {
            let corpus: Vec<LabeledTweet> = flags
                .iter()
                .enumerate()
                .map(|(i, &numeric)| {
                    let text = if numeric { format!("took {i} hours") } else { format!("took x{i} hours") };
                    LabeledTweet::new(i.to_string(), text, Label::Sarcastic)
                })
                .collect();
            let brute = corpus.iter().filter(|t| tokenize(&t.text).iter().any(|tok| is_numeric_token(&tok.surface))).count();
            prop_assert_eq!(numeric_fraction(&corpus).unwrap(), brute as f64 / corpus.len() as f64);
        }
    }
}
