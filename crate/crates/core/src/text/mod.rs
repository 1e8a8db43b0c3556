//! Tokenization, tagging, noun-phrase chunking and numeric mention extraction.

mod chunk;
mod numeric;
mod pos;
mod tokenize;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use chunk::extract_noun_phrases;
pub use numeric::{
    extract_numeric_mentions, parse_number, MentionDiagnostic, NumericMention, UnitNormalizer,
    UNIT_STOPWORDS,
};
pub use pos::{PosTag, TaggedToken, Tagger};
pub use tokenize::{is_emoticon, is_numeric_token, is_sentence_punct, tokenize, Token, EMOTICONS};

use crate::corpus::{Label, LabeledTweet};

/// Everything downstream models need from one tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzedTweet {
    pub id: String,
    pub tokens: Vec<String>,
    pub tags: Vec<PosTag>,
    pub noun_phrase_words: Vec<String>,
    pub mentions: Vec<NumericMention>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<MentionDiagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    /// Text before lowercasing, when the source kept it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cased_text: Option<String>,
    pub text: String,
}

impl AnalyzedTweet {
    pub fn first_mention(&self) -> Option<&NumericMention> {
        self.mentions.first()
    }
}

/// Tagger and unit table bundled together. Cheap to clone.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    tagger: Arc<Tagger>,
    units: Arc<UnitNormalizer>,
}

impl Analyzer {
    pub fn new(tagger: Tagger, units: UnitNormalizer) -> Self {
        Analyzer {
            tagger: Arc::new(tagger),
            units: Arc::new(units),
        }
    }

    pub fn tagger(&self) -> &Tagger {
        &self.tagger
    }

    pub fn units(&self) -> &UnitNormalizer {
        &self.units
    }

    pub fn analyze_text(&self, id: &str, text: &str) -> AnalyzedTweet {
        let tokens = tokenize(text);
        let tagged = self.tagger.tag(&tokens);
        let noun_phrase_words = extract_noun_phrases(&tagged);
        let (mentions, diagnostics) = extract_numeric_mentions(&tagged, &self.units);
        AnalyzedTweet {
            id: id.to_string(),
            tags: tagged.iter().map(|t| t.tag).collect(),
            tokens: tokens.into_iter().map(|t| t.surface).collect(),
            noun_phrase_words,
            mentions,
            diagnostics,
            label: None,
            cased_text: None,
            text: text.to_string(),
        }
    }

    pub fn analyze(&self, tweet: &LabeledTweet) -> AnalyzedTweet {
        let mut a = self.analyze_text(&tweet.id, &tweet.text);
        a.label = Some(tweet.label);
        a.cased_text = tweet.cased.clone();
        a
    }

    pub fn analyze_all(&self, tweets: &[LabeledTweet]) -> Vec<AnalyzedTweet> {
        tweets.iter().map(|t| self.analyze(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_fills_every_field() {
        let a = Analyzer::default().analyze_text("t1", "this phone has an awesome battery back-up of 2 hours");
        assert_eq!(a.tokens.len(), a.tags.len());
        assert_eq!(a.noun_phrase_words.len(), 5);
        assert_eq!(a.first_mention().unwrap().unit.as_deref(), Some("hours"));
        for w in &a.noun_phrase_words {
            assert!(a.tokens.contains(w));
        }
    }
}
