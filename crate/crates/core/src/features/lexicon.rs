use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

const POSITIVE_WORDS: &str = include_str!("../../data/positive_words.txt");
const NEGATIVE_WORDS: &str = include_str!("../../data/negative_words.txt");
const POSITIVE_EMOTICONS: &str = include_str!("../../data/emoticons_positive.txt");
const NEGATIVE_EMOTICONS: &str = include_str!("../../data/emoticons_negative.txt");

/// One entry per line; blank lines and `#` comments skipped; lowercased.
pub fn parse_word_list(source: &str) -> HashSet<String> {
    source
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn read_list(path: &Path) -> Result<HashSet<String>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&src))
}

fn check_disjoint(kind: &str, pos: &HashSet<String>, neg: &HashSet<String>) -> Result<()> {
    let mut both: Vec<&String> = pos.intersection(neg).collect();
    if both.is_empty() {
        return Ok(());
    }
    both.sort();
    Err(Error::invalid(format!("{kind} lexicon lists {both:?} as both positive and negative")))
}

/// Opinion words split by polarity. The two sets are disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl SentimentLexicon {
    pub fn new(positive: HashSet<String>, negative: HashSet<String>) -> Result<Self> {
        check_disjoint("sentiment", &positive, &negative)?;
        Ok(SentimentLexicon { positive, negative })
    }

    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self> {
        Self::new(read_list(positive)?, read_list(negative)?)
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        Self::new(parse_word_list(POSITIVE_WORDS), parse_word_list(NEGATIVE_WORDS)).expect("builtin lexicon is disjoint")
    }
}

/// Emoticons split by polarity, lowercased. The two sets are disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EmoticonLexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl EmoticonLexicon {
    pub fn new(positive: HashSet<String>, negative: HashSet<String>) -> Result<Self> {
        check_disjoint("emoticon", &positive, &negative)?;
        Ok(EmoticonLexicon { positive, negative })
    }

    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self> {
        Self::new(read_list(positive)?, read_list(negative)?)
    }

    pub fn is_positive(&self, token: &str) -> bool {
        self.positive.contains(&token.to_lowercase())
    }

    pub fn is_negative(&self, token: &str) -> bool {
        self.negative.contains(&token.to_lowercase())
    }
}

impl Default for EmoticonLexicon {
    fn default() -> Self {
        Self::new(parse_word_list(POSITIVE_EMOTICONS), parse_word_list(NEGATIVE_EMOTICONS))
            .expect("builtin lexicon is disjoint")
    }
}
