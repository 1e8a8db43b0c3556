use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::{is_numeric_token, Token};
use crate::error::{Error, Result};

/// Part-of-speech tags, a subset of the Penn alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    NN,
    NNS,
    NNP,
    JJ,
    JJR,
    JJS,
    RB,
    RBR,
    RBS,
    VB,
    VBD,
    VBG,
    VBN,
    VBP,
    VBZ,
    CD,
    IN,
    DT,
    PRP,
    UH,
    SYM,
    OTHER,
}

impl PosTag {
    pub const ALL: [PosTag; 22] = [
        PosTag::NN,
        PosTag::NNS,
        PosTag::NNP,
        PosTag::JJ,
        PosTag::JJR,
        PosTag::JJS,
        PosTag::RB,
        PosTag::RBR,
        PosTag::RBS,
        PosTag::VB,
        PosTag::VBD,
        PosTag::VBG,
        PosTag::VBN,
        PosTag::VBP,
        PosTag::VBZ,
        PosTag::CD,
        PosTag::IN,
        PosTag::DT,
        PosTag::PRP,
        PosTag::UH,
        PosTag::SYM,
        PosTag::OTHER,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::NN => "NN",
            PosTag::NNS => "NNS",
            PosTag::NNP => "NNP",
            PosTag::JJ => "JJ",
            PosTag::JJR => "JJR",
            PosTag::JJS => "JJS",
            PosTag::RB => "RB",
            PosTag::RBR => "RBR",
            PosTag::RBS => "RBS",
            PosTag::VB => "VB",
            PosTag::VBD => "VBD",
            PosTag::VBG => "VBG",
            PosTag::VBN => "VBN",
            PosTag::VBP => "VBP",
            PosTag::VBZ => "VBZ",
            PosTag::CD => "CD",
            PosTag::IN => "IN",
            PosTag::DT => "DT",
            PosTag::PRP => "PRP",
            PosTag::UH => "UH",
            PosTag::SYM => "SYM",
            PosTag::OTHER => "OTHER",
        }
    }

    pub fn is_noun(self) -> bool {
        matches!(self, PosTag::NN | PosTag::NNS | PosTag::NNP)
    }

    /// Adjectives, adverbs and verbs: the tags that make a sentiment word
    /// "highly emotional".
    pub fn is_emotional(self) -> bool {
        matches!(
            self,
            PosTag::JJ
                | PosTag::JJR
                | PosTag::JJS
                | PosTag::RB
                | PosTag::RBR
                | PosTag::RBS
                | PosTag::VB
                | PosTag::VBD
                | PosTag::VBG
                | PosTag::VBN
                | PosTag::VBP
                | PosTag::VBZ
        )
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PosTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown tag {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: PosTag,
}

const DEFAULT_LEXICON: &str = include_str!("../../data/pos_lexicon.tsv");

// Checked in order; the first matching suffix wins. Minimum word length
// guards short words ("fly", "bed") from spurious matches.
const SUFFIX_RULES: &[(&str, usize, PosTag)] = &[
    ("tion", 5, PosTag::NN),
    ("sion", 5, PosTag::NN),
    ("ment", 5, PosTag::NN),
    ("ness", 5, PosTag::NN),
    ("ity", 5, PosTag::NN),
    ("ship", 5, PosTag::NN),
    ("ism", 5, PosTag::NN),
    ("ous", 5, PosTag::JJ),
    ("ful", 5, PosTag::JJ),
    ("ive", 5, PosTag::JJ),
    ("able", 5, PosTag::JJ),
    ("ible", 5, PosTag::JJ),
    ("less", 5, PosTag::JJ),
    ("ish", 5, PosTag::JJ),
    ("ly", 4, PosTag::RB),
    ("ing", 5, PosTag::VBG),
    ("ed", 4, PosTag::VBD),
    ("ss", 3, PosTag::NN),
    ("us", 3, PosTag::NN),
    ("is", 3, PosTag::NN),
    ("s", 4, PosTag::NNS),
];

/// Lexicon-plus-suffix-rules tagger.
#[derive(Debug, Clone)]
pub struct Tagger {
    lexicon: HashMap<String, PosTag>,
}

impl Default for Tagger {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON, "<builtin pos lexicon>").expect("builtin lexicon parses")
    }
}

impl Tagger {
    /// Parses `word<TAB>TAG` lines. Blank lines and `#` comments are skipped.
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut lexicon = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                origin: origin.to_string(),
                line: i + 1,
                message,
            };
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected word<TAB>TAG".into()))?;
            let tag = tag.trim().parse::<PosTag>().map_err(parse_err)?;
            lexicon.insert(word.trim().to_lowercase(), tag);
        }
        Ok(Tagger { lexicon })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub fn tag_word(&self, surface: &str) -> PosTag {
        if is_numeric_token(surface) {
            return PosTag::CD;
        }
        if !surface.chars().any(|c| c.is_ascii_alphanumeric()) {
            return PosTag::SYM;
        }
        let lower = surface.to_ascii_lowercase();
        if let Some(&tag) = self.lexicon.get(&lower) {
            return tag;
        }
        if lower.chars().all(|c| c.is_ascii_alphabetic()) {
            for &(suffix, min_len, tag) in SUFFIX_RULES {
                if lower.len() >= min_len && lower.ends_with(suffix) {
                    return tag;
                }
            }
        }
        PosTag::NN
    }

    pub fn tag(&self, tokens: &[Token]) -> Vec<TaggedToken> {
        tokens
            .iter()
            .map(|t| TaggedToken {
                tag: self.tag_word(&t.surface),
                token: t.clone(),
            })
            .collect()
    }
}
