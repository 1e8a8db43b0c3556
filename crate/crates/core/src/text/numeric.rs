use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pos::{PosTag, TaggedToken};
use super::tokenize::is_sentence_punct;
use crate::error::{Error, Result};

/// A number in the text plus the word that follows it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericMention {
    pub value: f64,
    pub unit: Option<String>,
    pub raw_unit: Option<String>,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionDiagnostic {
    pub position: usize,
    pub surface: String,
    pub reason: String,
}

const DEFAULT_ALIASES: &str = include_str!("../../data/unit_aliases.tsv");

/// Function words that follow numbers but are not units.
pub const UNIT_STOPWORDS: &[&str] = &["for", "of", "to", "in", "at", "and", "or"];

/// Maps surface units onto canonical ones (`min` to `minutes`, ...).
#[derive(Debug, Clone)]
pub struct UnitNormalizer {
    aliases: HashMap<String, String>,
    stopwords: HashSet<String>,
}

impl Default for UnitNormalizer {
    fn default() -> Self {
        Self::parse(DEFAULT_ALIASES, "<builtin unit aliases>").expect("builtin aliases parse")
    }
}

impl UnitNormalizer {
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut aliases = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (alias, canonical) = line.split_once('\t').ok_or_else(|| Error::Parse {
                origin: origin.to_string(),
                line: i + 1,
                message: "expected alias<TAB>canonical".into(),
            })?;
            aliases.insert(alias.trim().to_lowercase(), canonical.trim().to_lowercase());
        }
        let stopwords = UNIT_STOPWORDS.iter().map(|s| s.to_string()).collect();
        Ok(UnitNormalizer { aliases, stopwords })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Canonical unit for a raw surface, or `None` for function words.
    pub fn normalize(&self, raw_unit: &str) -> Option<String> {
        let lower = raw_unit.trim().to_lowercase();
        if lower.is_empty() || self.stopwords.contains(&lower) {
            return None;
        }
        Some(self.aliases.get(&lower).cloned().unwrap_or(lower))
    }
}

/// Parses a CD surface. Clock times `HH:MM` become `HH + MM/60`.
pub fn parse_number(surface: &str) -> std::result::Result<f64, String> {
    let value = if let Some((h, m)) = surface.split_once(':') {
        let hours: f64 = h.parse().map_err(|e| format!("bad hour field: {e}"))?;
        let minutes: f64 = m.parse().map_err(|e| format!("bad minute field: {e}"))?;
        if minutes >= 60.0 {
            return Err(format!("minute field {minutes} out of range"));
        }
        hours + minutes / 60.0
    } else {
        surface.parse::<f64>().map_err(|e| e.to_string())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err("value is not finite".into())
    }
}

/// One mention per parseable CD token; unparseable ones become diagnostics.
pub fn extract_numeric_mentions(
    tagged: &[TaggedToken],
    units: &UnitNormalizer,
) -> (Vec<NumericMention>, Vec<MentionDiagnostic>) {
    let mut mentions = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, tt) in tagged.iter().enumerate() {
        if tt.tag != PosTag::CD {
            continue;
        }
        match parse_number(&tt.token.surface) {
            Ok(value) => {
                let raw_unit = tagged
                    .get(i + 1)
                    .filter(|next| next.tag != PosTag::CD && !is_sentence_punct(&next.token.surface))
                    .map(|next| next.token.surface.clone());
                let unit = raw_unit.as_deref().and_then(|r| units.normalize(r));
                mentions.push(NumericMention {
                    value,
                    unit,
                    raw_unit,
                    position: tt.token.position,
                });
            }
            Err(reason) => diagnostics.push(MentionDiagnostic {
                position: tt.token.position,
                surface: tt.token.surface.clone(),
                reason,
            }),
        }
    }
    (mentions, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{pos::Tagger, tokenize::tokenize};
    use proptest::prelude::*;

    fn mentions(text: &str) -> Vec<(f64, Option<String>, Option<String>)> {
        let tagged = Tagger::default().tag(&tokenize(text));
        let (m, d) = extract_numeric_mentions(&tagged, &UnitNormalizer::default());
        assert!(d.is_empty(), "{d:?}");
        m.into_iter().map(|m| (m.value, m.unit, m.raw_unit)).collect()
    }

    fn s(x: &str) -> Option<String> {
        Some(x.to_string())
    }

    #[test]
    fn battery_hours() {
        assert_eq!(
            mentions("this phone has an awesome battery back-up of 2 hours"),
            vec![(2.0, s("hours"), s("hours"))]
        );
    }

    #[test]
    fn missing_unit() {
        assert_eq!(mentions("i love waking up at 545"), vec![(545.0, None, None)]);
    }

    #[test]
    fn multiple_numbers() {
        assert_eq!(
            mentions("$34.04 for a 10 mile trip that takes 19 minutes? that makes sense"),
            vec![
                (34.04, None, s("for")),
                (10.0, s("miles"), s("mile")),
                (19.0, s("minutes"), s("minutes")),
            ]
        );
    }

    #[test]
    fn clock_time_is_decimal_hours() {
        assert_eq!(mentions("8:30 am meetings"), vec![(8.5, s("am"), s("am"))]);
    }

    #[test]
    fn punctuation_is_not_a_unit() {
        assert_eq!(mentions("only 2."), vec![(2.0, None, None)]);
    }

    #[test]
    fn bad_clock_becomes_diagnostic() {
        let tagged = Tagger::default().tag(&tokenize("meet at 8:75 pm and 3 pm"));
        let (m, d) = extract_numeric_mentions(&tagged, &UnitNormalizer::default());
        assert_eq!(m.len(), 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].surface, "8:75");
    }

    #[test]
    fn unit_aliases() {
        let u = UnitNormalizer::default();
        assert_eq!(u.normalize("min"), s("minutes"));
        assert_eq!(u.normalize("Hrs"), s("hours"));
        assert_eq!(u.normalize("hours"), s("hours"));
        assert_eq!(u.normalize("a.m."), s("am"));
        assert_eq!(u.normalize("kbps"), s("kbps"));
        assert_eq!(u.normalize("for"), None);
        assert_eq!(u.normalize("AT"), None);
    }

    #[test]
    fn normalize_is_idempotent_on_outputs() {
        let u = UnitNormalizer::default();
        for raw in ["min", "mins", "minute", "hr", "hrs", "hour", "sec", "secs", "second", "day",
            "yr", "yrs", "year", "a.m.", "a.m", "p.m.", "p.m", "degree", "mile", "Weeks", "kbps"]
        {
            let once = u.normalize(raw).unwrap();
            assert_eq!(u.normalize(&once).as_deref(), Some(once.as_str()), "{raw}");
        }
    }

    proptest! {
        #[test]
        fn every_cd_token_yields_mention_or_diagnostic(
            words in proptest::collection::vec(
                prop_oneof![
                    "[0-9]{1,3}",
                    "[0-9]{1,2}:[0-9]{2}",
                    "[0-9]{1,2}\\.[0-9]{1,2}",
                    "[a-z]{1,6}",
                    Just("!".to_string()),
                ],
                0..12,
            )
        ) {
            let tagged = Tagger::default().tag(&tokenize(&words.join(" ")));
            let cd = tagged.iter().filter(|t| t.tag == PosTag::CD).count();
            let (m, d) = extract_numeric_mentions(&tagged, &UnitNormalizer::default());
            prop_assert_eq!(m.len() + d.len(), cd);
            prop_assert!(m.windows(2).all(|w| w[0].position < w[1].position));
            prop_assert!(m.iter().all(|x| x.unit.is_none() || x.raw_unit.is_some()));
        }
    }
}
