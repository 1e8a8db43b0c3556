use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{is_numeric_text, Label, LabeledTweet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    D1,
    D2,
    D3,
    Test,
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetName::D1 => "d1",
            DatasetName::D2 => "d2",
            DatasetName::D3 => "d3",
            DatasetName::Test => "test",
        })
    }
}

impl FromStr for DatasetName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(DatasetName::D1),
            "d2" => Ok(DatasetName::D2),
            "d3" => Ok(DatasetName::D3),
            "test" => Ok(DatasetName::Test),
            other => Err(format!("unknown dataset preset {other:?} (d1, d2, d3, test)")),
        }
    }
}

/// Target class counts for one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: DatasetName,
    pub pos_count: usize,
    pub neg_count: usize,
    /// Positives must mention a bare number.
    pub numeric_only_positive: bool,
}

impl DatasetSpec {
    pub fn preset(name: DatasetName) -> Self {
        let (pos_count, neg_count, numeric_only_positive) = match name {
            DatasetName::D1 => (100_000, 250_000, false),
            DatasetName::D2 => (8681, 8681, true),
            DatasetName::D3 => (8681, 42107, true),
            DatasetName::Test => (1843, 8317, true),
        };
        DatasetSpec {
            name,
            pos_count,
            neg_count,
            numeric_only_positive,
        }
    }
}

/// Samples `spec` counts without replacement and shuffles the result.
pub fn build_dataset(corpus: &[LabeledTweet], spec: &DatasetSpec, seed: u64) -> Result<Vec<LabeledTweet>> {
    let positives: Vec<&LabeledTweet> = corpus
        .iter()
        .filter(|t| t.label == Label::Sarcastic)
        .filter(|t| !spec.numeric_only_positive || is_numeric_text(&t.text))
        .collect();
    let negatives: Vec<&LabeledTweet> = corpus.iter().filter(|t| t.label == Label::NonSarcastic).collect();

    if positives.len() < spec.pos_count {
        return Err(Error::InsufficientClass {
            class: if spec.numeric_only_positive {
                "numeric sarcastic"
            } else {
                "sarcastic"
            },
            needed: spec.pos_count,
            available: positives.len(),
        });
    }
    if negatives.len() < spec.neg_count {
        return Err(Error::InsufficientClass {
            class: "non-sarcastic",
            needed: spec.neg_count,
            available: negatives.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |pool: &[&LabeledTweet], count: usize| -> Vec<LabeledTweet> {
        let mut idx = index::sample(&mut rng, pool.len(), count).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pool[i].clone()).collect()
    };
    let mut out = pick(&positives, spec.pos_count);
    out.extend(pick(&negatives, spec.neg_count));
    out.shuffle(&mut rng);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(pos_numeric: usize, pos_plain: usize, neg: usize) -> Vec<LabeledTweet> {
        let mut v = Vec::new();
        for i in 0..pos_numeric {
            v.push(LabeledTweet::new(format!("pn{i}"), format!("only {i} hours"), Label::Sarcastic));
        }
        for i in 0..pos_plain {
            v.push(LabeledTweet::new(format!("pp{i}"), "so fun", Label::Sarcastic));
        }
        for i in 0..neg {
            v.push(LabeledTweet::new(format!("n{i}"), "fine", Label::NonSarcastic));
        }
        v
    }

    #[test]
    fn presets_match_table_counts() {
        let d2 = DatasetSpec::preset(DatasetName::D2);
        assert_eq!((d2.pos_count, d2.neg_count), (8681, 8681));
        let d3 = DatasetSpec::preset(DatasetName::D3);
        assert_eq!((d3.pos_count, d3.neg_count), (8681, 42107));
        let test = DatasetSpec::preset(DatasetName::Test);
        assert_eq!((test.pos_count, test.neg_count), (1843, 8317));
        assert!(d2.numeric_only_positive && d3.numeric_only_positive && test.numeric_only_positive);
        assert!(!DatasetSpec::preset(DatasetName::D1).numeric_only_positive);
        assert_eq!("TEST".parse::<DatasetName>().unwrap(), DatasetName::Test);
    }

    #[test]
    fn d2_preset_draws_numeric_positives() {
        let c = corpus(9000, 500, 9000);
        let spec = DatasetSpec::preset(DatasetName::D2);
        let ds = build_dataset(&c, &spec, 7).unwrap();
        let pos: Vec<_> = ds.iter().filter(|t| t.label == Label::Sarcastic).collect();
        assert_eq!(pos.len(), 8681);
        assert_eq!(ds.len() - pos.len(), 8681);
        assert!(pos.iter().all(|t| is_numeric_text(&t.text)));
    }

    #[test]
    fn same_seed_same_bytes() {
        let c = corpus(50, 10, 80);
        let spec = DatasetSpec {
            name: DatasetName::D3,
            pos_count: 30,
            neg_count: 60,
            numeric_only_positive: true,
        };
        let a = serde_json::to_vec(&build_dataset(&c, &spec, 11).unwrap()).unwrap();
        let b = serde_json::to_vec(&build_dataset(&c, &spec, 11).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = serde_json::to_vec(&build_dataset(&c, &spec, 12).unwrap()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn shortage_names_the_class() {
        let c = corpus(5, 100, 100);
        let spec = DatasetSpec {
            name: DatasetName::D2,
            pos_count: 10,
            neg_count: 10,
            numeric_only_positive: true,
        };
        match build_dataset(&c, &spec, 1) {
            Err(Error::InsufficientClass { class, needed: 10, available: 5 }) => {
                assert_eq!(class, "numeric sarcastic")
            }
            other => panic!("{other:?}"),
        }
        let spec = DatasetSpec { neg_count: 200, pos_count: 1, ..spec };
        assert!(matches!(
            build_dataset(&c, &spec, 1),
            Err(Error::InsufficientClass { class: "non-sarcastic", .. })
        ));
    }
}
