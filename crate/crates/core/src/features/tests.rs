use proptest::prelude::*;

use super::*;
use crate::text::Analyzer;

fn analyze(text: &str) -> AnalyzedTweet {
    Analyzer::default().analyze_text("t", text)
}

fn units() -> Vec<String> {
    ["minutes", "hours", "am"].map(String::from).to_vec()
}

#[test]
fn sentiment_counts_and_emotional_tags() {
    let lex = SentimentLexicon::default();
    assert_eq!(sentiment_features(&analyze("awesome"), &lex), [1, 0, 1, 0]);
    assert_eq!(sentiment_features(&analyze("sunshine"), &lex), [1, 0, 0, 0]);
    assert_eq!(sentiment_features(&analyze("the phone has 2 hours"), &lex), [0, 0, 0, 0]);
}

#[test]
fn emoticon_and_contrast_indicators() {
    let s = SentimentLexicon::default();
    let e = EmoticonLexicon::default();
    assert_eq!(emoticon_features(&analyze("great :("), &s, &e), [0, 1, 0, 1]);
    assert_eq!(emoticon_features(&analyze("good bad day"), &s, &e)[2], 1);
    assert_eq!(emoticon_features(&analyze(":) :)"), &s, &e), [1, 0, 0, 0]);
}

#[test]
fn punctuation_counts() {
    assert_eq!(punctuation_features("WOW... really?!"), [1, 3, 1, 1, 0]);
    assert_eq!(punctuation_features("it's 'fine'")[4], 3);
    assert_eq!(punctuation_features(""), [0; 5]);
    assert_eq!(punctuation_features("so\u{2026} I OK"), [0, 3, 0, 1, 0]);
}

#[test]
fn punctuation_prefers_cased_text() {
    let mut t = analyze("wow... really?!");
    let cfg = FeatureConfig::new([Family::Punctuation], 0, vec![]).unwrap();
    let fx = FeatureExtractor::new(cfg);
    assert_eq!(fx.extract::<f64>(&t, None).unwrap().values, vec![1.0, 3.0, 1.0, 0.0, 0.0]);
    t.cased_text = Some("WOW... really?!".into());
    assert_eq!(fx.extract::<f64>(&t, None).unwrap().values, vec![1.0, 3.0, 1.0, 1.0, 0.0]);
}

#[test]
fn numeric_value_and_onehot() {
    let (v, oh) = numeric_features(&analyze("battery lasts 2 hours"), &units());
    assert_eq!((v, oh), (2.0, vec![0, 1, 0]));
    let (v, oh) = numeric_features(&analyze("i scored 7 !"), &units());
    assert_eq!((v, oh), (7.0, vec![0, 0, 0]));
    let (v, oh) = numeric_features(&analyze("no numbers here"), &units());
    assert_eq!((v, oh), (0.0, vec![0, 0, 0]));
    let (_, oh) = numeric_features(&analyze("it took 9 weeks"), &units());
    assert_eq!(oh, vec![0, 0, 0]);
}

#[test]
fn widths_follow_enabled_families() {
    let sp = FeatureConfig::new([Family::Sentiment, Family::Punctuation], 0, vec![]).unwrap();
    assert_eq!(sp.width(), 9);
    let emb = FeatureConfig::new([Family::TweetEmbedding], 300, vec![]).unwrap();
    assert_eq!(emb.width(), 300);
    let full = FeatureConfig::new(Family::ALL, 50, units()).unwrap();
    assert_eq!(full.width(), 67);
    assert_eq!(full.column_names().len(), 67);
    assert!(FeatureConfig::new([], 0, vec![]).is_err());
}

#[test]
fn family_spec_parsing() {
    let f = FeatureConfig::parse_families("S+P+E+value+unit").unwrap();
    assert_eq!(f.len(), 5);
    assert!(!f.contains(&Family::TweetEmbedding));
    assert!(FeatureConfig::parse_families("S+Q").is_err());
}

#[test]
fn units_frozen_from_training() {
    let train = [analyze("2 hours"), analyze("3 am"), analyze("5 hours"), analyze("none")];
    assert_eq!(FeatureConfig::units_from(&train), vec!["am".to_string(), "hours".to_string()]);
}

#[test]
fn embedding_is_mean_over_all_tokens() {
    let table = EmbeddingTable::<f64>::from_rows(2, [("battery", vec![2.0, 0.0]), ("dies", vec![0.0, 4.0])]).unwrap();
    let cfg = FeatureConfig::new([Family::TweetEmbedding], 2, vec![]).unwrap();
    let fx = FeatureExtractor::new(cfg);
    let v = fx.extract(&analyze("battery dies fast"), Some(&table)).unwrap();
    assert_eq!(v.values, vec![1.0, 2.0]);
    assert!(fx.extract::<f64>(&analyze("x"), None).is_err());
    let wrong = EmbeddingTable::<f64>::from_rows(3, [("x", vec![0.0; 3])]).unwrap();
    assert!(matches!(fx.extract(&analyze("x"), Some(&wrong)), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let cfg = FeatureConfig::new([Family::NumberValue, Family::UnitOnehot], 0, units()).unwrap();
    let fx = FeatureExtractor::new(cfg.clone());
    let mut t = analyze("2 hours");
    t.label = Some(crate::corpus::Label::Sarcastic);
    let rows = fx.extract_matrix::<f64>(std::slice::from_ref(&t), None).unwrap();
    write_feature_csv(&path, &cfg, &[t], &rows).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "id,label,value,unit:minutes,unit:hours,unit:am");
    assert_eq!(lines[1], "t,1,2,0,1,0");
}

const VOCAB: &[&str] = &[
    "good", "bad", "awesome", "battery", "hours", "2", "3.5", "am", ":)", ":(", "!", "?", "love", "sunshine", "minutes",
];

fn arb_text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB), 0..12).prop_map(|w| w.join(" "))
}

fn arb_families() -> impl Strategy<Value = Vec<Family>> {
    prop::sample::subsequence(Family::ALL.to_vec(), 1..=6)
}

proptest! {
    #[test]
    fn layout_partitions_vector(text in arb_text(), fams in arb_families()) {
        let table = EmbeddingTable::<f64>::from_rows(3, [("good", vec![1.0, 2.0, 3.0])]).unwrap();
        let cfg = FeatureConfig::new(fams, 3, units()).unwrap();
        let fx = FeatureExtractor::new(cfg.clone());
        let t = analyze(&text);
        let v = fx.extract(&t, Some(&table)).unwrap();
        let mut expected_offset = 0;
        for seg in &v.layout {
            prop_assert_eq!(seg.offset, expected_offset);
            expected_offset += seg.len;
        }
        prop_assert_eq!(expected_offset, v.values.len());
        prop_assert_eq!(v.values.len(), cfg.width());
        prop_assert_eq!(&v, &fx.extract(&t, Some(&table)).unwrap());
        for seg in &v.layout {
            let part = &v.values[seg.offset..seg.offset + seg.len];
            match seg.family {
                Family::Sentiment | Family::Punctuation => {
                    prop_assert!(part.iter().all(|x| *x >= 0.0 && x.fract() == 0.0));
                }
                Family::Emoticon => prop_assert!(part.iter().all(|x| *x == 0.0 || *x == 1.0)),
                Family::UnitOnehot => {
                    prop_assert!(part.iter().all(|x| *x == 0.0 || *x == 1.0));
                    prop_assert!(part.iter().sum::<f64>() <= 1.0);
                }
                _ => {}
            }
        }
    }
}
