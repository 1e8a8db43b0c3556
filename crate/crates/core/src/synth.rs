//! Templated corpus with planted per-unit statistics.
//!
//! Every topic owns two nouns and one unit that no other topic uses. Both
//! classes share the same frames and adjectives, so the number is the only
//! thing separating them. Class means sit at least six standard deviations
//! apart, which lets the exact-match rule cascade separate them almost
//! perfectly.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{stratified_kfold, Label, LabeledTweet};
use crate::error::{Error, Result};

/// Planted `(mean, sd)` for one class.
pub type Gaussian = (f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub nouns: [&'static str; 2],
    pub unit: &'static str,
    pub sarcastic: Gaussian,
    pub non_sarcastic: Gaussian,
}

impl Topic {
    /// Distance between class means in units of the larger deviation.
    pub fn separation(&self) -> f64 {
        (self.sarcastic.0 - self.non_sarcastic.0).abs() / self.sarcastic.1.max(self.non_sarcastic.1)
    }
}

pub const TOPICS: [Topic; 8] = [
    Topic { nouns: ["phone", "battery"], unit: "hours", sarcastic: (2.0, 0.6), non_sarcastic: (30.0, 3.0) },
    Topic { nouns: ["alarm", "clock"], unit: "am", sarcastic: (4.0, 0.5), non_sarcastic: (8.0, 0.5) },
    Topic { nouns: ["weather", "forecast"], unit: "degrees", sarcastic: (110.0, 3.0), non_sarcastic: (70.0, 3.0) },
    Topic { nouns: ["traffic", "commute"], unit: "minutes", sarcastic: (150.0, 10.0), non_sarcastic: (20.0, 3.0) },
    Topic { nouns: ["summer", "vacation"], unit: "days", sarcastic: (2.0, 0.6), non_sarcastic: (30.0, 3.0) },
    Topic { nouns: ["internet", "connection"], unit: "kbps", sarcastic: (20.0, 3.0), non_sarcastic: (900.0, 50.0) },
    Topic { nouns: ["exam", "score"], unit: "percent", sarcastic: (12.0, 3.0), non_sarcastic: (92.0, 2.0) },
    Topic { nouns: ["homework", "assignment"], unit: "pages", sarcastic: (80.0, 5.0), non_sarcastic: (3.0, 1.0) },
];

/// `{a}` adjective, `{n1} {n2}` topic nouns, `{v} {u}` value and unit.
pub const FRAMES: [&str; 6] = [
    "just love my {a} {n1} {n2} with {v} {u}",
    "{a} {n1} {n2} of {v} {u} today",
    "wow , {v} {u} of {n1} {n2} is so {a}",
    "my {n1} {n2} gave me {v} {u} , {a}",
    "so {a} , the {n1} {n2} says {v} {u}",
    "{v} {u} for the {n1} {n2} , how {a} !",
];

pub const ADJECTIVES: [&str; 5] = ["awesome", "great", "amazing", "lovely", "perfect"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { size: 2000, seed: 0 }
    }
}

/// Balanced classes; topics rotate so each gets an equal share of both.
/// Values are rounded to integers and floored at 1.
pub fn generate(config: &SynthConfig) -> Result<Vec<LabeledTweet>> {
    if config.size < 2 {
        return Err(Error::invalid("synthetic corpus needs at least two tweets"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.size.to_string().len();
    let mut out = Vec::with_capacity(config.size);
    for i in 0..config.size {
        let label = Label::from_bool(i % 2 == 0);
        let topic = &TOPICS[(i / 2) % TOPICS.len()];
        let (mean, sd) = if label.is_positive() { topic.sarcastic } else { topic.non_sarcastic };
        let normal = Normal::new(mean, sd).map_err(|e| Error::invalid(e.to_string()))?;
        let value = normal.sample(&mut rng).round().max(1.0) as i64;
        let frame = FRAMES.choose(&mut rng).expect("non-empty");
        let adj = ADJECTIVES.choose(&mut rng).expect("non-empty");
        let text = frame
            .replace("{a}", adj)
            .replace("{n1}", topic.nouns[0])
            .replace("{n2}", topic.nouns[1])
            .replace("{v}", &value.to_string())
            .replace("{u}", topic.unit);
        out.push(LabeledTweet::new(format!("synth-{i:0width$}"), text, label));
    }
    Ok(out)
}

/// Fold 0 of a stratified 5-fold split as `(train, test)`: an 80/20 split.
pub fn holdout(tweets: &[LabeledTweet], seed: u64) -> Result<(Vec<LabeledTweet>, Vec<LabeledTweet>)> {
    let folds = stratified_kfold(tweets, 5, seed)?;
    let (train, test) = folds.split(tweets, 0)?;
    Ok((train.into_iter().cloned().collect(), test.into_iter().cloned().collect()))
}
