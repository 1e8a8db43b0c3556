use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Label, LabeledTweet};
use crate::error::{Error, Result};

/// Tweet id to fold index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    /// Index form of [`FoldAssignment::split`] for any id sequence.
    pub fn split_indices<'a, I>(&self, ids: I, fold: usize) -> Result<(Vec<usize>, Vec<usize>)>
    where
        I: IntoIterator<Item = &'a str>,
    {
        if fold >= self.k {
            return Err(Error::invalid(format!("fold {fold} out of range for k={}", self.k)));
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, id) in ids.into_iter().enumerate() {
            match self.fold_of(id) {
                Some(f) if f == fold => test.push(i),
                Some(_) => train.push(i),
                None => return Err(Error::invalid(format!("tweet {id:?} has no fold"))),
            }
        }
        Ok((train, test))
    }

    /// `(train, test)` for one held-out fold, each in input order.
    pub fn split<'a>(
        &self,
        tweets: &'a [LabeledTweet],
        fold: usize,
    ) -> Result<(Vec<&'a LabeledTweet>, Vec<&'a LabeledTweet>)> {
        if fold >= self.k {
            return Err(Error::invalid(format!("fold {fold} out of range for k={}", self.k)));
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for t in tweets {
            match self.fold_of(&t.id) {
                Some(f) if f == fold => test.push(t),
                Some(_) => train.push(t),
                None => return Err(Error::invalid(format!("tweet {:?} has no fold", t.id))),
            }
        }
        Ok((train, test))
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled and dealt round-robin, continuing the rotation
/// from one class to the next, so every fold holds the floor or ceiling of
/// its proportional share of each class.
pub fn stratified_kfold(tweets: &[LabeledTweet], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    let mut seen = HashSet::new();
    for t in tweets {
        if !seen.insert(t.id.as_str()) {
            return Err(Error::invalid(format!("duplicate tweet id {:?}", t.id)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    let mut offset = 0;
    for label in [Label::Sarcastic, Label::NonSarcastic] {
        let mut members: Vec<&str> = tweets
            .iter()
            .filter(|t| t.label == label)
            .map(|t| t.id.as_str())
            .collect();
        if members.len() < k {
            return Err(Error::InsufficientClass {
                class: if label.is_positive() { "sarcastic" } else { "non-sarcastic" },
                needed: k,
                available: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for (i, id) in members.iter().enumerate() {
            assignments.insert(id.to_string(), (offset + i) % k);
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldAssignment { k, seed, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data(pos: usize, neg: usize) -> Vec<LabeledTweet> {
        (0..pos)
            .map(|i| LabeledTweet::new(format!("p{i}"), "x", Label::Sarcastic))
            .chain((0..neg).map(|i| LabeledTweet::new(format!("n{i}"), "y", Label::NonSarcastic)))
            .collect()
    }

    #[test]
    fn balanced_ten_into_five() {
        let d = data(5, 5);
        let f = stratified_kfold(&d, 5, 3).unwrap();
        for fold in 0..5 {
            let (_, test) = f.split(&d, fold).unwrap();
            let pos = test.iter().filter(|t| t.label == Label::Sarcastic).count();
            assert_eq!((pos, test.len() - pos), (1, 1));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let d = data(13, 29);
        assert_eq!(stratified_kfold(&d, 5, 9).unwrap(), stratified_kfold(&d, 5, 9).unwrap());
    }

    #[test]
    fn errors() {
        assert!(stratified_kfold(&data(3, 10), 5, 0).is_err());
        assert!(stratified_kfold(&data(10, 10), 1, 0).is_err());
        let d = data(5, 5);
        let f = stratified_kfold(&d, 5, 0).unwrap();
        let mut extra = d.clone();
        extra.push(LabeledTweet::new("ghost", "z", Label::Sarcastic));
        assert!(f.split(&extra, 0).is_err());
        assert!(f.split(&d, 5).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_stratification(pos in 5usize..60, neg in 5usize..60, k in 2usize..6, seed in any::<u64>()) {
            let d = data(pos, neg);
            let f = stratified_kfold(&d, k, seed).unwrap();
            prop_assert_eq!(f.assignments.len(), d.len());
            let mut union = Vec::new();
            for fold in 0..k {
                let (train, test) = f.split(&d, fold).unwrap();
                prop_assert_eq!(train.len() + test.len(), d.len());
                for (label, n) in [(Label::Sarcastic, pos), (Label::NonSarcastic, neg)] {
                    let c = test.iter().filter(|t| t.label == label).count() as f64;
                    let share = n as f64 / k as f64;
                    prop_assert!((c - share).abs() < 1.0 + 1e-9);
                }
                union.extend(test.iter().map(|t| t.id.clone()));
            }
            union.sort();
            let mut ids: Vec<String> = d.iter().map(|t| t.id.clone()).collect();
            ids.sort();
            prop_assert_eq!(union, ids);
        }
    }
}
