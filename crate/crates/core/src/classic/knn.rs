use serde::{Deserialize, Serialize};

use super::{check_dim, check_training};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Real};

pub const DEFAULT_K: usize = 3;

/// Stores the training set; Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KnnModel<T> {
    pub k: usize,
    x: Vec<Vec<T>>,
    y: Vec<Label>,
}

impl<T: Real> KnnModel<T> {
    pub fn fit(x: &[Vec<T>], y: &[Label], k: usize) -> Result<Self> {
        check_training(x, y)?;
        if k == 0 || k > x.len() {
            return Err(Error::invalid(format!("k = {k} must be in 1..={}", x.len())));
        }
        Ok(KnnModel {
            k,
            x: x.to_vec(),
            y: y.to_vec(),
        })
    }

    /// Indices of the `k` nearest training points; equal distances keep the
    /// lower index first.
    pub fn neighbours(&self, query: &[T]) -> Result<Vec<usize>> {
        check_dim(self.x[0].len(), query)?;
        let mut d: Vec<(T, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, query), i))
            .collect();
        let k = self.k;
        d.select_nth_unstable_by(k - 1, |a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        d.truncate(k);
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        Ok(d.into_iter().map(|(_, i)| i).collect())
    }

    /// Majority label of the neighbours; a split vote is non-sarcastic.
    pub fn predict(&self, query: &[T]) -> Result<Label> {
        let nb = self.neighbours(query)?;
        let pos = nb.iter().filter(|&&i| self.y[i].is_positive()).count();
        Ok(Label::from_bool(2 * pos > nb.len()))
    }
}
