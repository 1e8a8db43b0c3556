use serde::{Deserialize, Serialize};

use super::check_matrix;
use crate::error::Result;
use crate::scalar::Real;

/// Per-column standardization to zero mean and unit variance. Constant
/// columns keep scale 1 so they map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

impl<T: Real> Standardizer<T> {
    pub fn fit(x: &[Vec<T>]) -> Result<Self> {
        let d = check_matrix(x)?;
        let n = T::from_count(x.len());
        let mut mean = vec![T::zero(); d];
        for row in x {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![T::zero(); d];
        for row in x {
            for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > T::lit(1e-12) {
                    sd
                } else {
                    T::one()
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[T]) -> Vec<T> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &[Vec<T>]) -> Vec<Vec<T>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}
