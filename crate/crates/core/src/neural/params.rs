use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type ParamId = usize;

/// A named row-major tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Param<T> {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
    /// Rows pinned at their current value; optimizers skip them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frozen_rows: Vec<usize>,
}

impl<T: Real> Param<T> {
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ParamStore<T> {
    pub params: Vec<Param<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn add(&mut self, name: &str, rows: usize, cols: usize, data: Vec<T>) -> ParamId {
        assert_eq!(data.len(), rows * cols, "parameter {name} has the wrong size");
        self.params.push(Param {
            name: name.to_string(),
            rows,
            cols,
            data,
            frozen_rows: Vec::new(),
        });
        self.params.len() - 1
    }

    pub fn get(&self, id: ParamId) -> &Param<T> {
        &self.params[id]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Param<T> {
        &mut self.params[id]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn scalar_count(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Copies values from `other`, which must have identical names and shapes.
    pub fn load_from(&mut self, other: &ParamStore<T>) -> Result<()> {
        if self.params.len() != other.params.len() {
            return Err(Error::invalid("parameter count differs"));
        }
        for (a, b) in self.params.iter_mut().zip(&other.params) {
            if a.name != b.name || a.rows != b.rows || a.cols != b.cols {
                return Err(Error::invalid(format!(
                    "parameter {} ({}x{}) does not match {} ({}x{})",
                    a.name, a.rows, a.cols, b.name, b.rows, b.cols
                )));
            }
            a.data.clone_from(&b.data);
        }
        Ok(())
    }

    pub fn zero_grads(&self) -> Grads<T> {
        Grads {
            data: self.params.iter().map(|p| vec![T::zero(); p.data.len()]).collect(),
        }
    }
}

/// Gradient buffers shaped like a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub data: Vec<Vec<T>>,
}

impl<T: Real> Grads<T> {
    pub fn clear(&mut self) {
        for g in &mut self.data {
            g.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    pub fn add_assign(&mut self, other: &Grads<T>) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}
