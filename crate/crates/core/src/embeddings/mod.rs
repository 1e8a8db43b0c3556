//! Word vectors: loading, skip-gram training, composition and similarity.

mod io;
mod sgns;

use std::collections::HashMap;

use sha2::{Digest, Sha256};

pub use io::{load_embeddings, parse_embeddings, save_embeddings};
pub use sgns::{sgns_pair_loss, train_sgns, SgnsConfig, SgnsGradient, SgnsOutcome};

use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

/// Vocabulary plus a dense `|V| x d` row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    /// Builds a table from `(word, vector)` rows.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<T>)>,
        S: Into<String>,
    {
        let mut table = Self::new(dim)?;
        for (w, v) in rows {
            table.push(w.into(), &v)?;
        }
        Ok(table)
    }

    pub fn push(&mut self, word: String, vector: &[T]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite component in vector for {word:?}")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::invalid(format!("duplicate word {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// SHA-256 over dimension, words and components, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for (i, w) in self.words.iter().enumerate() {
            h.update(w.as_bytes());
            h.update([0u8]);
            for x in self.row(i) {
                h.update(x.as_f64().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Mean vector of a word list.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedVector<T> {
    pub vector: Vec<T>,
    /// In-vocabulary words that contributed.
    pub used: usize,
}

impl<T> ComposedVector<T> {
    pub fn is_empty(&self) -> bool {
        self.used == 0
    }
}

/// Mean of the in-vocabulary word vectors. Out-of-vocabulary words are
/// skipped and do not count towards the divisor; with no known word the
/// result is the zero vector flagged empty.
pub fn compose_vector<T: Real, S: AsRef<str>>(words: &[S], table: &EmbeddingTable<T>) -> ComposedVector<T> {
    let mut vector = vec![T::zero(); table.dim()];
    let mut used = 0;
    for w in words {
        if let Some(v) = table.get(w.as_ref()) {
            for (acc, &x) in vector.iter_mut().zip(v) {
                *acc += x;
            }
            used += 1;
        }
    }
    if used > 0 {
        let n = T::from_count(used);
        vector.iter_mut().for_each(|x| *x /= n);
    }
    ComposedVector { vector, used }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == T::zero() || nv == T::zero() {
        return Ok(T::zero());
    }
    let c = dot(u, v) / (nu * nv);
    Ok(c.max(-T::one()).min(T::one()))
}
