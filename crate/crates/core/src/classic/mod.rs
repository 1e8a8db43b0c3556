//! Classical classifiers over feature vectors: KNN, RBF-kernel SVM trained
//! by SMO, and a bagged random forest.

mod forest;
mod knn;
mod scaler;
mod svm;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use forest::{ForestModel, ForestParams, Node, Tree, DEFAULT_ESTIMATORS};
pub use knn::{KnnModel, DEFAULT_K};
pub use scaler::Standardizer;
pub use svm::{default_grid, grid_search, rbf, SvmModel, SvmParams, DEFAULT_C, DEFAULT_TOL, KERNEL_CACHE_LIMIT};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Common row width, rejecting empty or ragged matrices.
pub(crate) fn check_matrix<T>(x: &[Vec<T>]) -> Result<usize> {
    let first = x.first().ok_or(Error::EmptyCorpus)?;
    let d = first.len();
    if d == 0 {
        return Err(Error::invalid("feature vectors are empty"));
    }
    for r in x {
        check_dim(d, r)?;
    }
    Ok(d)
}

pub(crate) fn check_training<T>(x: &[Vec<T>], y: &[Label]) -> Result<usize> {
    let d = check_matrix(x)?;
    if x.len() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
    }
    Ok(d)
}

pub(crate) fn check_dim<T>(expected: usize, row: &[T]) -> Result<()> {
    if row.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: row.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicKind {
    Svm,
    Knn,
    Forest,
}

impl std::str::FromStr for ClassicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ClassicKind::Svm),
            "knn" => Ok(ClassicKind::Knn),
            "forest" | "rf" | "random_forest" => Ok(ClassicKind::Forest),
            _ => Err(Error::invalid(format!("unknown classifier {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicConfig {
    pub k: usize,
    pub svm: SvmParams,
    /// Sweep [`default_grid`] on a held-out fifth of the training rows first.
    pub svm_grid: bool,
    pub forest: ForestParams,
}

impl Default for ClassicConfig {
    fn default() -> Self {
        ClassicConfig {
            k: DEFAULT_K,
            svm: SvmParams::default(),
            svm_grid: false,
            forest: ForestParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "lowercase")]
pub enum ClassicInner<T> {
    Svm(SvmModel<T>),
    Knn(KnnModel<T>),
    Forest(ForestModel<T>),
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted classifier with the standardizer it was trained behind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ClassicModel<T> {
    pub version: u32,
    pub config: ClassicConfig,
    /// Present for SVM and KNN; forests see raw features.
    pub scaler: Option<Standardizer<T>>,
    pub model: ClassicInner<T>,
}

fn holdout_split(y: &[Label], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for positive in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i].is_positive() == positive).collect();
        idx.shuffle(&mut rng);
        let cut = idx.len() / 5;
        val.extend_from_slice(&idx[..cut]);
        train.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

impl<T: Real> ClassicModel<T> {
    pub fn fit(kind: ClassicKind, x: &[Vec<T>], y: &[Label], config: &ClassicConfig) -> Result<Self> {
        check_training(x, y)?;
        let mut config = config.clone();
        let (scaler, model) = match kind {
            ClassicKind::Forest => (None, ClassicInner::Forest(ForestModel::fit(x, y, &config.forest)?)),
            ClassicKind::Knn => {
                let s = Standardizer::fit(x)?;
                let xs = s.transform(x);
                (Some(s), ClassicInner::Knn(KnnModel::fit(&xs, y, config.k)?))
            }
            ClassicKind::Svm => {
                let s = Standardizer::fit(x)?;
                let xs = s.transform(x);
                if config.svm_grid {
                    let (tr, va) = holdout_split(y, config.forest.seed);
                    let pick = |ids: &[usize]| -> (Vec<Vec<T>>, Vec<Label>) {
                        (ids.iter().map(|&i| xs[i].clone()).collect(), ids.iter().map(|&i| y[i]).collect())
                    };
                    let (tx, ty) = pick(&tr);
                    let (vx, vy) = pick(&va);
                    if !vx.is_empty() {
                        let grid: Vec<SvmParams> = default_grid(xs[0].len())
                            .into_iter()
                            .map(|g| SvmParams { tol: config.svm.tol, max_iter: config.svm.max_iter, ..g })
                            .collect();
                        config.svm = grid_search(&tx, &ty, &vx, &vy, &grid)?.0;
                    }
                }
                (Some(s), ClassicInner::Svm(SvmModel::fit(&xs, y, &config.svm)?))
            }
        };
        Ok(ClassicModel {
            version: MODEL_FORMAT_VERSION,
            config,
            scaler,
            model,
        })
    }

    pub fn kind(&self) -> ClassicKind {
        match self.model {
            ClassicInner::Svm(_) => ClassicKind::Svm,
            ClassicInner::Knn(_) => ClassicKind::Knn,
            ClassicInner::Forest(_) => ClassicKind::Forest,
        }
    }

    pub fn predict(&self, row: &[T]) -> Result<Label> {
        let scaled;
        let row = match &self.scaler {
            Some(s) => {
                check_dim(s.dim(), row)?;
                scaled = s.transform_row(row);
                &scaled
            }
            None => row,
        };
        match &self.model {
            ClassicInner::Svm(m) => m.predict(row),
            ClassicInner::Knn(m) => m.predict(row),
            ClassicInner::Forest(m) => m.predict(row),
        }
    }

    pub fn predict_all(&self, x: &[Vec<T>]) -> Result<Vec<Label>> {
        x.iter().map(|r| self.predict(r)).collect()
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(src)?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!("unsupported model format version {}", m.version)));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 1;
            let c = if pos { 10.0 } else { 0.0 };
            x.push(vec![c + rng.gen_range(-3.0..3.0), rng.gen_range(0.0..1000.0)]);
            y.push(Label::from_bool(pos));
        }
        (x, y)
    }

    #[test]
    fn every_kind_fits_and_roundtrips() {
        let (x, y) = blobs(60, 1);
        for kind in [ClassicKind::Svm, ClassicKind::Knn, ClassicKind::Forest] {
            let m = ClassicModel::fit(kind, &x, &y, &ClassicConfig::default()).unwrap();
            assert_eq!(m.kind(), kind);
            let p = m.predict_all(&x).unwrap();
            let acc = p.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
            assert!(acc > 0.9, "{kind:?} {acc}");
            let json = serde_json::to_string(&m).unwrap();
            let back = ClassicModel::<f64>::from_json(&json).unwrap();
            assert_eq!(back, m);
            assert!(m.predict(&[1.0]).is_err());
        }
    }

    #[test]
    fn grid_sweep_runs() {
        let (x, y) = blobs(40, 2);
        let cfg = ClassicConfig {
            svm_grid: true,
            ..Default::default()
        };
        let m = ClassicModel::fit(ClassicKind::Svm, &x, &y, &cfg).unwrap();
        assert!(m.config.svm.gamma.is_some());
    }

    #[test]
    fn wrong_version_rejected() {
        let (x, y) = blobs(10, 3);
        let mut m = ClassicModel::fit(ClassicKind::Knn, &x, &y, &ClassicConfig::default()).unwrap();
        m.version = 99;
        assert!(ClassicModel::<f64>::from_json(&serde_json::to_string(&m).unwrap()).is_err());
    }

    #[test]
    fn kind_parses() {
        assert_eq!("RF".parse::<ClassicKind>().unwrap(), ClassicKind::Forest);
        assert!("tree".parse::<ClassicKind>().is_err());
    }
}
