use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_training};
use crate::corpus::Label;
use crate::error::Result;
use crate::scalar::Real;

pub const DEFAULT_ESTIMATORS: usize = 10;
const MIN_SAMPLES_SPLIT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum Node<T> {
    Leaf {
        /// Training samples per class, `[negative, positive]`.
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// Binary tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Tree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Real> Tree<T> {
    pub fn leaf_counts(&self, x: &[T]) -> [usize; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Majority class of the reached leaf; an even split is negative.
    pub fn predict(&self, x: &[T]) -> Label {
        let c = self.leaf_counts(x);
        Label::from_bool(c[1] > c[0])
    }
}

fn gini(c: [usize; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = c[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

struct Builder<'a, T> {
    x: &'a [Vec<T>],
    y: &'a [Label],
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node<T>>,
}

impl<T: Real> Builder<'_, T> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let pos = idx.iter().filter(|&&i| self.y[i].is_positive()).count();
        [idx.len() - pos, pos]
    }

    /// Best (feature, threshold) over `max_features` randomly drawn
    /// features. Drawing continues past that budget while no drawn feature
    /// separates anything, so a node only becomes a leaf when every feature
    /// is constant on it.
    fn best_split(&mut self, idx: &[usize], parent: [usize; 2]) -> Option<(usize, T)> {
        let d = self.x[0].len();
        let feats = sample(&mut self.rng, d, d);
        let n = idx.len() as f64;
        let parent_gini = gini(parent);
        let mut best: Option<(f64, usize, T)> = None;
        let mut order = idx.to_vec();
        for (drawn, f) in feats.iter().enumerate() {
            if drawn >= self.max_features && best.is_some() {
                break;
            }
            order.sort_by(|&a, &b| self.x[a][f].partial_cmp(&self.x[b][f]).unwrap().then(a.cmp(&b)));
            let mut left = [0usize; 2];
            for k in 0..order.len() - 1 {
                left[usize::from(self.y[order[k]].is_positive())] += 1;
                let (v, next) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if v == next {
                    continue;
                }
                let right = [parent[0] - left[0], parent[1] - left[1]];
                let nl = (k + 1) as f64;
                let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
                let gain = parent_gini - impurity;
                if gain > 0.0 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, (v + next) / T::lit(2.0)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        if counts[0] == 0 || counts[1] == 0 || idx.len() < MIN_SAMPLES_SPLIT {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx, counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: DEFAULT_ESTIMATORS,
            seed: 0,
        }
    }
}

/// Bagged Gini trees with `ceil(sqrt(d))` candidate features per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ForestModel<T> {
    pub n_estimators: usize,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<Tree<T>>,
    /// Accuracy of out-of-bag votes; `None` when no sample was ever out of bag.
    pub oob_accuracy: Option<f64>,
}

fn tree_seed(seed: u64, t: usize) -> u64 {
    seed ^ (t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl<T: Real> ForestModel<T> {
    pub fn fit(x: &[Vec<T>], y: &[Label], params: &ForestParams) -> Result<Self> {
        let d = check_training(x, y)?;
        if params.n_estimators == 0 {
            return Err(crate::Error::invalid("forest needs at least one estimator"));
        }
        let n = x.len();
        let max_features = (d as f64).sqrt().ceil() as usize;
        let mut trees = Vec::with_capacity(params.n_estimators);
        let mut oob_votes = vec![[0usize; 2]; n];
        for t in 0..params.n_estimators {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, t));
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut in_bag = vec![false; n];
            idx.iter().for_each(|&i| in_bag[i] = true);
            let mut b = Builder {
                x,
                y,
                max_features: max_features.max(1),
                rng,
                nodes: Vec::new(),
            };
            b.grow(idx);
            let tree = Tree { nodes: b.nodes };
            for i in (0..n).filter(|&i| !in_bag[i]) {
                oob_votes[i][usize::from(tree.predict(&x[i]).is_positive())] += 1;
            }
            trees.push(tree);
        }
        let scored: Vec<(usize, [usize; 2])> =
            oob_votes.iter().copied().enumerate().filter(|(_, v)| v[0] + v[1] > 0).collect();
        let oob_accuracy = (!scored.is_empty()).then(|| {
            let hit = scored
                .iter()
                .filter(|(i, v)| Label::from_bool(v[1] > v[0]) == y[*i])
                .count();
            hit as f64 / scored.len() as f64
        });
        Ok(ForestModel {
            n_estimators: params.n_estimators,
            seed: params.seed,
            n_features: d,
            trees,
            oob_accuracy,
        })
    }

    /// `[negative, positive]` tree votes.
    pub fn votes(&self, x: &[T]) -> Result<[usize; 2]> {
        check_dim(self.n_features, x)?;
        let mut v = [0; 2];
        for t in &self.trees {
            v[usize::from(t.predict(x).is_positive())] += 1;
        }
        Ok(v)
    }

    /// Majority vote; a tie is negative.
    pub fn predict(&self, x: &[T]) -> Result<Label> {
        let v = self.votes(x)?;
        Ok(Label::from_bool(v[1] > v[0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(b: bool) -> Label {
        Label::from_bool(b)
    }

    fn threshold_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
        let y = x.iter().map(|r| l(r[0] > 0.5)).collect();
        (x, y)
    }

    #[test]
    fn pure_data_gives_single_leaves() {
        let x = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]];
        let y = vec![l(true); 3];
        let f = ForestModel::fit(&x, &y, &ForestParams::default()).unwrap();
        assert_eq!(f.trees.len(), 10);
        for t in &f.trees {
            assert_eq!(t.nodes.len(), 1);
            assert!(matches!(t.nodes[0], Node::Leaf { counts } if counts[0] == 0 && counts[1] > 0));
        }
        assert_eq!(f.predict(&[9.0, 9.0]).unwrap(), l(true));
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = threshold_data(80, 1);
        let p = ForestParams { n_estimators: 10, seed: 4 };
        let a = ForestModel::fit(&x, &y, &p).unwrap();
        let b = ForestModel::fit(&x, &y, &p).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = ForestModel::fit(&x, &y, &ForestParams { seed: 5, ..p }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn threshold_data_oob_accuracy() {
        let (x, y) = threshold_data(200, 7);
        let f = ForestModel::fit(&x, &y, &ForestParams::default()).unwrap();
        assert!(f.oob_accuracy.unwrap() >= 0.95, "{:?}", f.oob_accuracy);
    }

    /// One informative column among many constant ones: every tree must
    /// still find it rather than stopping at the root.
    #[test]
    fn constant_columns_do_not_stop_growth() {
        let (x1, y) = threshold_data(120, 3);
        let x: Vec<Vec<f64>> = x1
            .iter()
            .map(|r| {
                let mut row = vec![0.0; 24];
                row[17] = r[0];
                row
            })
            .collect();
        let f = ForestModel::fit(&x, &y, &ForestParams::default()).unwrap();
        for t in &f.trees {
            assert!(t.nodes.len() > 1);
        }
        let correct = x.iter().zip(&y).filter(|(r, l)| f.predict(r).unwrap() == **l).count();
        assert!(correct as f64 / 120.0 >= 0.97, "{correct}");
    }

    fn stump(label: bool) -> Tree<f64> {
        Tree {
            nodes: vec![Node::Leaf {
                counts: if label { [0, 1] } else { [1, 0] },
            }],
        }
    }

    fn forest(pos: usize, neg: usize) -> ForestModel<f64> {
        ForestModel {
            n_estimators: pos + neg,
            seed: 0,
            n_features: 1,
            trees: (0..pos).map(|_| stump(true)).chain((0..neg).map(|_| stump(false))).collect(),
            oob_accuracy: None,
        }
    }

    #[test]
    fn voting_rules() {
        assert_eq!(forest(10, 0).predict(&[0.0]).unwrap(), l(true));
        assert_eq!(forest(0, 10).predict(&[0.0]).unwrap(), l(false));
        assert_eq!(forest(6, 4).predict(&[0.0]).unwrap(), l(true));
        assert_eq!(forest(4, 6).predict(&[0.0]).unwrap(), l(false));
        assert_eq!(forest(5, 5).predict(&[0.0]).unwrap(), l(false));
        assert!(forest(1, 0).predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn tree_order_does_not_matter() {
        let (x, y) = threshold_data(60, 2);
        let f = ForestModel::fit(&x, &y, &ForestParams::default()).unwrap();
        let mut r = f.clone();
        r.trees.reverse();
        for q in &x {
            assert_eq!(f.predict(q).unwrap(), r.predict(q).unwrap());
        }
    }

    #[test]
    fn internal_nodes_have_two_children_and_leaves_are_nonempty() {
        let (x, y) = threshold_data(100, 3);
        let f = ForestModel::fit(&x, &y, &ForestParams::default()).unwrap();
        for t in &f.trees {
            for node in &t.nodes {
                match node {
                    Node::Leaf { counts } => assert!(counts[0] + counts[1] > 0),
                    Node::Split { left, right, .. } => {
                        assert!(*left < t.nodes.len() && *right < t.nodes.len() && left != right)
                    }
                }
            }
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(ForestModel::<f64>::fit(&[], &[], &ForestParams::default()).is_err());
    }
}
