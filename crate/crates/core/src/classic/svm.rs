use serde::{Deserialize, Serialize};

use super::{check_dim, check_training};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Real};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-3;
/// Largest training set whose kernel matrix is precomputed.
pub const KERNEL_CACHE_LIMIT: usize = 2000;
const TAU: f64 = 1e-12;

/// `exp(-gamma * |u - v|^2)`.
pub fn rbf<T: Real>(u: &[T], v: &[T], gamma: T) -> T {
    (-gamma * squared_distance(u, v)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// `None` means `max(10 n, 10000)` working-pair updates.
    pub max_iter: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: DEFAULT_C,
            gamma: None,
            tol: DEFAULT_TOL,
            max_iter: None,
        }
    }
}

/// Kernel SVM in dual form; only support vectors are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SvmModel<T> {
    pub c: f64,
    pub gamma: f64,
    pub support_vectors: Vec<Vec<T>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coef: Vec<T>,
    pub bias: T,
    pub iterations: usize,
    /// Final maximal KKT violation `m(alpha) - M(alpha)`.
    pub max_violation: f64,
    pub converged: bool,
}

enum Kernel<'a, T> {
    Cached(Vec<T>),
    OnDemand(&'a [Vec<T>], T),
}

impl<T: Real> Kernel<'_, T> {
    fn row(&self, i: usize, n: usize, out: &mut Vec<T>) {
        out.clear();
        match self {
            Kernel::Cached(k) => out.extend_from_slice(&k[i * n..(i + 1) * n]),
            Kernel::OnDemand(x, g) => out.extend(x.iter().map(|r| rbf(&x[i], r, *g))),
        }
    }
}

impl<T: Real> SvmModel<T> {
    /// Sequential minimal optimization with maximal-violating-pair selection.
    pub fn fit(x: &[Vec<T>], y: &[Label], params: &SvmParams) -> Result<Self> {
        let d = check_training(x, y)?;
        let n = x.len();
        let yy: Vec<T> = y.iter().map(|l| if l.is_positive() { T::one() } else { -T::one() }).collect();
        if n < 2 || yy.iter().all(|&v| v == yy[0]) {
            return Err(Error::invalid("svm needs both classes in the training set"));
        }
        if !(params.c > 0.0) || !(params.tol > 0.0) {
            return Err(Error::invalid("svm C and tolerance must be positive"));
        }
        let gamma_f = params.gamma.unwrap_or(1.0 / d as f64);
        if !(gamma_f > 0.0) {
            return Err(Error::invalid("svm gamma must be positive"));
        }
        let gamma = T::lit(gamma_f);
        let c = T::lit(params.c);
        let tol = T::lit(params.tol);
        let tau = T::lit(TAU);
        let max_iter = params.max_iter.unwrap_or((10 * n).max(10_000));

        let kernel = if n <= KERNEL_CACHE_LIMIT {
            let mut k = vec![T::zero(); n * n];
            for i in 0..n {
                k[i * n + i] = T::one();
                for j in 0..i {
                    let v = rbf(&x[i], &x[j], gamma);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            Kernel::Cached(k)
        } else {
            Kernel::OnDemand(x, gamma)
        };

        let mut alpha = vec![T::zero(); n];
        // gradient of 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij
        let mut grad = vec![-T::one(); n];
        let in_up = |a: T, yv: T| (yv > T::zero() && a < c) || (yv < T::zero() && a > T::zero());
        let in_low = |a: T, yv: T| (yv > T::zero() && a > T::zero()) || (yv < T::zero() && a < c);
        let (mut ki, mut kj) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut iterations = 0;
        let mut violation;
        loop {
            let mut i = usize::MAX;
            let mut j = usize::MAX;
            let mut g_max = T::neg_infinity();
            let mut g_min = T::infinity();
            for t in 0..n {
                let v = -yy[t] * grad[t];
                if in_up(alpha[t], yy[t]) && v > g_max {
                    g_max = v;
                    i = t;
                }
                if in_low(alpha[t], yy[t]) && v < g_min {
                    g_min = v;
                    j = t;
                }
            }
            violation = g_max - g_min;
            if i == usize::MAX || j == usize::MAX || violation < tol || iterations >= max_iter {
                break;
            }
            iterations += 1;
            kernel.row(i, n, &mut ki);
            kernel.row(j, n, &mut kj);
            let (ai_old, aj_old) = (alpha[i], alpha[j]);
            let qij = yy[i] * yy[j] * ki[j];
            if yy[i] != yy[j] {
                let quad = (ki[i] + kj[j] + T::lit(2.0) * qij).max(tau);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > T::zero() {
                    if alpha[j] < T::zero() {
                        alpha[j] = T::zero();
                        alpha[i] = diff;
                    }
                } else if alpha[i] < T::zero() {
                    alpha[i] = T::zero();
                    alpha[j] = -diff;
                }
                if diff > T::zero() {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (ki[i] + kj[j] - T::lit(2.0) * qij).max(tau);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < T::zero() {
                    alpha[i] = T::zero();
                    alpha[j] = sum;
                }
            }
            let (dai, daj) = (alpha[i] - ai_old, alpha[j] - aj_old);
            for t in 0..n {
                grad[t] += yy[t] * (yy[i] * ki[t] * dai + yy[j] * kj[t] * daj);
            }
        }

        // rho: mean of y_t G_t over free vectors, else midpoint of the feasible range
        let mut ub = T::infinity();
        let mut lb = T::neg_infinity();
        let mut free_sum = T::zero();
        let mut free = 0usize;
        for t in 0..n {
            let yg = yy[t] * grad[t];
            let at_upper = alpha[t] >= c;
            let at_lower = alpha[t] <= T::zero();
            if at_upper {
                if yy[t] < T::zero() {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if yy[t] > T::zero() {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        let rho = if free > 0 {
            free_sum / T::from_count(free)
        } else {
            (ub + lb) / T::lit(2.0)
        };

        let mut support_vectors = Vec::new();
        let mut dual_coef = Vec::new();
        for t in 0..n {
            if alpha[t] > T::zero() {
                support_vectors.push(x[t].clone());
                dual_coef.push(alpha[t] * yy[t]);
            }
        }
        Ok(SvmModel {
            c: params.c,
            gamma: gamma_f,
            support_vectors,
            dual_coef,
            bias: -rho,
            iterations,
            max_violation: violation.as_f64(),
            converged: violation < tol,
        })
    }

    pub fn decision_value(&self, query: &[T]) -> Result<T> {
        if let Some(sv) = self.support_vectors.first() {
            check_dim(sv.len(), query)?;
        }
        let g = T::lit(self.gamma);
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &a)| a * rbf(sv, query, g))
            .sum::<T>()
            + self.bias)
    }

    /// Positive decision value is sarcastic; zero is not.
    pub fn predict(&self, query: &[T]) -> Result<Label> {
        Ok(Label::from_bool(self.decision_value(query)? > T::zero()))
    }
}

/// Candidate grid: C in {0.1, 1, 10}, gamma in {0.01, 0.1, 1/d, 1}.
pub fn default_grid(n_features: usize) -> Vec<SvmParams> {
    let mut out = Vec::new();
    for c in [0.1, 1.0, 10.0] {
        for g in [0.01, 0.1, 1.0 / n_features.max(1) as f64, 1.0] {
            out.push(SvmParams {
                c,
                gamma: Some(g),
                ..SvmParams::default()
            });
        }
    }
    out
}

/// Picks the grid point with the best validation accuracy; the earliest
/// point wins ties.
pub fn grid_search<T: Real>(
    train_x: &[Vec<T>],
    train_y: &[Label],
    val_x: &[Vec<T>],
    val_y: &[Label],
    grid: &[SvmParams],
) -> Result<(SvmParams, f64)> {
    let mut best: Option<(SvmParams, f64)> = None;
    for p in grid {
        let m = SvmModel::fit(train_x, train_y, p)?;
        let mut hit = 0usize;
        for (q, l) in val_x.iter().zip(val_y) {
            hit += usize::from(m.predict(q)? == *l);
        }
        let acc = hit as f64 / val_x.len().max(1) as f64;
        if best.is_none_or(|(_, a)| acc > a) {
            best = Some((*p, acc));
        }
    }
    best.ok_or_else(|| Error::invalid("empty svm grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l(b: bool) -> Label {
        Label::from_bool(b)
    }

    fn accuracy(m: &SvmModel<f64>, x: &[Vec<f64>], y: &[Label]) -> f64 {
        x.iter().zip(y).filter(|(q, l)| m.predict(q).unwrap() == **l).count() as f64 / x.len() as f64
    }

    fn check_feasible(m: &SvmModel<f64>) {
        for a in &m.dual_coef {
            assert!(a.abs() <= m.c + 1e-12 && *a != 0.0);
        }
        assert!(m.dual_coef.iter().sum::<f64>().abs() < 1e-6);
    }

    #[test]
    fn two_point_set() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let y = vec![l(false), l(true)];
        let m = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        check_feasible(&m);
        assert_eq!(m.predict(&m.support_vectors[1].clone()).unwrap(), l(true));
    }

    #[test]
    fn separable_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..50 {
            let pos = i % 2 == 0;
            let centre = if pos { 1.5 } else { -1.5 };
            x.push(vec![centre + rng.gen_range(-0.5..0.5), centre + rng.gen_range(-0.5..0.5)]);
            y.push(l(pos));
        }
        let m = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        assert!(m.converged && m.max_violation < 1e-3, "{}", m.max_violation);
        check_feasible(&m);
        let batch: Vec<Label> = x.iter().map(|q| m.predict(q).unwrap()).collect();
        for (q, b) in x.iter().zip(&batch) {
            assert_eq!(m.predict(q).unwrap(), *b);
        }
    }

    fn dual_objective(x: &[Vec<f64>], y: &[f64], a: &[f64], g: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                s += a[i] * a[j] * y[i] * y[j] * rbf(&x[i], &x[j], g);
            }
        }
        0.5 * s - a.iter().sum::<f64>()
    }

    #[test]
    fn xor_with_rbf_matches_dense_dual_grid() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![l(false), l(false), l(true), l(true)];
        let ys = [-1.0, -1.0, 1.0, 1.0];
        let params = SvmParams {
            gamma: Some(1.0),
            tol: 1e-6,
            ..SvmParams::default()
        };
        let m = SvmModel::fit(&x, &y, &params).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        check_feasible(&m);

        // grid over (a0, a1, a2) with a3 fixed by sum(a y) = 0
        let steps = 100;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let a = [i as f64 / steps as f64, j as f64 / steps as f64, k as f64 / steps as f64];
                    let a3 = a[0] + a[1] - a[2];
                    if !(0.0..=1.0).contains(&a3) {
                        continue;
                    }
                    best = best.min(dual_objective(&x, &ys, &[a[0], a[1], a[2], a3], 1.0));
                }
            }
        }
        let mut alpha = vec![0.0; 4];
        for (sv, coef) in m.support_vectors.iter().zip(&m.dual_coef) {
            let idx = x.iter().position(|r| r == sv).unwrap();
            alpha[idx] = coef.abs();
        }
        let smo = dual_objective(&x, &ys, &alpha, 1.0);
        assert!(smo <= best + 1e-9, "smo {smo} vs grid {best}");
        assert!(best - smo < 1e-2, "grid optimum {best} too far above smo {smo}");
    }

    #[test]
    fn zero_decision_is_negative() {
        let m = SvmModel::<f64> {
            c: 1.0,
            gamma: 1.0,
            support_vectors: vec![],
            dual_coef: vec![],
            bias: 0.0,
            iterations: 0,
            max_violation: 0.0,
            converged: true,
        };
        assert_eq!(m.predict(&[1.0]).unwrap(), l(false));
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(SvmModel::fit(&x, &[l(true), l(true)], &SvmParams::default()).is_err());
    }

    #[test]
    fn kernel_matrix_symmetric_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Vec<f64>> = (0..12).map(|_| (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        for i in 0..12 {
            assert_eq!(rbf(&x[i], &x[i], 0.7), 1.0);
            for j in 0..12 {
                assert_eq!(rbf(&x[i], &x[j], 0.7), rbf(&x[j], &x[i], 0.7));
            }
        }
    }

    #[test]
    fn grid_search_picks_a_point() {
        let x = vec![vec![0.0], vec![0.2], vec![1.0], vec![1.2]];
        let y = vec![l(false), l(false), l(true), l(true)];
        let (p, acc) = grid_search(&x, &y, &x, &y, &default_grid(1)).unwrap();
        assert_eq!(acc, 1.0);
        assert!(p.gamma.is_some());
    }

    #[test]
    fn deterministic() {
        let x = vec![vec![0.0, 1.0], vec![0.3, 0.2], vec![1.0, 0.0], vec![0.9, 0.8]];
        let y = vec![l(false), l(true), l(false), l(true)];
        let a = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        let b = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        assert_eq!(a, b);
    }
}
