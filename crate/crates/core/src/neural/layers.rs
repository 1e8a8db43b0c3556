//! Tape-free reference layers.

use serde::{Deserialize, Serialize};

use super::tape::{clamp_prob, Activation};
use crate::error::{Error, Result};
use crate::scalar::{dot, sigmoid, Real};

/// Convolution filter of `width` rows over `dim`-wide inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConvFilter<T> {
    pub width: usize,
    pub dim: usize,
    /// Row-major `width x dim`.
    pub weights: Vec<T>,
    pub bias: T,
}

/// `c_p = func(sum(window_p * filter) + b)` for every window of `width`
/// consecutive rows of the `len x dim` input.
pub fn conv_feature_map<T: Real>(input: &[T], len: usize, filter: &ConvFilter<T>, func: Activation) -> Result<Vec<T>> {
    let d = filter.dim;
    if input.len() != len * d || filter.weights.len() != filter.width * d {
        return Err(Error::DimensionMismatch {
            expected: len * d,
            found: input.len(),
        });
    }
    if filter.width == 0 || filter.width > len {
        return Err(Error::invalid(format!("filter width {} exceeds length {len}", filter.width)));
    }
    let span = filter.width * d;
    Ok((0..=len - filter.width)
        .map(|p| func.apply(dot(&input[p * d..p * d + span], &filter.weights) + filter.bias))
        .collect())
}

pub fn max_over_time_pool<T: Real>(map: &[T]) -> Result<T> {
    map.iter()
        .copied()
        .reduce(T::max)
        .ok_or_else(|| Error::invalid("max-over-time of an empty feature map"))
}

/// Gate weights over `[h_prev, x]`, each `hidden x (hidden + input)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LstmCell<T> {
    pub hidden: usize,
    pub input: usize,
    pub w_i: Vec<T>,
    pub w_f: Vec<T>,
    pub w_c: Vec<T>,
    pub w_o: Vec<T>,
    pub b_i: Vec<T>,
    pub b_f: Vec<T>,
    pub b_c: Vec<T>,
    pub b_o: Vec<T>,
}

impl<T: Real> LstmCell<T> {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        let w = vec![T::zero(); hidden * (hidden + input)];
        let b = vec![T::zero(); hidden];
        LstmCell {
            hidden,
            input,
            w_i: w.clone(),
            w_f: w.clone(),
            w_c: w.clone(),
            w_o: w,
            b_i: b.clone(),
            b_f: b.clone(),
            b_c: b.clone(),
            b_o: b,
        }
    }

    /// Gates stacked as rows `[i; f; c; o]`, the layout the models train.
    pub fn stacked(&self) -> (Vec<T>, Vec<T>) {
        let w = [&self.w_i, &self.w_f, &self.w_c, &self.w_o].iter().flat_map(|v| v.iter().copied()).collect();
        let b = [&self.b_i, &self.b_f, &self.b_c, &self.b_o].iter().flat_map(|v| v.iter().copied()).collect();
        (w, b)
    }
}

/// One LSTM transition; returns `(h_t, C_t)`.
pub fn lstm_step<T: Real>(cell: &LstmCell<T>, x: &[T], h_prev: &[T], c_prev: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let dh = cell.hidden;
    let width = dh + cell.input;
    if x.len() != cell.input || h_prev.len() != dh || c_prev.len() != dh {
        return Err(Error::DimensionMismatch {
            expected: cell.input,
            found: x.len(),
        });
    }
    for w in [&cell.w_i, &cell.w_f, &cell.w_c, &cell.w_o] {
        if w.len() != dh * width {
            return Err(Error::DimensionMismatch {
                expected: dh * width,
                found: w.len(),
            });
        }
    }
    let hx: Vec<T> = h_prev.iter().chain(x).copied().collect();
    let gate = |w: &[T], b: &[T], r: usize| dot(&w[r * width..(r + 1) * width], &hx) + b[r];
    let mut h = Vec::with_capacity(dh);
    let mut c = Vec::with_capacity(dh);
    for r in 0..dh {
        let i = sigmoid(gate(&cell.w_i, &cell.b_i, r));
        let f = sigmoid(gate(&cell.w_f, &cell.b_f, r));
        let o = sigmoid(gate(&cell.w_o, &cell.b_o, r));
        let cand = gate(&cell.w_c, &cell.b_c, r).tanh();
        let ct = f * c_prev[r] + i * cand;
        c.push(ct);
        h.push(o * ct.tanh());
    }
    Ok((h, c))
}

/// Mean two-term binary cross-entropy with predictions clamped to
/// `[1e-7, 1 - 1e-7]`.
pub fn bce_loss<T: Real>(predictions: &[T], targets: &[T]) -> Result<T> {
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            found: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let sum: T = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            let p = clamp_prob(p);
            -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
        })
        .sum();
    Ok(sum / T::from_count(predictions.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conv_zero_input_and_length() {
        let f = ConvFilter {
            width: 3,
            dim: 2,
            weights: vec![0.3; 6],
            bias: 0.0,
        };
        let m = conv_feature_map(&vec![0.0f64; 72], 36, &f, Activation::Tanh).unwrap();
        assert_eq!(m.len(), 34);
        assert!(m.iter().all(|&v| v == 0.0));
        let wide = ConvFilter { width: 37, weights: vec![0.0; 74], ..f };
        assert!(conv_feature_map(&vec![0.0f64; 72], 36, &wide, Activation::Tanh).is_err());
    }

    #[test]
    fn conv_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (len, d, k) = (9, 4, 3);
        let input: Vec<f64> = (0..len * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ConvFilter {
            width: k,
            dim: d,
            weights: (0..k * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            bias: 0.2,
        };
        let got = conv_feature_map(&input, len, &f, Activation::Tanh).unwrap();
        for p in 0..=len - k {
            let mut s = f.bias;
            for r in 0..k {
                for c in 0..d {
                    s += input[(p + r) * d + c] * f.weights[r * d + c];
                }
            }
            assert!((got[p] - s.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn max_pool_cases() {
        assert_eq!(max_over_time_pool(&[0.1, 0.9, 0.3]).unwrap(), 0.9);
        assert_eq!(max_over_time_pool(&[0.4; 5]).unwrap(), 0.4);
        assert_eq!(max_over_time_pool(&[-2.0]).unwrap(), -2.0);
        assert!(max_over_time_pool::<f64>(&[]).is_err());
    }

    #[test]
    fn zero_cell_gives_zero_state() {
        let cell = LstmCell::<f64>::zeros(3, 2);
        let (h, c) = lstm_step(&cell, &[0.7, -4.0], &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);
    }

    #[test]
    fn saturated_forget_gate_keeps_memory() {
        let mut cell = LstmCell::<f64>::zeros(2, 1);
        cell.b_f = vec![50.0; 2];
        cell.b_c = vec![0.5; 2];
        let c_prev = [0.3, -0.8];
        let (_, c) = lstm_step(&cell, &[1.0], &[0.1, 0.2], &c_prev).unwrap();
        let i = 0.5;
        for r in 0..2 {
            assert!((c[r] - (c_prev[r] + i * 0.5f64.tanh())).abs() < 1e-12);
        }
    }

    #[test]
    fn lstm_dimension_checks() {
        let cell = LstmCell::<f64>::zeros(2, 1);
        assert!(lstm_step(&cell, &[1.0, 2.0], &[0.0; 2], &[0.0; 2]).is_err());
        assert!(lstm_step(&cell, &[1.0], &[0.0; 3], &[0.0; 2]).is_err());
    }

    #[test]
    fn bce_values() {
        assert!(bce_loss(&[1.0f64], &[1.0]).unwrap() < 1e-6);
        assert!((bce_loss(&[0.5f64], &[1.0]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((bce_loss(&[0.5f64], &[0.0]).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(bce_loss(&[0.5f64], &[]).is_err());
        assert!(bce_loss::<f64>(&[], &[]).is_err());
    }
}
